//! Built-in table of expected values for the `--check` mode.

use hyperqkd_core::adversary::{AttackKind, EveBasisStrategy};
use hyperqkd_core::montecarlo::Estimate;
use hyperqkd_core::{BatchStats, SimConfig};
use serde::{Deserialize, Serialize};

pub const BITS_PER_COINCIDENCE: (f64, f64) = (1.5, 0.01);
pub const EKERT_RATIO: (f64, f64) = (6.75, 0.05);
pub const NO_ATTACK_MISMATCH: (f64, f64) = (0.0, 0.0);
pub const SINGLE_INTERCEPT_MISMATCH: (f64, f64) = (0.25, 0.01);
pub const DOUBLE_SAME_BASES_MISMATCH: (f64, f64) = (0.25, 0.01);
pub const DOUBLE_DIFFERENT_BASES_MISMATCH: (f64, f64) = (0.5, 0.01);

/// One expected value compared against one estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub expected: f64,
    pub tolerance: f64,
    /// `None` when the estimator had no samples, which counts as a failure.
    pub observed: Option<f64>,
    pub pass: bool,
}

impl Verdict {
    fn new(name: &str, (expected, tolerance): (f64, f64), observed: Option<f64>) -> Self {
        let pass = observed.is_some_and(|v| (v - expected).abs() <= tolerance);
        Verdict {
            name: name.to_string(),
            expected,
            tolerance,
            observed,
            pass,
        }
    }
}

fn value(e: Option<Estimate>) -> Option<f64> {
    e.map(|e| e.value)
}

/// Verdicts that apply to the scenario `config` describes.
pub fn evaluate(config: &SimConfig, stats: &BatchStats) -> Vec<Verdict> {
    let mut verdicts = vec![
        Verdict::new(
            "bits_per_coincidence",
            BITS_PER_COINCIDENCE,
            value(stats.bits_per_coincidence),
        ),
        Verdict::new("ekert_ratio", EKERT_RATIO, stats.ekert_ratio),
    ];
    let mismatch = value(stats.same_basis_mismatch_rate);
    match config.attack.map(|a| a.kind) {
        None => verdicts.push(Verdict::new(
            "same_basis_mismatch_rate",
            NO_ATTACK_MISMATCH,
            mismatch,
        )),
        Some(AttackKind::SingleIntercept) => verdicts.push(Verdict::new(
            "same_basis_mismatch_rate",
            SINGLE_INTERCEPT_MISMATCH,
            mismatch,
        )),
        Some(AttackKind::DoubleIntercept) => {
            let detection = stats.detection;
            let (same, different) = match config.attack.map(|a| a.basis_strategy) {
                Some(EveBasisStrategy::FixedSame(_)) => (true, false),
                Some(EveBasisStrategy::FixedDifferent(_)) => (false, true),
                _ => (true, true),
            };
            if same {
                verdicts.push(Verdict::new(
                    "detection_eve_same_bases",
                    DOUBLE_SAME_BASES_MISMATCH,
                    value(detection.and_then(|d| d.eve_same_bases)),
                ));
            }
            if different {
                verdicts.push(Verdict::new(
                    "detection_eve_different_bases",
                    DOUBLE_DIFFERENT_BASES_MISMATCH,
                    value(detection.and_then(|d| d.eve_different_bases)),
                ));
            }
        }
    }
    verdicts
}
