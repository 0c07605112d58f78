//! Report document and its JSON and CSV renderings.

use hyperqkd_core::adversary::EveBasisStrategy;
use hyperqkd_core::montecarlo::Estimate;
use hyperqkd_core::{AttackKind, BatchStats, SimConfig};
use serde::{Deserialize, Serialize};

use crate::check::Verdict;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    /// Seconds since the Unix epoch; absent under `--deterministic-output`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    pub config: SimConfig,
    pub stats: BatchStats,
    /// Present only under `--check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<Verdict>>,
}

impl ReportDocument {
    pub fn passed(&self) -> bool {
        self.checks.iter().flatten().all(|v| v.pass)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_csv(&self) -> csv::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(CsvRow::from(self))?;
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Flat projection of a report, one column per scalar. Column order is the
/// field order below; undefined estimators are empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub schema_version: String,
    pub generated_at: Option<u64>,
    pub rounds: u64,
    pub seed: u64,
    pub efficiency: f64,
    pub attack: String,
    pub eve_bases: String,
    pub verify_fraction: f64,
    pub workers: usize,
    pub coincidences: u64,
    pub coincidence_rate: f64,
    pub coincidence_rate_se: f64,
    pub same_basis_count: u64,
    pub diff_basis_count: u64,
    pub bits_per_coincidence: Option<f64>,
    pub bits_per_coincidence_se: Option<f64>,
    pub same_basis_mismatch_rate: Option<f64>,
    pub same_basis_mismatch_rate_se: Option<f64>,
    pub verification_compared_rounds: usize,
    pub verification_mismatches: usize,
    pub verification_mismatch_rate: Option<f64>,
    pub key_length: u64,
    pub key_bit_error_rate: Option<f64>,
    pub key_bit_error_rate_se: Option<f64>,
    pub eve_certain_fraction: Option<f64>,
    pub eve_same_basis_fraction: Option<f64>,
    pub eve_diff_basis_fraction: Option<f64>,
    pub eve_guessing_accuracy: Option<f64>,
    pub detection_all: Option<f64>,
    pub detection_all_se: Option<f64>,
    pub detection_eve_same_bases: Option<f64>,
    pub detection_eve_same_bases_se: Option<f64>,
    pub detection_eve_different_bases: Option<f64>,
    pub detection_eve_different_bases_se: Option<f64>,
    pub ekert_ratio: Option<f64>,
    /// `pass` or `fail` under `--check`, empty otherwise.
    pub check: Option<String>,
}

fn split(e: Option<Estimate>) -> (Option<f64>, Option<f64>) {
    (e.map(|e| e.value), e.map(|e| e.std_error))
}

fn attack_name(config: &SimConfig) -> (String, String) {
    match config.attack {
        None => ("none".into(), String::new()),
        Some(a) => {
            let kind = match a.kind {
                AttackKind::SingleIntercept => "single",
                AttackKind::DoubleIntercept => "double",
            };
            let bases = match a.basis_strategy {
                EveBasisStrategy::RandomPerRound => "random".to_string(),
                EveBasisStrategy::FixedSame(b) => format!("same:{b}"),
                EveBasisStrategy::FixedDifferent(b) => format!("different:{b}"),
            };
            (kind.into(), bases)
        }
    }
}

impl From<&ReportDocument> for CsvRow {
    fn from(doc: &ReportDocument) -> Self {
        let (c, s) = (&doc.config, &doc.stats);
        let (attack, eve_bases) = attack_name(c);
        let (bits_per_coincidence, bits_per_coincidence_se) = split(s.bits_per_coincidence);
        let (same_basis_mismatch_rate, same_basis_mismatch_rate_se) =
            split(s.same_basis_mismatch_rate);
        let (key_bit_error_rate, key_bit_error_rate_se) = split(s.key_bit_error_rate);
        let d = s.detection;
        let (detection_all, detection_all_se) = split(d.and_then(|d| d.all));
        let (detection_eve_same_bases, detection_eve_same_bases_se) =
            split(d.and_then(|d| d.eve_same_bases));
        let (detection_eve_different_bases, detection_eve_different_bases_se) =
            split(d.and_then(|d| d.eve_different_bases));
        let eve = s.eve_information;
        CsvRow {
            schema_version: doc.schema_version.clone(),
            generated_at: doc.generated_at,
            rounds: c.rounds,
            seed: c.seed,
            efficiency: c.efficiency,
            attack,
            eve_bases,
            verify_fraction: c.verify_fraction,
            workers: c.workers,
            coincidences: s.coincidences,
            coincidence_rate: s.coincidence_rate.value,
            coincidence_rate_se: s.coincidence_rate.std_error,
            same_basis_count: s.same_basis_count,
            diff_basis_count: s.diff_basis_count,
            bits_per_coincidence,
            bits_per_coincidence_se,
            same_basis_mismatch_rate,
            same_basis_mismatch_rate_se,
            verification_compared_rounds: s.verification.compared_rounds,
            verification_mismatches: s.verification.mismatches,
            verification_mismatch_rate: s.verification.mismatch_rate,
            key_length: s.key_length,
            key_bit_error_rate,
            key_bit_error_rate_se,
            eve_certain_fraction: eve.map(|e| e.certain_fraction),
            eve_same_basis_fraction: eve.and_then(|e| e.same_basis_fraction),
            eve_diff_basis_fraction: eve.and_then(|e| e.diff_basis_fraction),
            eve_guessing_accuracy: eve.map(|e| e.guessing_accuracy),
            detection_all,
            detection_all_se,
            detection_eve_same_bases,
            detection_eve_same_bases_se,
            detection_eve_different_bases,
            detection_eve_different_bases_se,
            ekert_ratio: s.ekert_ratio,
            check: doc
                .checks
                .as_ref()
                .map(|_| if doc.passed() { "pass" } else { "fail" }.to_string()),
        }
    }
}
