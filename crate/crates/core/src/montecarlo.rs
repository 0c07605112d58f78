//! Seeded batch driver and the estimators reported for a batch.
//!
//! Every round draws from its own ChaCha8 stream seeded by mixing the round id
//! into the master seed, so the partitioning of rounds across worker threads
//! cannot change any outcome.

use std::collections::{BTreeSet, HashMap};
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{eve_information, AttackConfig, EveInformation, EveRecord};
use crate::error::{QkdError, Result};
use crate::protocol::{
    build_keys, run_round_with, sift, verify_sample, KeyBits, RoundRecord, RoundSettings,
    VerificationReport,
};

/// Key bits per pair in the Ekert91 baseline.
pub const EKERT_BITS_PER_PAIR: f64 = 2.0 / 9.0;

/// Mixed into the master seed to get the verification-sampling stream.
const VERIFY_STREAM: u64 = 0x7665_7269_6679_5f31;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub rounds: u64,
    pub seed: u64,
    pub efficiency: f64,
    pub attack: Option<AttackConfig>,
    /// Share of same-basis rounds sacrificed for public comparison; 0 disables it.
    pub verify_fraction: f64,
    pub workers: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            rounds: 100_000,
            seed: 42,
            efficiency: 1.0,
            attack: None,
            verify_fraction: 0.1,
            workers: 1,
        }
    }
}

impl SimConfig {
    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.rounds < 1 {
            problems.push("rounds must be at least 1".to_string());
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            problems.push(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            ));
        }
        if !(0.0..1.0).contains(&self.verify_fraction) {
            problems.push(format!(
                "verify_fraction must lie in [0, 1), got {}",
                self.verify_fraction
            ));
        }
        if self.workers < 1 {
            problems.push("workers must be at least 1".to_string());
        }
        if let Some(Err(QkdError::InvalidConfig(mut p))) = self.attack.map(|a| a.validate()) {
            problems.append(&mut p);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(QkdError::InvalidConfig(problems))
        }
    }

    fn round_settings(&self) -> RoundSettings {
        RoundSettings {
            attack: self.attack,
            efficiency: self.efficiency,
            ..RoundSettings::default()
        }
    }
}

/// A proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn proportion(successes: u64, samples: u64) -> Option<Estimate> {
        if samples == 0 {
            return None;
        }
        let p = successes as f64 / samples as f64;
        Some(Estimate {
            value: p,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        })
    }

    /// Whether `expected` lies within `k` standard errors, with `floor` as the
    /// minimum allowed deviation (for estimates with zero variance).
    pub fn agrees_with(&self, expected: f64, k: f64, floor: f64) -> bool {
        (self.value - expected).abs() <= (k * self.std_error).max(floor)
    }
}

/// Same-basis outcome mismatch under a double intercept, split by whether
/// Eve's two bases were equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    pub all: Option<Estimate>,
    pub eve_same_bases: Option<Estimate>,
    pub eve_different_bases: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub rounds: u64,
    pub coincidences: u64,
    pub coincidence_rate: Estimate,
    pub same_basis_count: u64,
    pub diff_basis_count: u64,
    /// `(2·same + diff) / coincidences`, before any verification deduction.
    pub bits_per_coincidence: Option<Estimate>,
    /// Outcome mismatch over every coincident same-basis round.
    pub same_basis_mismatch_rate: Option<Estimate>,
    /// The public comparison Alice and Bob actually perform.
    pub verification: VerificationReport,
    pub key_length: u64,
    /// Disagreement between Alice's and Bob's final keys, per bit.
    pub key_bit_error_rate: Option<Estimate>,
    pub eve_information: Option<EveInformation>,
    pub detection: Option<DetectionStats>,
    pub ekert_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub stats: BatchStats,
    pub records: Vec<RoundRecord>,
    pub alice_key: KeyBits,
    pub bob_key: KeyBits,
    pub eve_traces: Vec<EveRecord>,
    /// Round ids spent on verification.
    pub verified_rounds: BTreeSet<u64>,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of round `round_id`'s private stream.
pub fn round_seed(master: u64, round_id: u64) -> u64 {
    mix64(master ^ mix64(round_id.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

pub fn round_rng(master: u64, round_id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(round_seed(master, round_id))
}

fn run_range(config: &SimConfig, ids: std::ops::Range<u64>) -> Result<Vec<RoundRecord>> {
    let settings = config.round_settings();
    ids.map(|id| run_round_with(id, &settings, &mut round_rng(config.seed, id)))
        .collect()
}

/// Runs `config.rounds` rounds, split into contiguous id ranges across
/// `config.workers` threads. Records come back ordered by round id.
pub fn run_rounds(config: &SimConfig) -> Result<Vec<RoundRecord>> {
    config.validate()?;
    let workers = (config.workers as u64).min(config.rounds).max(1);
    if workers == 1 {
        return run_range(config, 0..config.rounds);
    }
    let chunk = config.rounds.div_ceil(workers);
    let parts: Vec<Result<Vec<RoundRecord>>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let start = w * chunk;
                let end = ((w + 1) * chunk).min(config.rounds);
                s.spawn(move || run_range(config, start..end))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("round worker panicked"))
            .collect()
    });
    let mut records = Vec::with_capacity(config.rounds as usize);
    for part in parts {
        records.extend(part?);
    }
    Ok(records)
}

pub fn run_batch(config: &SimConfig) -> Result<BatchOutput> {
    let records = run_rounds(config)?;
    let groups = sift(&records);

    let (verification, verified_rounds) = if config.verify_fraction > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(config.seed ^ VERIFY_STREAM));
        verify_sample(&groups, config.verify_fraction, &mut rng)?
    } else {
        (VerificationReport::undefined(), BTreeSet::new())
    };
    let (alice_key, bob_key) = build_keys(&groups, &verified_rounds);
    let eve_traces: Vec<EveRecord> = records.iter().filter_map(|r| r.eve_trace).collect();

    let same = groups.same_basis.len() as u64;
    let diff = groups.diff_basis.len() as u64;
    let coincidences = same + diff;

    let bits_per_coincidence = Estimate::proportion(same, coincidences).map(|p| Estimate {
        value: (2 * same + diff) as f64 / coincidences as f64,
        ..p
    });
    let same_mismatches = groups
        .same_basis
        .iter()
        .filter(|r| r.outcome_mismatch())
        .count() as u64;
    let key_errors = alice_key
        .bits
        .iter()
        .zip(&bob_key.bits)
        .filter(|(a, b)| a != b)
        .count() as u64;

    let eve_info = match config.attack {
        Some(_) => Some(eve_information(&eve_traces, &records, &alice_key)?),
        None => None,
    };
    let detection = match config.attack {
        Some(_) => Some(detection_probability(&records, &eve_traces)?),
        None => None,
    };

    let stats = BatchStats {
        rounds: config.rounds,
        coincidences,
        coincidence_rate: Estimate::proportion(coincidences, config.rounds)
            .expect("rounds validated to be nonzero"),
        same_basis_count: same,
        diff_basis_count: diff,
        ekert_ratio: bits_per_coincidence.map(|b| ekert_ratio(b.value)),
        bits_per_coincidence,
        same_basis_mismatch_rate: Estimate::proportion(same_mismatches, same),
        verification,
        key_length: alice_key.len() as u64,
        key_bit_error_rate: Estimate::proportion(key_errors, alice_key.len() as u64),
        eve_information: eve_info,
        detection,
    };

    Ok(BatchOutput {
        stats,
        records,
        alice_key,
        bob_key,
        eve_traces,
        verified_rounds,
    })
}

/// Key-rate advantage over the Ekert91 baseline of 2/9 bits per pair.
pub fn ekert_ratio(bits_per_coincidence: f64) -> f64 {
    bits_per_coincidence / EKERT_BITS_PER_PAIR
}

/// Same-basis outcome mismatch rate over all coincident same-basis rounds,
/// and stratified by whether Eve's two bases agreed. Strata with no compared
/// rounds are `None`.
pub fn detection_probability(
    records: &[RoundRecord],
    traces: &[EveRecord],
) -> Result<DetectionStats> {
    let by_round: HashMap<u64, &EveRecord> = traces.iter().map(|t| (t.round_id, t)).collect();
    if by_round.len() != traces.len() {
        let dup = traces
            .iter()
            .find(|t| traces.iter().filter(|u| u.round_id == t.round_id).count() > 1)
            .map_or(0, |t| t.round_id);
        return Err(QkdError::MisalignedRound(dup));
    }
    let known: BTreeSet<u64> = records.iter().map(|r| r.round_id).collect();
    if let Some(t) = traces.iter().find(|t| !known.contains(&t.round_id)) {
        return Err(QkdError::MisalignedRound(t.round_id));
    }

    // (compared, mismatched) for all / equal / different
    let mut tallies = [(0u64, 0u64); 3];
    for r in records
        .iter()
        .filter(|r| r.is_coincident() && r.same_basis())
    {
        let mismatch = r.outcome_mismatch() as u64;
        let mut bump = |i: usize| {
            tallies[i].0 += 1;
            tallies[i].1 += mismatch;
        };
        bump(0);
        match by_round.get(&r.round_id).and_then(|t| t.bases_equal()) {
            Some(true) => bump(1),
            Some(false) => bump(2),
            None => {}
        }
    }
    let est = |(n, k): (u64, u64)| Estimate::proportion(k, n);
    Ok(DetectionStats {
        all: est(tallies[0]),
        eve_same_bases: est(tallies[1]),
        eve_different_bases: est(tallies[2]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::EveBasisStrategy;

    #[test]
    fn ekert_ratio_examples() {
        assert!((ekert_ratio(1.5) - 6.75).abs() < 1e-12);
        assert!((ekert_ratio(2.0 / 9.0) - 1.0).abs() < 1e-12);
        assert_eq!(ekert_ratio(0.0), 0.0);
    }

    #[test]
    fn config_validation_lists_every_violation() {
        let cfg = SimConfig {
            rounds: 0,
            efficiency: 0.0,
            verify_fraction: 1.0,
            workers: 0,
            attack: Some(AttackConfig::single(EveBasisStrategy::FixedDifferent(
                crate::BasisType::TypeI,
            ))),
            ..SimConfig::default()
        };
        match cfg.validate() {
            Err(QkdError::InvalidConfig(p)) => assert_eq!(p.len(), 5, "{p:?}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(run_batch(&cfg).is_err());
    }

    #[test]
    fn round_seeds_are_distinct() {
        let seeds: BTreeSet<u64> = (0..10_000).map(|i| round_seed(42, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(round_seed(1, 0), round_seed(2, 0));
    }

    #[test]
    fn small_batch_bookkeeping() {
        let cfg = SimConfig {
            rounds: 2_000,
            efficiency: 0.8,
            ..SimConfig::default()
        };
        let out = run_batch(&cfg).unwrap();
        let s = &out.stats;
        assert_eq!(out.records.len(), 2_000);
        assert!(out
            .records
            .windows(2)
            .all(|w| w[0].round_id + 1 == w[1].round_id));
        assert_eq!(s.coincidences, s.same_basis_count + s.diff_basis_count);
        let bpc = s.bits_per_coincidence.unwrap().value;
        let want = (2 * s.same_basis_count + s.diff_basis_count) as f64 / s.coincidences as f64;
        assert_eq!(bpc, want);
        assert_eq!(s.same_basis_mismatch_rate.unwrap().value, 0.0);
        assert_eq!(s.verification.mismatch_rate, Some(0.0));
        assert_eq!(
            out.alice_key,
            KeyBits {
                holder: crate::Party::Photon1,
                ..out.bob_key.clone()
            }
        );
        let verified_bits = 2 * out.verified_rounds.len() as u64;
        assert_eq!(
            s.key_length + verified_bits,
            2 * s.same_basis_count + s.diff_basis_count
        );
        assert!(s.eve_information.is_none());
        assert!(s.detection.is_none());
    }

    #[test]
    fn detection_without_eve_is_zero() {
        let cfg = SimConfig {
            rounds: 1_000,
            ..SimConfig::default()
        };
        let out = run_batch(&cfg).unwrap();
        let d = detection_probability(&out.records, &[]).unwrap();
        assert_eq!(d.all.unwrap().value, 0.0);
        assert!(d.eve_same_bases.is_none());
        assert!(d.eve_different_bases.is_none());
    }

    #[test]
    fn detection_rejects_unknown_round() {
        let cfg = SimConfig {
            rounds: 10,
            attack: Some(AttackConfig::double(EveBasisStrategy::RandomPerRound)),
            ..SimConfig::default()
        };
        let out = run_batch(&cfg).unwrap();
        let mut traces = out.eve_traces.clone();
        traces[0].round_id = 99;
        assert_eq!(
            detection_probability(&out.records, &traces),
            Err(QkdError::MisalignedRound(99))
        );
    }
}
