//! Intercept-resend eavesdropping on the shared pair.
//!
//! Eve acts on the channel after pair creation and before either legitimate
//! measurement. She performs a complete Bell-state measurement and resends the
//! exact eigenstate she observed:
//!
//! - single intercept: photon 2 only (Bob's photon);
//! - double intercept: photon 1 first, then photon 2 of the collapsed state.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};
use crate::hilbert::{
    bell_vector, build_shared_state, measure_party, BasisType, BellLabel, JointState, Party,
    PartyState, StateVector,
};
use crate::protocol::{
    choose_basis, encode_diff_basis, encode_same_basis, KeyBits, KeyGroup, RoundRecord,
};

/// Posterior probabilities below this are treated as impossible outcomes.
const IMPOSSIBLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackKind {
    SingleIntercept,
    DoubleIntercept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EveBasisStrategy {
    /// Fresh fair basis per round (and per photon for a double intercept).
    RandomPerRound,
    /// The given basis on every intercepted photon.
    FixedSame(BasisType),
    /// The given basis on photon 1, the other one on photon 2. Only valid for
    /// a double intercept.
    FixedDifferent(BasisType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttackConfig {
    pub kind: AttackKind,
    pub basis_strategy: EveBasisStrategy,
}

impl AttackConfig {
    pub fn single(basis_strategy: EveBasisStrategy) -> Self {
        AttackConfig {
            kind: AttackKind::SingleIntercept,
            basis_strategy,
        }
    }

    pub fn double(basis_strategy: EveBasisStrategy) -> Self {
        AttackConfig {
            kind: AttackKind::DoubleIntercept,
            basis_strategy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == AttackKind::SingleIntercept
            && matches!(self.basis_strategy, EveBasisStrategy::FixedDifferent(_))
        {
            return Err(QkdError::InvalidConfig(vec![
                "a single intercept measures one photon; FixedDifferent needs two".into(),
            ]));
        }
        Ok(())
    }
}

/// What Eve observed on one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub basis: BasisType,
    pub outcome: BellLabel,
}

/// Eve's private record for one round. `photon1` is present only for a
/// double intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EveRecord {
    pub round_id: u64,
    pub photon1: Option<Observation>,
    pub photon2: Observation,
}

impl EveRecord {
    pub fn kind(&self) -> AttackKind {
        match self.photon1 {
            Some(_) => AttackKind::DoubleIntercept,
            None => AttackKind::SingleIntercept,
        }
    }

    /// For a double intercept, whether both photons were measured in the same basis.
    pub fn bases_equal(&self) -> Option<bool> {
        self.photon1.map(|p1| p1.basis == self.photon2.basis)
    }

    /// The single-photon state Eve knows was resent towards `party`.
    ///
    /// For a single intercept Eve never touches photon 1, but she knows the
    /// source state, so the photon-1 factor is the partner of her outcome.
    pub fn resent_state(&self, party: Party) -> PartyState {
        match (party, self.photon1) {
            (Party::Photon1, Some(obs)) => bell_vector(obs.outcome),
            (Party::Photon1, None) => build_shared_state()
                .contract(Party::Photon2, &bell_vector(self.photon2.outcome))
                .normalized()
                .expect("every Bell outcome has probability 1/4 on the shared state"),
            (Party::Photon2, _) => bell_vector(self.photon2.outcome),
        }
    }
}

/// Eve measures photon 2 in `basis` and resends `(photon-1 partner) ⊗ |outcome⟩`.
pub fn eve_single_intercept<R: Rng + ?Sized>(
    state: &JointState,
    basis: BasisType,
    round_id: u64,
    rng: &mut R,
) -> Result<(JointState, EveRecord)> {
    let m = measure_party(state, Party::Photon2, basis, rng)?;
    let partner = m
        .post_state
        .contract(Party::Photon2, &bell_vector(m.label))
        .normalized()?;
    let resent = JointState::product(&partner, &bell_vector(m.label));
    let record = EveRecord {
        round_id,
        photon1: None,
        photon2: Observation {
            basis,
            outcome: m.label,
        },
    };
    Ok((resent, record))
}

/// Eve measures photon 1 in `basis1`, then photon 2 of the collapsed state in
/// `basis2`, and resends the product of both eigenstates.
pub fn eve_double_intercept<R: Rng + ?Sized>(
    state: &JointState,
    basis1: BasisType,
    basis2: BasisType,
    round_id: u64,
    rng: &mut R,
) -> Result<(JointState, EveRecord)> {
    let first = measure_party(state, Party::Photon1, basis1, rng)?;
    let second = measure_party(&first.post_state, Party::Photon2, basis2, rng)?;
    let resent = JointState::product(&bell_vector(first.label), &bell_vector(second.label));
    let record = EveRecord {
        round_id,
        photon1: Some(Observation {
            basis: basis1,
            outcome: first.label,
        }),
        photon2: Observation {
            basis: basis2,
            outcome: second.label,
        },
    };
    Ok((resent, record))
}

/// Picks Eve's bases according to the configured strategy and applies the
/// attack. A random strategy consumes one draw per measured photon.
pub fn intercept<R: Rng + ?Sized>(
    config: &AttackConfig,
    state: &JointState,
    round_id: u64,
    rng: &mut R,
) -> Result<(JointState, EveRecord)> {
    config.validate()?;
    match config.kind {
        AttackKind::SingleIntercept => {
            let basis = match config.basis_strategy {
                EveBasisStrategy::RandomPerRound => choose_basis(rng),
                EveBasisStrategy::FixedSame(b) | EveBasisStrategy::FixedDifferent(b) => b,
            };
            eve_single_intercept(state, basis, round_id, rng)
        }
        AttackKind::DoubleIntercept => {
            let (b1, b2) = match config.basis_strategy {
                EveBasisStrategy::RandomPerRound => {
                    let b1 = choose_basis(rng);
                    (b1, choose_basis(rng))
                }
                EveBasisStrategy::FixedSame(b) => (b, b),
                EveBasisStrategy::FixedDifferent(b) => (b, b.other()),
            };
            eve_double_intercept(state, b1, b2, round_id, rng)
        }
    }
}

/// How much of a key Eve knows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveInformation {
    pub key_bits: usize,
    /// Bits whose value Eve's records plus the public basis announcements pin
    /// down uniquely.
    pub known_bits: usize,
    /// `known_bits / key_bits`, or 0 for an empty key.
    pub certain_fraction: f64,
    /// Certain fraction restricted to bits from same-basis rounds.
    pub same_basis_fraction: Option<f64>,
    /// Certain fraction restricted to bits from different-basis rounds.
    pub diff_basis_fraction: Option<f64>,
    /// Mean probability that Eve's maximum-likelihood guess of a bit is right.
    pub guessing_accuracy: f64,
}

impl EveInformation {
    fn empty(key_bits: usize) -> Self {
        EveInformation {
            key_bits,
            known_bits: 0,
            certain_fraction: 0.0,
            same_basis_fraction: None,
            diff_basis_fraction: None,
            guessing_accuracy: if key_bits == 0 { 0.0 } else { 0.5 },
        }
    }
}

/// Replays the encoding tables against Eve's records to measure what she knows
/// about `key`.
///
/// For each key bit Eve computes the Born distribution of the key holder's
/// outcome on the state she resent, in the publicly announced basis. A bit is
/// known when every outcome of nonzero probability encodes the same value.
/// Key bits from rounds Eve did not intercept count as unknown.
pub fn eve_information(
    traces: &[EveRecord],
    records: &[RoundRecord],
    key: &KeyBits,
) -> Result<EveInformation> {
    if traces.is_empty() {
        return Ok(EveInformation::empty(key.len()));
    }

    let by_round: HashMap<u64, &RoundRecord> = records.iter().map(|r| (r.round_id, r)).collect();
    let mut trace_of: HashMap<u64, &EveRecord> = HashMap::with_capacity(traces.len());
    for t in traces {
        let aligned = by_round
            .get(&t.round_id)
            .is_some_and(|r| r.eve_trace.is_none_or(|own| own == *t));
        if !aligned || trace_of.insert(t.round_id, t).is_some() {
            return Err(QkdError::MisalignedRound(t.round_id));
        }
    }

    let holder = key.holder;
    let mut known = 0usize;
    let mut accuracy = 0.0;
    // (bits, known) per group
    let mut same = (0usize, 0usize);
    let mut diff = (0usize, 0usize);

    for origin in &key.provenance {
        let record = by_round
            .get(&origin.round_id)
            .ok_or(QkdError::MisalignedRound(origin.round_id))?;
        let (p_one, is_known) = match trace_of.get(&origin.round_id) {
            Some(trace) => {
                let basis = match holder {
                    Party::Photon1 => record.alice_basis,
                    Party::Photon2 => record.bob_basis,
                };
                bit_posterior(trace, holder, basis, origin.group, origin.slot)
            }
            None => (0.5, false),
        };
        accuracy += p_one.max(1.0 - p_one);
        let tally = match origin.group {
            KeyGroup::SameBasis => &mut same,
            KeyGroup::DiffBasis => &mut diff,
        };
        tally.0 += 1;
        if is_known {
            known += 1;
            tally.1 += 1;
        }
    }

    let ratio = |(bits, k): (usize, usize)| (bits > 0).then(|| k as f64 / bits as f64);
    let n = key.len();
    Ok(EveInformation {
        key_bits: n,
        known_bits: known,
        certain_fraction: if n == 0 { 0.0 } else { known as f64 / n as f64 },
        same_basis_fraction: ratio(same),
        diff_basis_fraction: ratio(diff),
        guessing_accuracy: if n == 0 { 0.0 } else { accuracy / n as f64 },
    })
}

/// Eve's posterior `P(bit = 1)` for one key bit, and whether it is certain.
fn bit_posterior(
    trace: &EveRecord,
    holder: Party,
    basis: BasisType,
    group: KeyGroup,
    slot: u8,
) -> (f64, bool) {
    let resent = trace.resent_state(holder);
    let mut p_one = 0.0;
    let mut values = (false, false); // (seen 0, seen 1)
    for label in basis.labels() {
        let p = bell_vector(label).inner(&resent).norm_sqr();
        if p <= IMPOSSIBLE {
            continue;
        }
        let bit = match group {
            KeyGroup::SameBasis => encode_same_basis(label)[slot as usize],
            KeyGroup::DiffBasis => encode_diff_basis(label),
        };
        if bit {
            p_one += p;
            values.1 = true;
        } else {
            values.0 = true;
        }
    }
    debug_assert!((resent.norm_sqr() - 1.0).abs() < 1e-9);
    (p_one, values.0 != values.1)
}
