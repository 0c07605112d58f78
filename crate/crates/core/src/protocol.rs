//! Protocol rounds, public announcement, sifting, key extraction and the
//! verification sample used to detect an eavesdropper.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{intercept, AttackConfig, EveRecord};
use crate::error::{QkdError, Result};
use crate::hilbert::{build_shared_state, measure_party, BasisType, BellLabel, Party};

/// Fair coin over the two bases; consumes one uniform draw.
pub fn choose_basis<R: Rng + ?Sized>(rng: &mut R) -> BasisType {
    let u: f64 = rng.random();
    if u < 0.5 {
        BasisType::TypeI
    } else {
        BasisType::TypeII
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_id: u64,
    pub alice_basis: BasisType,
    pub bob_basis: BasisType,
    pub alice_outcome: Option<BellLabel>,
    pub bob_outcome: Option<BellLabel>,
    pub alice_detected: bool,
    pub bob_detected: bool,
    pub eve_trace: Option<EveRecord>,
}

impl RoundRecord {
    /// Both parties registered a photon.
    pub fn is_coincident(&self) -> bool {
        self.alice_detected && self.bob_detected
    }

    pub fn same_basis(&self) -> bool {
        self.alice_basis == self.bob_basis
    }

    /// Coincident same-basis round with differing outcomes.
    pub fn outcome_mismatch(&self) -> bool {
        self.is_coincident() && self.same_basis() && self.alice_outcome != self.bob_outcome
    }

    pub fn basis_of(&self, party: Party) -> BasisType {
        match party {
            Party::Photon1 => self.alice_basis,
            Party::Photon2 => self.bob_basis,
        }
    }

    pub fn outcome_of(&self, party: Party) -> Option<BellLabel> {
        match party {
            Party::Photon1 => self.alice_outcome,
            Party::Photon2 => self.bob_outcome,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MeasurementOrder {
    #[default]
    AliceFirst,
    BobFirst,
}

/// Per-round knobs. The forced bases and measurement order exist for
/// conditioned experiments; the protocol itself uses random bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundSettings {
    pub attack: Option<AttackConfig>,
    pub efficiency: f64,
    pub alice_basis: Option<BasisType>,
    pub bob_basis: Option<BasisType>,
    pub order: MeasurementOrder,
}

impl Default for RoundSettings {
    fn default() -> Self {
        RoundSettings {
            attack: None,
            efficiency: 1.0,
            alice_basis: None,
            bob_basis: None,
            order: MeasurementOrder::AliceFirst,
        }
    }
}

impl RoundSettings {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            problems.push(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            ));
        }
        if let Some(attack) = &self.attack {
            if let Err(QkdError::InvalidConfig(mut p)) = attack.validate() {
                problems.append(&mut p);
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(QkdError::InvalidConfig(problems))
        }
    }
}

/// Runs one round with random bases and Alice measuring first.
pub fn run_round<R: Rng + ?Sized>(
    round_id: u64,
    attack: Option<&AttackConfig>,
    efficiency: f64,
    rng: &mut R,
) -> Result<RoundRecord> {
    let settings = RoundSettings {
        attack: attack.copied(),
        efficiency,
        ..RoundSettings::default()
    };
    run_round_with(round_id, &settings, rng)
}

/// Runs one round.
///
/// Draws are consumed in a fixed order: Alice's basis, Bob's basis (both
/// drawn even when forced), Eve's bases and measurements, the first and second
/// legitimate measurement, then Alice's and Bob's detection.
pub fn run_round_with<R: Rng + ?Sized>(
    round_id: u64,
    settings: &RoundSettings,
    rng: &mut R,
) -> Result<RoundRecord> {
    settings.validate()?;

    let drawn_alice = choose_basis(rng);
    let drawn_bob = choose_basis(rng);
    let alice_basis = settings.alice_basis.unwrap_or(drawn_alice);
    let bob_basis = settings.bob_basis.unwrap_or(drawn_bob);

    let mut state = build_shared_state();
    let mut eve_trace = None;
    if let Some(attack) = &settings.attack {
        let (resent, trace) = intercept(attack, &state, round_id, rng)?;
        state = resent;
        eve_trace = Some(trace);
    }

    let (alice_label, bob_label) = match settings.order {
        MeasurementOrder::AliceFirst => {
            let a = measure_party(&state, Party::Photon1, alice_basis, rng)?;
            let b = measure_party(&a.post_state, Party::Photon2, bob_basis, rng)?;
            (a.label, b.label)
        }
        MeasurementOrder::BobFirst => {
            let b = measure_party(&state, Party::Photon2, bob_basis, rng)?;
            let a = measure_party(&b.post_state, Party::Photon1, alice_basis, rng)?;
            (a.label, b.label)
        }
    };

    let alice_detected = rng.random::<f64>() < settings.efficiency;
    let bob_detected = rng.random::<f64>() < settings.efficiency;

    Ok(RoundRecord {
        round_id,
        alice_basis,
        bob_basis,
        alice_outcome: alice_detected.then_some(alice_label),
        bob_outcome: bob_detected.then_some(bob_label),
        alice_detected,
        bob_detected,
        eve_trace,
    })
}

/// Coincident rounds split by the announced bases.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SiftGroups {
    pub same_basis: Vec<RoundRecord>,
    pub diff_basis: Vec<RoundRecord>,
    pub discarded: Vec<RoundRecord>,
}

impl SiftGroups {
    pub fn coincidences(&self) -> usize {
        self.same_basis.len() + self.diff_basis.len()
    }

    pub fn total(&self) -> usize {
        self.coincidences() + self.discarded.len()
    }
}

pub fn sift(records: &[RoundRecord]) -> SiftGroups {
    let mut groups = SiftGroups::default();
    for r in records {
        let bucket = if !r.is_coincident() {
            &mut groups.discarded
        } else if r.same_basis() {
            &mut groups.same_basis
        } else {
            &mut groups.diff_basis
        };
        bucket.push(*r);
    }
    groups
}

/// Same-basis code: listing position 0..4 as two bits, most significant first.
/// `Φ+ Φ− Ψ+ Ψ−` and `χ+ χ− ω+ ω−` map to `00 01 10 11`.
pub fn encode_same_basis(label: BellLabel) -> [bool; 2] {
    let p = label.position();
    [p & 2 != 0, p & 1 != 0]
}

/// Different-basis code: `{Φ+, Ψ−, ω+, χ−}` are 0, `{Φ−, Ψ+, ω−, χ+}` are 1.
pub fn encode_diff_basis(label: BellLabel) -> bool {
    use BellLabel::*;
    match label {
        PhiPlus | PsiMinus | OmegaPlus | ChiMinus => false,
        PhiMinus | PsiPlus | OmegaMinus | ChiPlus => true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KeyGroup {
    SameBasis,
    DiffBasis,
}

/// Where a key bit came from. `slot` is the bit's position within its round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitOrigin {
    pub round_id: u64,
    pub group: KeyGroup,
    pub slot: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyBits {
    /// Whose outcomes the bits were read from.
    pub holder: Party,
    pub bits: Vec<bool>,
    pub provenance: Vec<BitOrigin>,
}

impl KeyBits {
    fn new(holder: Party) -> Self {
        KeyBits {
            holder,
            bits: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    fn push_round(&mut self, record: &RoundRecord, group: KeyGroup) {
        let label = record
            .outcome_of(self.holder)
            .expect("sifted rounds are coincident");
        let bits: &[bool] = match group {
            KeyGroup::SameBasis => &encode_same_basis(label),
            KeyGroup::DiffBasis => &[encode_diff_basis(label)],
        };
        for (slot, &bit) in bits.iter().enumerate() {
            self.bits.push(bit);
            self.provenance.push(BitOrigin {
                round_id: record.round_id,
                group,
                slot: slot as u8,
            });
        }
    }
}

/// Builds Alice's and Bob's raw keys in round order: two bits per same-basis
/// round, one per different-basis round, skipping `verify_exclusions`.
pub fn build_keys(groups: &SiftGroups, verify_exclusions: &BTreeSet<u64>) -> (KeyBits, KeyBits) {
    let mut rounds: Vec<(&RoundRecord, KeyGroup)> = groups
        .same_basis
        .iter()
        .map(|r| (r, KeyGroup::SameBasis))
        .chain(groups.diff_basis.iter().map(|r| (r, KeyGroup::DiffBasis)))
        .filter(|(r, _)| !verify_exclusions.contains(&r.round_id))
        .collect();
    rounds.sort_by_key(|(r, _)| r.round_id);

    let mut alice = KeyBits::new(Party::Photon1);
    let mut bob = KeyBits::new(Party::Photon2);
    for (record, group) in rounds {
        alice.push_round(record, group);
        bob.push_round(record, group);
    }
    (alice, bob)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub compared_rounds: usize,
    pub mismatches: usize,
    /// `None` when nothing was compared.
    pub mismatch_rate: Option<f64>,
}

impl VerificationReport {
    pub fn undefined() -> Self {
        VerificationReport {
            compared_rounds: 0,
            mismatches: 0,
            mismatch_rate: None,
        }
    }
}

/// Publicly compares the full outcomes of `⌈fraction · |same_basis|⌉`
/// uniformly chosen same-basis rounds. The sampled round ids are returned so
/// they can be dropped from the key.
pub fn verify_sample<R: Rng + ?Sized>(
    groups: &SiftGroups,
    fraction: f64,
    rng: &mut R,
) -> Result<(VerificationReport, BTreeSet<u64>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(QkdError::InvalidConfig(vec![format!(
            "verification fraction must lie in (0, 1), got {fraction}"
        )]));
    }
    let n = groups.same_basis.len();
    let amount = ((fraction * n as f64).ceil() as usize).min(n);
    if amount == 0 {
        return Ok((VerificationReport::undefined(), BTreeSet::new()));
    }
    let mut picked = index::sample(rng, n, amount).into_vec();
    picked.sort_unstable();

    let mut consumed = BTreeSet::new();
    let mut mismatches = 0;
    for i in picked {
        let r = &groups.same_basis[i];
        if r.alice_outcome != r.bob_outcome {
            mismatches += 1;
        }
        consumed.insert(r.round_id);
    }
    let report = VerificationReport {
        compared_rounds: amount,
        mismatches,
        mismatch_rate: Some(mismatches as f64 / amount as f64),
    };
    Ok((report, consumed))
}
