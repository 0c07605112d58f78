//! Exact-probability oracle, independent of the library's linear algebra.
//!
//! States are real vectors built directly from kets. The oracle enumerates
//! every (Eve bases/outcomes × Alice basis/outcome × Bob basis/outcome)
//! combination with its Born weight.

#![allow(dead_code)]

use std::collections::BTreeMap;

use hyperqkd_core::adversary::{AttackConfig, AttackKind, EveBasisStrategy};
use hyperqkd_core::protocol::{encode_diff_basis, encode_same_basis};
use hyperqkd_core::{BasisType, BellLabel};

pub const EPS: f64 = 1e-12;

/// Single-photon ket `|pol, path⟩` with pol, path ∈ {0, 1}.
fn ket(pol: usize, path: usize) -> [f64; 4] {
    let mut v = [0.0; 4];
    v[pol * 2 + path] = 1.0;
    v
}

fn lin(terms: &[(f64, [f64; 4])]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (c, v) in terms {
        for i in 0..4 {
            out[i] += c * v[i];
        }
    }
    out
}

const H: usize = 0;
const V: usize = 1;
const A: usize = 0;
const B: usize = 1;

pub fn vector(label: BellLabel) -> [f64; 4] {
    use BellLabel::*;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match label {
        PhiPlus => lin(&[(s, ket(H, A)), (s, ket(V, B))]),
        PhiMinus => lin(&[(s, ket(H, A)), (-s, ket(V, B))]),
        PsiPlus => lin(&[(s, ket(H, B)), (s, ket(V, A))]),
        PsiMinus => lin(&[(s, ket(H, B)), (-s, ket(V, A))]),
        // ½[H(a+b) ± V(a−b)]
        ChiPlus => lin(&[
            (0.5, ket(H, A)),
            (0.5, ket(H, B)),
            (0.5, ket(V, A)),
            (-0.5, ket(V, B)),
        ]),
        ChiMinus => lin(&[
            (0.5, ket(H, A)),
            (0.5, ket(H, B)),
            (-0.5, ket(V, A)),
            (0.5, ket(V, B)),
        ]),
        // ½[V(a+b) ± H(a−b)]
        OmegaPlus => lin(&[
            (0.5, ket(V, A)),
            (0.5, ket(V, B)),
            (0.5, ket(H, A)),
            (-0.5, ket(H, B)),
        ]),
        OmegaMinus => lin(&[
            (0.5, ket(V, A)),
            (0.5, ket(V, B)),
            (-0.5, ket(H, A)),
            (0.5, ket(H, B)),
        ]),
    }
}

pub fn labels(basis: BasisType) -> [BellLabel; 4] {
    use BellLabel::*;
    match basis {
        BasisType::TypeI => [PhiPlus, PhiMinus, PsiPlus, PsiMinus],
        BasisType::TypeII => [ChiPlus, ChiMinus, OmegaPlus, OmegaMinus],
    }
}

type Joint = [[f64; 4]; 4];

/// Singlet(pol) ⊗ singlet(path), as a 4×4 matrix over (photon 1, photon 2).
pub fn shared() -> Joint {
    let mut m = [[0.0; 4]; 4];
    for (p1, p2, sp) in [(H, V, 1.0), (V, H, -1.0)] {
        for (x1, x2, sx) in [(A, B, 1.0), (B, A, -1.0)] {
            m[p1 * 2 + x1][p2 * 2 + x2] = 0.5 * sp * sx;
        }
    }
    m
}

fn outer(a: &[f64; 4], b: &[f64; 4]) -> Joint {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

fn amplitude(m: &Joint, a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += a[i] * m[i][j] * b[j];
        }
    }
    s
}

/// `(1 ⊗ ⟨b|)|m⟩`
fn partner_of_photon2(m: &Joint, b: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += m[i][j] * b[j];
        }
    }
    out
}

fn normalize(v: [f64; 4]) -> [f64; 4] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.map(|x| x / n)
}

/// Eve's observations: `(photon1, photon2)`, photon1 only for a double intercept.
pub type EveView = Option<(Option<(BasisType, BellLabel)>, (BasisType, BellLabel))>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Outcome {
    pub eve: EveView,
    pub alice_basis: BasisType,
    pub alice: BellLabel,
    pub bob_basis: BasisType,
    pub bob: BellLabel,
}

impl Outcome {
    pub fn same_basis(&self) -> bool {
        self.alice_basis == self.bob_basis
    }

    pub fn alice_bits(&self) -> Vec<bool> {
        key_bits_of(self.alice, self.same_basis())
    }

    pub fn bob_bits(&self) -> Vec<bool> {
        key_bits_of(self.bob, self.same_basis())
    }
}

pub fn key_bits_of(label: BellLabel, same: bool) -> Vec<bool> {
    if same {
        encode_same_basis(label).to_vec()
    } else {
        vec![encode_diff_basis(label)]
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Scenario {
    pub attack: Option<AttackConfig>,
    pub alice_basis: Option<BasisType>,
    pub bob_basis: Option<BasisType>,
}

fn basis_weights(forced: Option<BasisType>) -> Vec<(BasisType, f64)> {
    match forced {
        Some(b) => vec![(b, 1.0)],
        None => vec![(BasisType::TypeI, 0.5), (BasisType::TypeII, 0.5)],
    }
}

/// Eve basis assignments `(photon1, photon2)` with weights.
fn eve_bases(attack: &AttackConfig) -> Vec<((Option<BasisType>, BasisType), f64)> {
    use BasisType::*;
    match (attack.kind, attack.basis_strategy) {
        (AttackKind::SingleIntercept, EveBasisStrategy::RandomPerRound) => {
            vec![((None, TypeI), 0.5), ((None, TypeII), 0.5)]
        }
        (AttackKind::SingleIntercept, EveBasisStrategy::FixedSame(b)) => vec![((None, b), 1.0)],
        (AttackKind::SingleIntercept, EveBasisStrategy::FixedDifferent(_)) => unreachable!(),
        (AttackKind::DoubleIntercept, EveBasisStrategy::RandomPerRound) => {
            let mut v = Vec::new();
            for b1 in [TypeI, TypeII] {
                for b2 in [TypeI, TypeII] {
                    v.push(((Some(b1), b2), 0.25));
                }
            }
            v
        }
        (AttackKind::DoubleIntercept, EveBasisStrategy::FixedSame(b)) => vec![((Some(b), b), 1.0)],
        (AttackKind::DoubleIntercept, EveBasisStrategy::FixedDifferent(b)) => {
            let other = if b == TypeI { TypeII } else { TypeI };
            vec![((Some(b), other), 1.0)]
        }
    }
}

/// States handed to Alice and Bob, with Eve's view and its probability.
fn channel_states(attack: Option<&AttackConfig>) -> Vec<(EveView, Joint, f64)> {
    let psi = shared();
    let Some(attack) = attack else {
        return vec![(None, psi, 1.0)];
    };
    let mut out = Vec::new();
    for ((b1, b2), w) in eve_bases(attack) {
        match b1 {
            None => {
                for l2 in labels(b2) {
                    let partner = partner_of_photon2(&psi, &vector(l2));
                    let p: f64 = partner.iter().map(|x| x * x).sum();
                    if p > EPS {
                        let resent = outer(&normalize(partner), &vector(l2));
                        out.push((Some((None, (b2, l2))), resent, w * p));
                    }
                }
            }
            Some(b1) => {
                for l1 in labels(b1) {
                    for l2 in labels(b2) {
                        let p = amplitude(&psi, &vector(l1), &vector(l2)).powi(2);
                        if p > EPS {
                            let resent = outer(&vector(l1), &vector(l2));
                            out.push((Some((Some((b1, l1)), (b2, l2))), resent, w * p));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Exact joint distribution of a round (ideal detectors).
pub fn distribution(scenario: &Scenario) -> Vec<(Outcome, f64)> {
    let mut out = Vec::new();
    for (eve, state, pe) in channel_states(scenario.attack.as_ref()) {
        for (ab, wa) in basis_weights(scenario.alice_basis) {
            for (bb, wb) in basis_weights(scenario.bob_basis) {
                for la in labels(ab) {
                    for lb in labels(bb) {
                        let p = amplitude(&state, &vector(la), &vector(lb)).powi(2);
                        if p > EPS {
                            out.push((
                                Outcome {
                                    eve,
                                    alice_basis: ab,
                                    alice: la,
                                    bob_basis: bb,
                                    bob: lb,
                                },
                                pe * wa * wb * p,
                            ));
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn probability(dist: &[(Outcome, f64)], pred: impl Fn(&Outcome) -> bool) -> f64 {
    dist.iter().filter(|(o, _)| pred(o)).map(|(_, p)| p).sum()
}

pub fn conditional(
    dist: &[(Outcome, f64)],
    event: impl Fn(&Outcome) -> bool,
    given: impl Fn(&Outcome) -> bool,
) -> f64 {
    probability(dist, |o| given(o) && event(o)) / probability(dist, &given)
}

/// Exact per-bit statistics of Alice's key.
#[derive(Debug, Clone, Copy)]
pub struct KeyOracle {
    pub bits_per_coincidence: f64,
    /// Expected known bits / expected bits, over the whole key.
    pub eve_certain_fraction: f64,
    pub eve_certain_same_basis: f64,
    pub eve_certain_diff_basis: f64,
    pub eve_guessing_accuracy: f64,
    pub bit_error_rate: f64,
    pub diff_basis_bit_error_rate: f64,
}

pub fn key_oracle(dist: &[(Outcome, f64)]) -> KeyOracle {
    // Eve's public+private context: her view and the two announced bases.
    type Ctx = (EveView, BasisType, BasisType);
    let mut alice_given_ctx: BTreeMap<Ctx, Vec<(BellLabel, f64)>> = BTreeMap::new();
    for (o, p) in dist {
        alice_given_ctx
            .entry((o.eve, o.alice_basis, o.bob_basis))
            .or_default()
            .push((o.alice, *p));
    }

    let (mut bits, mut errors, mut diff_bits, mut diff_errors) = (0.0, 0.0, 0.0, 0.0);
    let (mut known, mut known_same, mut bits_same, mut known_diff) = (0.0, 0.0, 0.0, 0.0);
    let mut accuracy = 0.0;
    let mut coincidences = 0.0;
    for (o, p) in dist {
        coincidences += p;
        let a = o.alice_bits();
        let b = o.bob_bits();
        let candidates = &alice_given_ctx[&(o.eve, o.alice_basis, o.bob_basis)];
        let total: f64 = candidates.iter().map(|c| c.1).sum();
        for slot in 0..a.len() {
            bits += p;
            if a[slot] != b[slot] {
                errors += p;
                if !o.same_basis() {
                    diff_errors += p;
                }
            }
            if !o.same_basis() {
                diff_bits += p;
            }
            let p_one: f64 = candidates
                .iter()
                .filter(|(l, _)| key_bits_of(*l, o.same_basis())[slot])
                .map(|c| c.1)
                .sum::<f64>()
                / total;
            let certain = o.eve.is_some() && !(EPS..=1.0 - EPS).contains(&p_one);
            accuracy += p * if o.eve.is_some() {
                p_one.max(1.0 - p_one)
            } else {
                0.5
            };
            if o.same_basis() {
                bits_same += p;
            }
            if certain {
                known += p;
                if o.same_basis() {
                    known_same += p;
                } else {
                    known_diff += p;
                }
            }
        }
    }
    KeyOracle {
        bits_per_coincidence: bits / coincidences,
        eve_certain_fraction: known / bits,
        eve_certain_same_basis: known_same / bits_same,
        eve_certain_diff_basis: if diff_bits > 0.0 {
            known_diff / diff_bits
        } else {
            f64::NAN
        },
        eve_guessing_accuracy: accuracy / bits,
        bit_error_rate: errors / bits,
        diff_basis_bit_error_rate: if diff_bits > 0.0 {
            diff_errors / diff_bits
        } else {
            f64::NAN
        },
    }
}

/// Binomial standard error for proportion `p` over `n` samples.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// `|observed − expected| ≤ 3 SE`, with a tiny floor for zero-variance cases.
pub fn within_3se(observed: f64, expected: f64, n: u64) -> bool {
    (observed - expected).abs() <= (3.0 * binomial_se(expected, n)).max(1e-12)
}
