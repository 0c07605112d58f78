//! State vectors for a single photon (polarization ⊗ path) and for the photon
//! pair, the two complementary Bell bases, and projective Bell measurement.
//!
//! Index convention: polarization `H = 0`, `V = 1`; path `a = 0`, `b = 1`.
//! A single photon amplitude lives at `2 * pol + path`, so the per-photon order
//! is `(H,a), (H,b), (V,a), (V,b)`. The joint index is `4 * i1 + i2` where `i1`
//! indexes photon 1 (Alice's side) and `i2` photon 2 (Bob's side).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};

pub type Amplitude = Complex64;

/// Tolerance used when checking that an input state is normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

const ZERO: Amplitude = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H = 0,
    V = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Path {
    A = 0,
    B = 1,
}

/// Per-photon amplitude index of `|pol⟩|path⟩`.
pub const fn local_index(pol: Polarization, path: Path) -> usize {
    2 * pol as usize + path as usize
}

/// Joint amplitude index of `|pol1, path1⟩₁ |pol2, path2⟩₂`.
pub const fn joint_index(p1: (Polarization, Path), p2: (Polarization, Path)) -> usize {
    4 * local_index(p1.0, p1.1) + local_index(p2.0, p2.1)
}

/// One of the two complementary Bell bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisType {
    /// `{Φ+, Φ−, Ψ+, Ψ−}`
    TypeI,
    /// `{χ+, χ−, ω+, ω−}`
    TypeII,
}

impl BasisType {
    pub const ALL: [BasisType; 2] = [BasisType::TypeI, BasisType::TypeII];

    pub fn other(self) -> BasisType {
        match self {
            BasisType::TypeI => BasisType::TypeII,
            BasisType::TypeII => BasisType::TypeI,
        }
    }

    /// The four labels of this basis in their canonical listing order.
    pub fn labels(self) -> [BellLabel; 4] {
        use BellLabel::*;
        match self {
            BasisType::TypeI => [PhiPlus, PhiMinus, PsiPlus, PsiMinus],
            BasisType::TypeII => [ChiPlus, ChiMinus, OmegaPlus, OmegaMinus],
        }
    }
}

impl fmt::Display for BasisType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisType::TypeI => f.write_str("type-I"),
            BasisType::TypeII => f.write_str("type-II"),
        }
    }
}

/// The eight polarization-path Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
    ChiPlus,
    ChiMinus,
    OmegaPlus,
    OmegaMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 8] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
        BellLabel::ChiPlus,
        BellLabel::ChiMinus,
        BellLabel::OmegaPlus,
        BellLabel::OmegaMinus,
    ];

    pub fn basis(self) -> BasisType {
        basis_of(self)
    }

    /// Position of the label within its basis listing (0..4).
    pub fn position(self) -> usize {
        use BellLabel::*;
        match self {
            PhiPlus | ChiPlus => 0,
            PhiMinus | ChiMinus => 1,
            PsiPlus | OmegaPlus => 2,
            PsiMinus | OmegaMinus => 3,
        }
    }

    pub fn vector(self) -> PartyState {
        bell_vector(self)
    }

    pub fn symbol(self) -> &'static str {
        use BellLabel::*;
        match self {
            PhiPlus => "Φ+",
            PhiMinus => "Φ−",
            PsiPlus => "Ψ+",
            PsiMinus => "Ψ−",
            ChiPlus => "χ+",
            ChiMinus => "χ−",
            OmegaPlus => "ω+",
            OmegaMinus => "ω−",
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

pub fn basis_of(label: BellLabel) -> BasisType {
    use BellLabel::*;
    match label {
        PhiPlus | PhiMinus | PsiPlus | PsiMinus => BasisType::TypeI,
        ChiPlus | ChiMinus | OmegaPlus | OmegaMinus => BasisType::TypeII,
    }
}

/// Which photon of the pair a measurement acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    /// Alice's photon (paths a₁, b₁).
    Photon1,
    /// Bob's photon (paths a₂, b₂).
    Photon2,
}

/// Anything backed by a flat amplitude vector.
pub trait StateVector {
    fn amplitudes(&self) -> &[Amplitude];

    fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    fn is_finite(&self) -> bool {
        self.amplitudes()
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

fn ensure_normalized<S: StateVector + ?Sized>(state: &S) -> Result<()> {
    let norm_sqr = state.norm_sqr();
    if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(QkdError::NotNormalized { norm_sqr });
    }
    Ok(())
}

/// Single-photon state over `(pol, path)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartyState([Amplitude; 4]);

impl PartyState {
    pub const fn new(amps: [Amplitude; 4]) -> Self {
        PartyState(amps)
    }

    pub fn from_real(amps: [f64; 4]) -> Self {
        PartyState(amps.map(|re| Complex64::new(re, 0.0)))
    }

    pub fn basis_state(pol: Polarization, path: Path) -> Self {
        let mut amps = [ZERO; 4];
        amps[local_index(pol, path)] = Complex64::new(1.0, 0.0);
        PartyState(amps)
    }

    pub fn amps(&self) -> &[Amplitude; 4] {
        &self.0
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PartyState) -> Amplitude {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// Returns the state scaled to unit norm, or an error for a zero vector.
    pub fn normalized(&self) -> Result<PartyState> {
        let norm = self.norm_sqr().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(QkdError::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        Ok(PartyState(self.0.map(|a| a / norm)))
    }
}

impl StateVector for PartyState {
    fn amplitudes(&self) -> &[Amplitude] {
        &self.0
    }
}

/// Two-photon state, index `4 * i1 + i2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointState([Amplitude; 16]);

impl JointState {
    pub const fn new(amps: [Amplitude; 16]) -> Self {
        JointState(amps)
    }

    /// `photon1 ⊗ photon2`
    pub fn product(photon1: &PartyState, photon2: &PartyState) -> Self {
        let mut amps = [ZERO; 16];
        for (i1, a) in photon1.0.iter().enumerate() {
            for (i2, b) in photon2.0.iter().enumerate() {
                amps[4 * i1 + i2] = a * b;
            }
        }
        JointState(amps)
    }

    pub fn amps(&self) -> &[Amplitude; 16] {
        &self.0
    }

    pub fn amplitude(&self, i1: usize, i2: usize) -> Amplitude {
        self.0[4 * i1 + i2]
    }

    /// Contracts `party` with `⟨bra|`, leaving the (unnormalized) state of the
    /// other photon. Its squared norm is the probability of projecting `party`
    /// onto `bra`.
    pub fn contract(&self, party: Party, bra: &PartyState) -> PartyState {
        let mut out = [ZERO; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (0..4)
                .map(|j| {
                    let amp = match party {
                        Party::Photon1 => self.0[4 * j + k],
                        Party::Photon2 => self.0[4 * k + j],
                    };
                    bra.0[j].conj() * amp
                })
                .sum();
        }
        PartyState(out)
    }

    /// Rank of the 4×4 coefficient matrix across the photon-1/photon-2 cut.
    /// A product state has rank 1; the shared state has rank 4.
    pub fn schmidt_rank(&self, tolerance: f64) -> usize {
        let mut m: [[Amplitude; 4]; 4] = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row.copy_from_slice(&self.0[4 * i..4 * i + 4]);
        }
        let mut rank = 0;
        for col in 0..4 {
            let pivot = (rank..4).max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm()));
            let Some(p) = pivot else { break };
            if m[p][col].norm() <= tolerance {
                continue;
            }
            m.swap(rank, p);
            let (top, bottom) = m.split_at_mut(rank + 1);
            let pivot_row = &top[rank];
            for row in bottom {
                let factor = row[col] / pivot_row[col];
                for (x, y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= factor * y;
                }
            }
            rank += 1;
        }
        rank
    }
}

impl StateVector for JointState {
    fn amplitudes(&self) -> &[Amplitude] {
        &self.0
    }
}

/// Outcome of a complete Bell-state measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementResult<S> {
    pub label: BellLabel,
    /// Born probability of `label` for the measured state.
    pub probability: f64,
    /// Normalized post-measurement state.
    pub post_state: S,
}

/// The pair state `½(|H⟩₁|V⟩₂ − |V⟩₁|H⟩₂) ⊗ (|a₁⟩|b₂⟩ − |b₁⟩|a₂⟩)`.
pub fn build_shared_state() -> JointState {
    use Path::*;
    use Polarization::*;

    let pol_terms = [((H, V), 1.0), ((V, H), -1.0)];
    let path_terms = [((A, B), 1.0), ((B, A), -1.0)];

    let mut amps = [ZERO; 16];
    for ((p1, p2), s_pol) in pol_terms {
        for ((x1, x2), s_path) in path_terms {
            amps[joint_index((p1, x1), (p2, x2))] = Complex64::new(0.5 * s_pol * s_path, 0.0);
        }
    }
    JointState(amps)
}

/// Amplitude vector of a Bell state over `(H,a), (H,b), (V,a), (V,b)`.
pub fn bell_vector(label: BellLabel) -> PartyState {
    use BellLabel::*;
    let r = FRAC_1_SQRT_2;
    let amps = match label {
        // (|H⟩|a⟩ ± |V⟩|b⟩)/√2
        PhiPlus => [r, 0.0, 0.0, r],
        PhiMinus => [r, 0.0, 0.0, -r],
        // (|H⟩|b⟩ ± |V⟩|a⟩)/√2
        PsiPlus => [0.0, r, r, 0.0],
        PsiMinus => [0.0, r, -r, 0.0],
        // ½[|H⟩(|a⟩+|b⟩) ± |V⟩(|a⟩−|b⟩)]
        ChiPlus => [0.5, 0.5, 0.5, -0.5],
        ChiMinus => [0.5, 0.5, -0.5, 0.5],
        // ½[|V⟩(|a⟩+|b⟩) ± |H⟩(|a⟩−|b⟩)]
        OmegaPlus => [0.5, -0.5, 0.5, 0.5],
        OmegaMinus => [-0.5, 0.5, 0.5, 0.5],
    };
    PartyState::from_real(amps)
}

/// Coefficients `⟨label|state⟩` for the four labels of `basis`.
pub fn expand_in_basis(
    state: &PartyState,
    basis: BasisType,
) -> Result<[(BellLabel, Amplitude); 4]> {
    ensure_normalized(state)?;
    Ok(basis
        .labels()
        .map(|label| (label, bell_vector(label).inner(state))))
}

/// Born probabilities of the four labels of `basis` when `party` is measured,
/// in the basis's listing order.
pub fn outcome_probabilities(state: &JointState, party: Party, basis: BasisType) -> [f64; 4] {
    basis
        .labels()
        .map(|label| state.contract(party, &bell_vector(label)).norm_sqr())
}

/// Inverse-CDF pick over four probabilities from a single uniform draw.
/// Zero-probability entries are never selected.
fn sample_index(probabilities: &[f64; 4], u: f64) -> usize {
    let mut cumulative = 0.0;
    let mut last_nonzero = None;
    for (i, &p) in probabilities.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_nonzero = Some(i);
        if u < cumulative {
            return i;
        }
    }
    // u landed in the rounding slack above the final cumulative sum
    last_nonzero.expect("probabilities of a normalized state cannot all vanish")
}

/// Complete Bell-state measurement of one photon of the pair.
///
/// Consumes exactly one uniform draw. The post-measurement state is the
/// projection `(|L⟩⟨L| ⊗ 1)|ψ⟩` (or `1 ⊗ |L⟩⟨L|` for photon 2), renormalized.
pub fn measure_party<R: Rng + ?Sized>(
    state: &JointState,
    party: Party,
    basis: BasisType,
    rng: &mut R,
) -> Result<MeasurementResult<JointState>> {
    ensure_normalized(state)?;
    let labels = basis.labels();
    let partners = labels.map(|label| state.contract(party, &bell_vector(label)));
    let probabilities = partners.map(|p| p.norm_sqr());

    let u: f64 = rng.random();
    let i = sample_index(&probabilities, u);
    let label = labels[i];
    let partner = partners[i].normalized()?;
    let eigen = bell_vector(label);
    let post_state = match party {
        Party::Photon1 => JointState::product(&eigen, &partner),
        Party::Photon2 => JointState::product(&partner, &eigen),
    };
    Ok(MeasurementResult {
        label,
        probability: probabilities[i],
        post_state,
    })
}

/// Complete Bell-state measurement of a lone photon. Consumes one uniform draw.
pub fn measure_single<R: Rng + ?Sized>(
    state: &PartyState,
    basis: BasisType,
    rng: &mut R,
) -> Result<MeasurementResult<PartyState>> {
    ensure_normalized(state)?;
    let labels = basis.labels();
    let probabilities = labels.map(|label| bell_vector(label).inner(state).norm_sqr());
    let u: f64 = rng.random();
    let i = sample_index(&probabilities, u);
    Ok(MeasurementResult {
        label: labels[i],
        probability: probabilities[i],
        post_state: bell_vector(labels[i]),
    })
}

/// `|⟨a|b⟩|²` for two states of the same dimension.
pub fn fidelity<A, B>(a: &A, b: &B) -> Result<f64>
where
    A: StateVector + ?Sized,
    B: StateVector + ?Sized,
{
    let (x, y) = (a.amplitudes(), b.amplitudes());
    if x.len() != y.len() {
        return Err(QkdError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let overlap: Amplitude = x.iter().zip(y).map(|(p, q)| p.conj() * q).sum();
    Ok(overlap.norm_sqr().min(1.0))
}
