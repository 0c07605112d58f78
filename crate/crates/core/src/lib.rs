//! Exact simulation of deterministic quantum key distribution with photon
//! pairs entangled in both polarization and path.
//!
//! Each photon lives in a 4-dimensional space (polarization ⊗ path) and the
//! pair in a 16-dimensional joint space. Alice and Bob each perform a complete
//! Bell-state measurement in one of two complementary bases; same-basis rounds
//! yield two key bits, different-basis rounds one.
//!
//! - [`hilbert`]: state vectors, Bell bases and projective measurement.
//! - [`protocol`]: rounds, sifting, key extraction and verification.
//! - [`adversary`]: the two intercept-resend attacks and Eve's information.
//! - [`montecarlo`]: seeded batch driver and the reported estimators.

pub mod adversary;
pub mod error;
pub mod hilbert;
pub mod montecarlo;
pub mod protocol;

pub use adversary::{AttackConfig, AttackKind, EveBasisStrategy, EveInformation, EveRecord};
pub use error::{QkdError, Result};
pub use hilbert::{BasisType, BellLabel, JointState, Party, PartyState};
pub use montecarlo::{BatchOutput, BatchStats, SimConfig};
pub use protocol::{KeyBits, RoundRecord, SiftGroups, VerificationReport};
