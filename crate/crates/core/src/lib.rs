//! Hybrid entropy, escort distributions and the q-additive entropic chain rule.
//!
//! The crate is organised bottom-up:
//!
//! * [`prob`]: validated distributions, joints, conditioning and seeded sampling.
//! * [`qcalc`]: deformed exponential/logarithm, the Kolmogorov–Nagumo map `f_q`
//!   and q-addition.
//! * [`escort`]: escort transforms, the naive and the correct joint escort.
//! * [`entropy`]: Shannon, Rényi, Tsallis, hybrid and Aczél–Daróczy functionals.
//! * [`chain`]: the two conditional entropies, the additivity residual, the
//!   min-max sandwich and the correction substitution.
//! * [`axioms`]: ensemble verifiers for continuity, maximality, expansibility
//!   and additivity.
//! * [`io`]: JSON input formats.

pub mod axioms;
pub mod chain;
pub mod entropy;
pub mod error;
pub mod escort;
pub mod io;
pub mod prob;
pub mod qcalc;
pub mod simplex;

pub use chain::ChainRuleReport;
pub use entropy::{EntropyValue, Functional};
pub use error::{Error, Result};
pub use escort::{EscortView, JointEscortPair};
pub use prob::{
    ConditionalDistribution, Distribution, JointDistribution, Matrix, QOrder, ZeroColumns,
    EPS_NORM, EPS_Q_ONE,
};
