//! Certified Lipschitz complexity of finite-dimensional quantum channels.
//!
//! Every quantity the library reports is an interval: lower bounds come from
//! explicit witness observables, upper bounds from explicit certificates.
//! The modules build on each other bottom-up:
//!
//! - [`linalg`]: dense complex matrices and factorizations
//! - [`channel`]: CPTP maps in Kraus, Choi and superoperator form
//! - [`resource`]: resource sets, commutants, Lipschitz seminorms
//! - [`engine`]: interval estimation of complexities and related norms
//! - [`dynamics`]: quantum Markov semigroups, return times, trajectories
//! - [`groups`]: finite matrix groups and word lengths
//! - [`clifford`]: Pauli resources and their norm comparisons

pub mod channel;
pub mod clifford;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod random;
pub mod resource;

pub use channel::QuantumChannel;
pub use engine::{ComplexityEstimate, SolveOptions};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, SubsystemShape, C64};
pub use resource::{LipschitzStructure, NormVariant, ResourceKind, ResourceSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
