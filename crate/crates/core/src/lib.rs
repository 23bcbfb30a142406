//! Quantum-state transfer in short qudit spin chains with entanglement tracking.
//!
//! Site indices are 0-based and site 0 is the most significant tensor factor.
//! SU(d) levels in [`sud`] are 1-based.

pub mod chain;
pub mod channels;
pub mod entanglement;
pub mod error;
pub mod numerics;
pub mod protocol;
pub mod sud;

pub use chain::{ChainSpec, Evolution, PstResult, QuantumState};
pub use channels::KrausChannel;
pub use entanglement::EntanglementReport;
pub use error::{Error, Result};
pub use numerics::{Bipartition, ComplexMatrix};
pub use protocol::{ExperimentConfig, TransferRecord};
pub use num_complex::Complex64;
