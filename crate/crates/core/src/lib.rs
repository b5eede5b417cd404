//! Hybrid VQE / neural-network quantum state engine for molecular ground
//! states.
//!
//! The pipeline runs FCIDUMP integrals → qubit Hamiltonian → VQE on an exact
//! statevector → extraction of dominant configurations → pretraining of an
//! autoregressive transformer wavefunction → variational Monte Carlo, with a
//! determinant-space FCI/CISD solver as the reference oracle throughout.

pub mod autodiff;
pub mod error;
pub mod extraction;
pub mod integrals;
pub mod nnqs;
pub mod simulator;
pub mod solver;
pub mod training;
pub mod vqe;

pub use error::{Error, Result};
