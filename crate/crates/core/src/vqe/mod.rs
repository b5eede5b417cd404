//! Ansatz circuits, exact gradients and grouped Adam optimization.

mod adam;
mod ansatz;
mod gradient;
mod run;

pub use adam::{Adam, AdamSettings};
pub use ansatz::{build_hea, build_uccsd, uccsd_excitations, AnsatzKind, AnsatzSpec, Excitation};
pub use gradient::{adjoint_gradient, energy, parameter_shift_gradient, GradientMethod};
pub use run::{run_vqe, IterationRecord, VqeResult, VqeSettings};
