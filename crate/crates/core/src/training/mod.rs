//! Pretraining on extracted tables and variational Monte Carlo.

mod estimator;
mod local;
mod pretrain;
mod trace;
mod vmc;

pub use estimator::{energy_and_gradient, exact_energy, EnergyGradient, Estimate};
pub use local::{local_energies, local_energy, Amplitudes, Connections};
pub use pretrain::{pretrain, pretrain_loss, PretrainRecord, PretrainSettings, PretrainTarget};
pub use trace::{EvalMode, TrainRecord, TrainTrace};
pub use vmc::{train_vmc, GradientSource, VmcSettings};
