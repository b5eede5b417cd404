//! Exact dense statevector simulation of parameterized circuits.

mod circuit;
mod statevector;

pub use circuit::{Circuit, Gate, GateKind, ParamRef};
pub use statevector::{Statevector, MAX_QUBITS};
