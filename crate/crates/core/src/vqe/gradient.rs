use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ansatz::SHIFT;
use crate::error::{Error, Result};
use crate::integrals::QubitHamiltonian;
use crate::simulator::{Circuit, Statevector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    #[default]
    ParameterShift,
    /// Reverse sweep through the circuit; same values, one forward and one
    /// backward pass.
    Adjoint,
}

/// `⟨ψ(θ)|H|ψ(θ)⟩` with `ψ(θ) = U(θ)|initial⟩`.
pub fn energy(circuit: &Circuit, h: &QubitHamiltonian, params: &[f64], initial: &Statevector) -> Result<f64> {
    initial.apply(circuit, params)?.expectation(h)
}

fn check_rotations(circuit: &Circuit) -> Result<()> {
    for g in circuit.gates() {
        if g.param.is_some() && !g.is_rotation() {
            return Err(Error::UnsupportedGate(format!("{:?}", g.kind)));
        }
    }
    Ok(())
}

/// Exact gradient by the two-term shift rule, summing
/// `m·[E(+π/2) − E(−π/2)]/2` over every occurrence of each parameter.
/// Only parameters listed in `subset` (all when `None`) are differentiated.
pub fn parameter_shift_gradient(
    circuit: &Circuit,
    h: &QubitHamiltonian,
    params: &[f64],
    initial: &Statevector,
    subset: Option<&[usize]>,
) -> Result<Vec<f64>> {
    check_rotations(circuit)?;
    initial.check_circuit(circuit, params)?;
    let mut wanted = vec![subset.is_none(); circuit.n_params];
    for &j in subset.unwrap_or(&[]) {
        wanted[j] = true;
    }
    let mut grad = vec![0.0; circuit.n_params];
    for (gi, g) in circuit.gates().iter().enumerate() {
        let Some(p) = g.param else { continue };
        if !wanted[p.index] {
            continue;
        }
        let plus = initial.apply_shifted(circuit, params, (gi, SHIFT))?.expectation(h)?;
        let minus = initial.apply_shifted(circuit, params, (gi, -SHIFT))?.expectation(h)?;
        grad[p.index] += p.multiplier * 0.5 * (plus - minus);
    }
    Ok(grad)
}

/// Same derivative as [`parameter_shift_gradient`] from one forward and one
/// reverse sweep: `∂E/∂φ_g = Im⟨λ_g|P_g|ψ_g⟩`.
pub fn adjoint_gradient(
    circuit: &Circuit,
    h: &QubitHamiltonian,
    params: &[f64],
    initial: &Statevector,
) -> Result<(f64, Vec<f64>)> {
    check_rotations(circuit)?;
    let mut psi = initial.apply(circuit, params)?;
    let hpsi = psi.apply_hamiltonian(h)?;
    let e: f64 = psi
        .amps()
        .iter()
        .zip(&hpsi)
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    let mut lambda = Statevector::from_amplitudes(psi.n_qubits(), hpsi)?;
    let mut grad = vec![0.0; circuit.n_params];
    for g in circuit.gates().iter().rev() {
        let angle = g.resolved_angle(params);
        if let Some(p) = g.param {
            let word = g.rotation_word().expect("checked rotation");
            let ppsi = psi.apply_pauli(&word);
            let overlap: Complex64 = lambda
                .amps()
                .iter()
                .zip(&ppsi)
                .map(|(l, v)| l.conj() * v)
                .sum();
            grad[p.index] += p.multiplier * overlap.im;
        }
        if g.is_rotation() {
            let word = g.rotation_word().expect("rotation has a generator");
            psi.rotate(&word, -angle);
            lambda.rotate(&word, -angle);
        } else {
            // X, H, CNOT and CZ are involutions
            psi.apply_gate(g, 0.0);
            lambda.apply_gate(g, 0.0);
        }
    }
    Ok((e, grad))
}
