use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamSettings};
use super::ansatz::{AnsatzKind, AnsatzSpec};
use super::gradient::{adjoint_gradient, energy, parameter_shift_gradient, GradientMethod};
use crate::error::{Error, Result};
use crate::integrals::QubitHamiltonian;
use crate::simulator::{Circuit, Statevector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VqeSettings {
    pub max_iters: usize,
    pub adam: AdamSettings,
    /// Parameters per group; `None` optimizes all of them together.
    pub group_size: Option<usize>,
    /// Stop after `patience` consecutive iterations with `|ΔE| < tol`.
    pub tol: f64,
    pub patience: usize,
    pub gradient: GradientMethod,
}

impl Default for VqeSettings {
    fn default() -> Self {
        Self {
            max_iters: 500,
            adam: AdamSettings::default(),
            group_size: None,
            tol: 1e-8,
            patience: 10,
            gradient: GradientMethod::ParameterShift,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug)]
pub struct VqeResult {
    pub spec: AnsatzSpec,
    pub seed: u64,
    /// Best parameters seen.
    pub params: Vec<f64>,
    pub energy: f64,
    /// Energy at the initial parameters.
    pub initial_energy: f64,
    pub trace: Vec<IterationRecord>,
    pub circuit: Circuit,
}

#[derive(Serialize, Deserialize)]
struct VqeRecord {
    spec: AnsatzSpec,
    seed: u64,
    params: Vec<f64>,
    energy: f64,
    initial_energy: f64,
    trace: Vec<IterationRecord>,
}

impl VqeResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&VqeRecord {
            spec: self.spec.clone(),
            seed: self.seed,
            params: self.params.clone(),
            energy: self.energy,
            initial_energy: self.initial_energy,
            trace: self.trace.clone(),
        })?)
    }

    /// Parses a stored result and rebuilds its circuit from the spec.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: VqeRecord = serde_json::from_str(text)?;
        let circuit = r.spec.build()?;
        if circuit.n_params != r.params.len() {
            return Err(Error::domain(format!(
                "stored {} parameters for a {}-parameter circuit",
                r.params.len(),
                circuit.n_params
            )));
        }
        Ok(Self {
            spec: r.spec,
            seed: r.seed,
            params: r.params,
            energy: r.energy,
            initial_energy: r.initial_energy,
            trace: r.trace,
            circuit,
        })
    }

    /// The optimized state `U(θ*)|0…0⟩`.
    pub fn state(&self) -> Result<Statevector> {
        Statevector::zero(self.circuit.n_qubits)?.apply(&self.circuit, &self.params)
    }
}

fn initial_params(spec: &AnsatzSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match spec.kind {
        AnsatzKind::Uccsd => vec![0.0; n],
        AnsatzKind::Hea => (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect(),
    }
}

/// Grouped Adam minimization of `⟨H⟩` over the ansatz parameters.
///
/// Each outer iteration reshuffles the parameters into groups and takes one
/// Adam step per group, recomputing the gradient before each. The best
/// energy seen, including the starting point, is returned.
pub fn run_vqe(h: &QubitHamiltonian, spec: &AnsatzSpec, opt: &VqeSettings, seed: u64) -> Result<VqeResult> {
    if h.n_qubits != spec.n_qubits() {
        return Err(Error::domain(format!(
            "{}-qubit Hamiltonian for a {}-qubit ansatz",
            h.n_qubits,
            spec.n_qubits()
        )));
    }
    if opt.group_size == Some(0) {
        return Err(Error::domain("group size must be positive"));
    }
    let circuit = spec.build()?;
    let n = circuit.n_params;
    let initial = Statevector::zero(circuit.n_qubits)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = initial_params(spec, n, &mut rng);
    let mut adam = Adam::new(n, opt.adam);
    let e0 = energy(&circuit, h, &params, &initial)?;
    let (mut best_e, mut best_params) = (e0, params.clone());
    let mut prev = e0;
    let mut calm = 0;
    let mut trace = Vec::new();
    let group = opt.group_size.unwrap_or(n.max(1)).min(n.max(1));
    let mut order: Vec<usize> = (0..n).collect();
    for it in 1..=opt.max_iters {
        order.shuffle(&mut rng);
        let mut sq = 0.0;
        for chunk in order.chunks(group) {
            let grad = match opt.gradient {
                GradientMethod::ParameterShift => {
                    parameter_shift_gradient(&circuit, h, &params, &initial, Some(chunk))?
                }
                GradientMethod::Adjoint => adjoint_gradient(&circuit, h, &params, &initial)?.1,
            };
            sq += chunk.iter().map(|&j| grad[j] * grad[j]).sum::<f64>();
            adam.step_subset(&mut params, &grad, chunk);
        }
        let e = energy(&circuit, h, &params, &initial)?;
        let record = IterationRecord {
            iteration: it,
            energy: e,
            grad_norm: sq.sqrt(),
        };
        trace.push(record);
        if !e.is_finite() || !record.grad_norm.is_finite() {
            return Err(Error::VqeDiverged { trace });
        }
        if e < best_e {
            best_e = e;
            best_params.clone_from(&params);
        }
        if (e - prev).abs() < opt.tol {
            calm += 1;
            if calm >= opt.patience {
                break;
            }
        } else {
            calm = 0;
        }
        prev = e;
    }
    Ok(VqeResult {
        spec: spec.clone(),
        seed,
        params: best_params,
        energy: best_e,
        initial_energy: e0,
        trace,
        circuit,
    })
}
