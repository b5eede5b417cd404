use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::Configuration;
use crate::integrals::{fermion_product, Ladder, PauliSum};
use crate::simulator::{Circuit, Gate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Uccsd,
    Hea,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    /// Entangling layers, hardware-efficient ansatz only.
    #[serde(default = "one")]
    pub layers: usize,
    pub reference: Configuration,
    /// First-order Trotter steps, UCCSD only.
    #[serde(default = "one")]
    pub trotter_steps: usize,
}

fn one() -> usize {
    1
}

impl AnsatzSpec {
    pub fn uccsd(reference: Configuration) -> Self {
        Self {
            kind: AnsatzKind::Uccsd,
            layers: 1,
            reference,
            trotter_steps: 1,
        }
    }

    pub fn hea(reference: Configuration, layers: usize) -> Self {
        Self {
            kind: AnsatzKind::Hea,
            layers,
            reference,
            trotter_steps: 1,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.reference.len()
    }

    /// Checks that the reference is the lowest-orbital occupation of its own
    /// electron counts.
    pub fn validate(&self) -> Result<()> {
        let r = &self.reference;
        if r.len() % 2 != 0 {
            return Err(Error::domain(format!("reference {r} has odd length")));
        }
        let hf = Configuration::hartree_fock(r.len() / 2, r.n_alpha(), r.n_beta())?;
        if hf != *r {
            return Err(Error::domain(format!(
                "reference {r} does not occupy the lowest orbitals"
            )));
        }
        match self.kind {
            AnsatzKind::Hea if self.layers == 0 => {
                Err(Error::domain("hardware-efficient ansatz needs at least one layer"))
            }
            AnsatzKind::Uccsd if self.trotter_steps == 0 => {
                Err(Error::domain("UCCSD needs at least one Trotter step"))
            }
            _ => Ok(()),
        }
    }

    /// Builds the circuit for this spec, starting from `|0…0⟩`.
    pub fn build(&self) -> Result<Circuit> {
        match self.kind {
            AnsatzKind::Uccsd => {
                let r = &self.reference;
                build_uccsd(r.len() / 2, (r.n_alpha(), r.n_beta()), self)
            }
            AnsatzKind::Hea => build_hea(self.n_qubits(), self),
        }
    }
}

/// A spin-orbital excitation `occ → virt`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Excitation {
    pub occ: Vec<usize>,
    pub virt: Vec<usize>,
}

impl Excitation {
    /// `T − T†` mapped to qubits; anti-Hermitian, so every coefficient is
    /// imaginary.
    pub fn generator(&self) -> PauliSum {
        let mut ops: Vec<Ladder> = self.virt.iter().rev().map(|&a| Ladder::create(a)).collect();
        ops.extend(self.occ.iter().map(|&i| Ladder::annihilate(i)));
        let adjoint: Vec<Ladder> = ops
            .iter()
            .rev()
            .map(|l| Ladder {
                mode: l.mode,
                dagger: !l.dagger,
            })
            .collect();
        let mut g = fermion_product(&ops);
        g.add_scaled(&fermion_product(&adjoint), num_complex::Complex64::new(-1.0, 0.0));
        g.simplify(1e-14);
        g
    }
}

/// Spin-conserving singles then doubles from the reference, in the
/// documented parameter order.
pub fn uccsd_excitations(reference: &Configuration) -> Vec<Excitation> {
    let n = reference.len();
    let occ: Vec<usize> = (0..n).filter(|&k| reference.occupied(k)).collect();
    let virt: Vec<usize> = (0..n).filter(|&k| !reference.occupied(k)).collect();
    let mut out = Vec::new();
    for &i in &occ {
        for &a in &virt {
            if i % 2 == a % 2 {
                out.push(Excitation {
                    occ: vec![i],
                    virt: vec![a],
                });
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    let same = |p: usize, q: usize| p % 2 == q % 2;
                    let sz_ok = (i % 2 + j % 2) == (a % 2 + b % 2);
                    if sz_ok && ((same(i, a) && same(j, b)) || (same(i, b) && same(j, a))) {
                        out.push(Excitation {
                            occ: vec![i, j],
                            virt: vec![a, b],
                        });
                    }
                }
            }
        }
    }
    out
}

fn prepare_reference(circuit: &mut Circuit, reference: &Configuration) -> Result<()> {
    for q in reference.occupied_indices() {
        circuit.push(Gate::x(q))?;
    }
    Ok(())
}

/// Reference preparation followed by `exp(T − T†)` compiled to Pauli
/// rotations, one parameter per excitation. Double-excitation rotations are
/// applied first, then singles.
pub fn build_uccsd(n_orb: usize, sector: (usize, usize), spec: &AnsatzSpec) -> Result<Circuit> {
    if spec.kind != AnsatzKind::Uccsd {
        return Err(Error::domain("build_uccsd called with a non-UCCSD spec"));
    }
    spec.validate()?;
    let r = &spec.reference;
    if r.len() != 2 * n_orb || r.n_alpha() != sector.0 || r.n_beta() != sector.1 {
        return Err(Error::domain(format!(
            "reference {r} is inconsistent with {n_orb} orbitals and sector {sector:?}"
        )));
    }
    let excitations = uccsd_excitations(r);
    // exp(θ Σ i d_P P) = Π exp(-i (−2 d_P θ)/2 P); the words commute
    let rotations: Vec<Vec<(crate::integrals::PauliWord, f64)>> = excitations
        .iter()
        .map(|e| {
            e.generator()
                .terms
                .iter()
                .map(|(w, c)| {
                    debug_assert!(c.re.abs() < 1e-12);
                    (*w, -2.0 * c.im)
                })
                .collect()
        })
        .collect();
    let mut circuit = Circuit::new(r.len(), excitations.len());
    prepare_reference(&mut circuit, r)?;
    let k = spec.trotter_steps as f64;
    // doubles act on the reference before singles; parameter indices keep
    // the singles-first numbering
    let n_singles = excitations.iter().take_while(|e| e.occ.len() == 1).count();
    let gate_order: Vec<usize> = (n_singles..excitations.len()).chain(0..n_singles).collect();
    for _ in 0..spec.trotter_steps {
        for &j in &gate_order {
            let rot = &rotations[j];
            for &(w, m) in rot {
                circuit.push(Gate::pauli_rotation(w, 0.0).with_param(j, m / k))?;
            }
        }
    }
    Ok(circuit)
}

/// Reference preparation, then `layers` × [RY on every qubit, CZ chain],
/// then a closing RY layer.
pub fn build_hea(n_qubits: usize, spec: &AnsatzSpec) -> Result<Circuit> {
    if spec.kind != AnsatzKind::Hea {
        return Err(Error::domain("build_hea called with a non-HEA spec"));
    }
    spec.validate()?;
    if spec.n_qubits() != n_qubits {
        return Err(Error::domain(format!(
            "reference {} does not have {n_qubits} qubits",
            spec.reference
        )));
    }
    let mut circuit = Circuit::new(n_qubits, n_qubits * (spec.layers + 1));
    prepare_reference(&mut circuit, &spec.reference)?;
    let mut p = 0;
    for layer in 0..=spec.layers {
        for q in 0..n_qubits {
            circuit.push(Gate::ry(q, 0.0).with_param(p, 1.0))?;
            p += 1;
        }
        if layer < spec.layers {
            for q in 0..n_qubits.saturating_sub(1) {
                circuit.push(Gate::cz(q, q + 1))?;
            }
        }
    }
    Ok(circuit)
}

/// Shift used by the parameter-shift rule.
pub(crate) const SHIFT: f64 = FRAC_PI_2;
