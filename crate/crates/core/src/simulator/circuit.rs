use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::integrals::PauliWord;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    X,
    H,
    RX,
    RY,
    RZ,
    CNOT,
    CZ,
    /// `exp(-i θ/2 · P)` for the given word.
    PauliRotation(PauliWord),
}

/// Binds a rotation angle to `multiplier · params[index]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRef {
    pub index: usize,
    pub multiplier: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// Fixed angle, added to the parameter contribution when one is bound.
    pub angle: f64,
    pub param: Option<ParamRef>,
}

impl Gate {
    pub fn x(q: usize) -> Self {
        Self::fixed(GateKind::X, vec![q], 0.0)
    }

    pub fn h(q: usize) -> Self {
        Self::fixed(GateKind::H, vec![q], 0.0)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::fixed(GateKind::CNOT, vec![control, target], 0.0)
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::fixed(GateKind::CZ, vec![a, b], 0.0)
    }

    pub fn rx(q: usize, angle: f64) -> Self {
        Self::fixed(GateKind::RX, vec![q], angle)
    }

    pub fn ry(q: usize, angle: f64) -> Self {
        Self::fixed(GateKind::RY, vec![q], angle)
    }

    pub fn rz(q: usize, angle: f64) -> Self {
        Self::fixed(GateKind::RZ, vec![q], angle)
    }

    pub fn pauli_rotation(word: PauliWord, angle: f64) -> Self {
        let targets = (0..64).filter(|k| (word.support() >> k) & 1 == 1).collect();
        Self::fixed(GateKind::PauliRotation(word), targets, angle)
    }

    fn fixed(kind: GateKind, targets: Vec<usize>, angle: f64) -> Self {
        Self {
            kind,
            targets,
            angle,
            param: None,
        }
    }

    /// Binds the gate angle to a circuit parameter.
    pub fn with_param(mut self, index: usize, multiplier: f64) -> Self {
        self.param = Some(ParamRef { index, multiplier });
        self
    }

    pub fn is_rotation(&self) -> bool {
        matches!(
            self.kind,
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::PauliRotation(_)
        )
    }

    /// Rotation angle for bound parameters.
    pub fn resolved_angle(&self, params: &[f64]) -> f64 {
        match self.param {
            Some(p) => self.angle + p.multiplier * params[p.index],
            None => self.angle,
        }
    }

    /// The Pauli generator of a rotation gate.
    pub fn rotation_word(&self) -> Option<PauliWord> {
        let q = *self.targets.first()?;
        let bit = 1u64 << q;
        match &self.kind {
            GateKind::RX => Some(PauliWord { x: bit, z: 0 }),
            GateKind::RY => Some(PauliWord { x: bit, z: bit }),
            GateKind::RZ => Some(PauliWord { x: 0, z: bit }),
            GateKind::PauliRotation(w) => Some(*w),
            _ => None,
        }
    }
}

/// Ordered gate list acting on `n_qubits`, bound to `n_params` parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub n_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_params: usize) -> Self {
        Self {
            n_qubits,
            n_params,
            gates: Vec::new(),
        }
    }

    /// Appends a gate after checking qubit and parameter indices.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let expected = match gate.kind {
            GateKind::CNOT | GateKind::CZ => Some(2),
            GateKind::PauliRotation(_) => None,
            _ => Some(1),
        };
        if let Some(n) = expected {
            if gate.targets.len() != n {
                return Err(Error::domain(format!(
                    "{:?} needs {n} targets, got {}",
                    gate.kind,
                    gate.targets.len()
                )));
            }
        }
        if let GateKind::PauliRotation(w) = &gate.kind {
            if w.width() > self.n_qubits {
                return Err(Error::domain(format!(
                    "Pauli rotation acts on qubit {} of a {}-qubit circuit",
                    w.width() - 1,
                    self.n_qubits
                )));
            }
        }
        for (i, &q) in gate.targets.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::domain(format!(
                    "gate targets qubit {q} of a {}-qubit circuit",
                    self.n_qubits
                )));
            }
            if gate.targets[..i].contains(&q) {
                return Err(Error::domain(format!("gate repeats target qubit {q}")));
            }
        }
        if let Some(p) = gate.param {
            if !gate.is_rotation() {
                return Err(Error::UnsupportedGate(format!(
                    "{:?} cannot carry a parameter",
                    gate.kind
                )));
            }
            if p.index >= self.n_params {
                return Err(Error::domain(format!(
                    "parameter index {} out of range for {} parameters",
                    p.index, self.n_params
                )));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Rewrites Pauli rotations into basis changes, CNOT ladders and a
    /// single `RZ`, leaving the prepared state unchanged.
    pub fn decompose(&self) -> Circuit {
        let mut out = Circuit::new(self.n_qubits, self.n_params);
        for g in &self.gates {
            let GateKind::PauliRotation(word) = &g.kind else {
                out.gates.push(g.clone());
                continue;
            };
            let qubits: Vec<usize> = g.targets.clone();
            if qubits.is_empty() {
                // global phase only
                continue;
            }
            let mut pre = Vec::new();
            let mut post = Vec::new();
            for &q in &qubits {
                match word.letter(q) {
                    'X' => {
                        pre.push(Gate::h(q));
                        post.push(Gate::h(q));
                    }
                    'Y' => {
                        pre.push(Gate::rx(q, FRAC_PI_2));
                        post.push(Gate::rx(q, -FRAC_PI_2));
                    }
                    _ => {}
                }
            }
            let ladder: Vec<Gate> = qubits.windows(2).map(|w| Gate::cnot(w[0], w[1])).collect();
            let last = *qubits.last().unwrap();
            let mut rz = Gate::rz(last, g.angle);
            rz.param = g.param;
            out.gates.extend(pre);
            out.gates.extend(ladder.iter().cloned());
            out.gates.push(rz);
            out.gates.extend(ladder.into_iter().rev());
            out.gates.extend(post);
        }
        out
    }

    /// Circuit depth under greedy as-soon-as-possible layering.
    pub fn depth(&self) -> usize {
        let mut busy = vec![0usize; self.n_qubits];
        let mut depth = 0;
        for g in &self.gates {
            let layer = g.targets.iter().map(|&q| busy[q]).max().unwrap_or(0) + 1;
            for &q in &g.targets {
                busy[q] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }

    /// Number of gates of each two-qubit kind after decomposition.
    pub fn two_qubit_count(&self) -> usize {
        self.decompose()
            .gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::CNOT | GateKind::CZ))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_indices() {
        let mut c = Circuit::new(2, 1);
        assert!(c.push(Gate::x(2)).is_err());
        assert!(c.push(Gate::cnot(1, 1)).is_err());
        assert!(c.push(Gate::ry(0, 0.0).with_param(1, 1.0)).is_err());
        assert!(matches!(
            c.push(Gate::h(0).with_param(0, 1.0)),
            Err(Error::UnsupportedGate(_))
        ));
        assert!(c
            .push(Gate::pauli_rotation(PauliWord::parse("IIX").unwrap(), 0.1))
            .is_err());
        assert!(c.push(Gate::ry(0, 0.0).with_param(0, -1.0)).is_ok());
    }

    #[test]
    fn depth_counts_parallel_layers() {
        let mut c = Circuit::new(3, 0);
        for q in 0..3 {
            c.push(Gate::h(q)).unwrap();
        }
        c.push(Gate::cz(0, 1)).unwrap();
        c.push(Gate::x(2)).unwrap();
        c.push(Gate::cz(1, 2)).unwrap();
        assert_eq!(c.depth(), 3);
    }
}
