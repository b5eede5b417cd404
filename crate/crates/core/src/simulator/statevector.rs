use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{Read, Write};

use num_complex::Complex64;

use super::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::extraction::Configuration;
use crate::integrals::{PauliWord, QubitHamiltonian};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `2^n` complex amplitudes; bit `k` of the basis index is qubit `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::domain(format!(
                "{n_qubits} qubits exceed the dense simulator limit of {MAX_QUBITS}"
            )));
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn basis_state(n_qubits: usize, config: &Configuration) -> Result<Self> {
        if config.len() != n_qubits {
            return Err(Error::domain(format!(
                "configuration of length {} for a {n_qubits}-qubit register",
                config.len()
            )));
        }
        let mut s = Self::zero(n_qubits)?;
        s.amps[0] = ZERO;
        s.amps[config.bits() as usize] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_qubits > MAX_QUBITS || amps.len() != 1 << n_qubits {
            return Err(Error::domain(format!(
                "{} amplitudes do not describe {n_qubits} qubits",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `⟨config|ψ⟩`.
    pub fn amplitude(&self, config: &Configuration) -> Result<Complex64> {
        if config.len() != self.n_qubits {
            return Err(Error::domain(format!(
                "configuration of length {} for a {}-qubit state",
                config.len(),
                self.n_qubits
            )));
        }
        Ok(self.amps[config.bits() as usize])
    }

    /// Evolves a copy of the state through `circuit` bound to `params`.
    pub fn apply(&self, circuit: &Circuit, params: &[f64]) -> Result<Statevector> {
        self.check_circuit(circuit, params)?;
        let mut out = self.clone();
        for g in circuit.gates() {
            out.apply_gate(g, g.resolved_angle(params));
        }
        Ok(out)
    }

    /// Like [`apply`](Self::apply) with gate `shifted.0` rotated by an extra
    /// `shifted.1` radians.
    pub fn apply_shifted(
        &self,
        circuit: &Circuit,
        params: &[f64],
        shifted: (usize, f64),
    ) -> Result<Statevector> {
        self.check_circuit(circuit, params)?;
        let mut out = self.clone();
        for (i, g) in circuit.gates().iter().enumerate() {
            let mut angle = g.resolved_angle(params);
            if i == shifted.0 {
                angle += shifted.1;
            }
            out.apply_gate(g, angle);
        }
        Ok(out)
    }

    pub(crate) fn check_circuit(&self, circuit: &Circuit, params: &[f64]) -> Result<()> {
        if circuit.n_qubits != self.n_qubits {
            return Err(Error::domain(format!(
                "{}-qubit circuit applied to a {}-qubit state",
                circuit.n_qubits, self.n_qubits
            )));
        }
        if params.len() != circuit.n_params {
            return Err(Error::domain(format!(
                "circuit expects {} parameters, got {}",
                circuit.n_params,
                params.len()
            )));
        }
        Ok(())
    }

    /// Applies one gate in place; `angle` is used by rotation kinds only.
    pub fn apply_gate(&mut self, gate: &Gate, angle: f64) {
        match &gate.kind {
            GateKind::X => {
                let bit = 1usize << gate.targets[0];
                for b in 0..self.amps.len() {
                    if b & bit == 0 {
                        self.amps.swap(b, b | bit);
                    }
                }
            }
            GateKind::H => {
                let bit = 1usize << gate.targets[0];
                for b in 0..self.amps.len() {
                    if b & bit == 0 {
                        let (a0, a1) = (self.amps[b], self.amps[b | bit]);
                        self.amps[b] = (a0 + a1) * FRAC_1_SQRT_2;
                        self.amps[b | bit] = (a0 - a1) * FRAC_1_SQRT_2;
                    }
                }
            }
            GateKind::CNOT => {
                let c = 1usize << gate.targets[0];
                let t = 1usize << gate.targets[1];
                for b in 0..self.amps.len() {
                    if b & c != 0 && b & t == 0 {
                        self.amps.swap(b, b | t);
                    }
                }
            }
            GateKind::CZ => {
                let mask = (1usize << gate.targets[0]) | (1usize << gate.targets[1]);
                for b in 0..self.amps.len() {
                    if b & mask == mask {
                        self.amps[b] = -self.amps[b];
                    }
                }
            }
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::PauliRotation(_) => {
                let word = gate.rotation_word().expect("rotation gate has a generator");
                self.rotate(&word, angle);
            }
        }
    }

    /// `ψ ← exp(-i θ/2 · P) ψ`.
    pub fn rotate(&mut self, word: &PauliWord, theta: f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        let minus_i_s = Complex64::new(0.0, -s);
        if word.x == 0 {
            let z = word.z as usize;
            let down = Complex64::new(c, -s);
            let up = Complex64::new(c, s);
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= if (b & z).count_ones() % 2 == 0 { down } else { up };
            }
            return;
        }
        let x = word.x as usize;
        let pivot = 1usize << word.x.trailing_zeros();
        for b in 0..self.amps.len() {
            if b & pivot != 0 {
                continue;
            }
            let b2 = b ^ x;
            let (_, ph_b) = word.apply_to_basis(b as u64);
            let (_, ph_b2) = word.apply_to_basis(b2 as u64);
            let (a, a2) = (self.amps[b], self.amps[b2]);
            // (Pψ)[b2] = ph_b ψ[b],  (Pψ)[b] = ph_b2 ψ[b2]
            self.amps[b] = a * c + minus_i_s * ph_b2 * a2;
            self.amps[b2] = a2 * c + minus_i_s * ph_b * a;
        }
    }

    /// `P|ψ⟩` for a single Pauli word.
    pub fn apply_pauli(&self, word: &PauliWord) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let (b2, ph) = word.apply_to_basis(b as u64);
            out[b2 as usize] += ph * a;
        }
        out
    }

    /// `H|ψ⟩`.
    pub fn apply_hamiltonian(&self, h: &QubitHamiltonian) -> Result<Vec<Complex64>> {
        self.check_hamiltonian(h)?;
        let mut out = vec![ZERO; self.amps.len()];
        for t in &h.terms {
            let w = t.word;
            let base = Complex64::new(0.0, 1.0).powu(w.n_y()) * t.coeff;
            let z = w.z as usize;
            let x = w.x as usize;
            for (b, a) in self.amps.iter().enumerate() {
                let ph = if (b & z).count_ones() % 2 == 0 { base } else { -base };
                out[b ^ x] += ph * a;
            }
        }
        Ok(out)
    }

    fn check_hamiltonian(&self, h: &QubitHamiltonian) -> Result<()> {
        if h.n_qubits != self.n_qubits {
            return Err(Error::domain(format!(
                "{}-qubit Hamiltonian measured on a {}-qubit state",
                h.n_qubits, self.n_qubits
            )));
        }
        Ok(())
    }

    /// `⟨ψ|H|ψ⟩`; the imaginary residue is checked and discarded.
    pub fn expectation(&self, h: &QubitHamiltonian) -> Result<f64> {
        let hpsi = self.apply_hamiltonian(h)?;
        let e: Complex64 = self
            .amps
            .iter()
            .zip(&hpsi)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let scale = h.one_norm().max(1.0) * self.norm().powi(2).max(1.0);
        debug_assert!(
            e.im.abs() < 1e-10 * scale,
            "imaginary expectation residue {}",
            e.im
        );
        Ok(e.re)
    }

    /// Total probability outside the `(n_alpha, n_beta)` sector.
    pub fn out_of_sector_probability(&self, n_alpha: usize, n_beta: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(b, _)| {
                !Configuration::from_bits(*b as u64, self.n_qubits).in_sector(n_alpha, n_beta)
            })
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Binary dump: little-endian `u64` qubit count, then `(re, im)` pairs
    /// of little-endian `f64`.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&(self.n_qubits as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 8];
        r.read_exact(&mut head)?;
        let n = u64::from_le_bytes(head) as usize;
        if n > MAX_QUBITS {
            return Err(Error::domain(format!(
                "statevector header claims {n} qubits (limit {MAX_QUBITS})"
            )));
        }
        let mut bytes = vec![0u8; (1usize << n) * 16];
        r.read_exact(&mut bytes)?;
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Self::from_amplitudes(n, amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::PauliString;

    #[test]
    fn basis_index_convention() {
        let c: Configuration = "10".parse().unwrap();
        let s = Statevector::basis_state(2, &c).unwrap();
        let expect = [0.0, 1.0, 0.0, 0.0];
        for (a, e) in s.amps().iter().zip(expect) {
            assert_eq!(a.re, e);
        }
        assert!(Statevector::basis_state(3, &c).is_err());
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = Statevector::zero(1).unwrap();
        s.apply_gate(&Gate::h(0), 0.0);
        assert!((s.amps()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amps()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn z_expectation_on_excited_qubit() {
        let c: Configuration = "100".parse().unwrap();
        let s = Statevector::basis_state(3, &c).unwrap();
        let h = QubitHamiltonian::from_terms(
            3,
            [PauliString {
                word: PauliWord::parse("ZII").unwrap(),
                coeff: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(s.expectation(&h).unwrap(), -1.0);
        let mismatched = QubitHamiltonian { n_qubits: 2, terms: vec![] };
        assert!(s.expectation(&mismatched).is_err());
    }

    #[test]
    fn amplitude_readout() {
        let c: Configuration = "0110".parse().unwrap();
        let s = Statevector::basis_state(4, &c).unwrap();
        assert_eq!(s.amplitude(&c).unwrap(), Complex64::new(1.0, 0.0));
        let other: Configuration = "1010".parse().unwrap();
        assert_eq!(s.amplitude(&other).unwrap(), ZERO);
        assert!(s.amplitude(&"01".parse().unwrap()).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let mut s = Statevector::zero(3).unwrap();
        s.apply_gate(&Gate::h(1), 0.0);
        s.apply_gate(&Gate::ry(2, 0.0), 0.3);
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 8 * 16);
        assert_eq!(&buf[..8], &3u64.to_le_bytes());
        assert_eq!(Statevector::read_from(buf.as_slice()).unwrap(), s);
    }
}
