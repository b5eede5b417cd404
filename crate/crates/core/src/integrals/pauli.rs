//! Pauli words, Pauli sums and the qubit Hamiltonian.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this magnitude (hartree) are treated as zero when
/// merging like terms.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Tensor product of single-qubit Paulis in symplectic form.
///
/// Qubit `k` carries `I` (x=0,z=0), `X` (1,0), `Y` (1,1) or `Z` (0,1).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord {
    pub x: u64,
    pub z: u64,
}

#[inline]
fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl PauliWord {
    pub const IDENTITY: PauliWord = PauliWord { x: 0, z: 0 };

    pub fn single(qubit: usize, letter: char) -> Result<Self> {
        let bit = 1u64 << qubit;
        Ok(match letter {
            'I' => Self::IDENTITY,
            'X' => Self { x: bit, z: 0 },
            'Y' => Self { x: bit, z: bit },
            'Z' => Self { x: 0, z: bit },
            other => return Err(Error::domain(format!("invalid Pauli letter {other:?}"))),
        })
    }

    /// Parses a string such as `"IXYZ"`; character `k` acts on qubit `k`.
    pub fn parse(s: &str) -> Result<Self> {
        if s.len() > 64 {
            return Err(Error::domain("Pauli word longer than 64 qubits"));
        }
        let mut w = Self::IDENTITY;
        for (k, ch) in s.chars().enumerate() {
            let single = Self::single(k, ch)?;
            w.x |= single.x;
            w.z |= single.z;
        }
        Ok(w)
    }

    pub fn letter(&self, qubit: usize) -> char {
        match ((self.x >> qubit) & 1, (self.z >> qubit) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    pub fn to_string(&self, n_qubits: usize) -> String {
        (0..n_qubits).map(|k| self.letter(k)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    /// Highest qubit index acted on non-trivially plus one.
    pub fn width(&self) -> usize {
        64 - self.support().leading_zeros() as usize
    }

    pub fn n_y(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// `self · other = phase · result`.
    pub fn mul(&self, other: &PauliWord) -> (Complex64, PauliWord) {
        // W(x,z) = i^{|x&z|} X^x Z^z and Z^z1 X^x2 = (-1)^{|z1&x2|} X^x2 Z^z1
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let sign = (self.z & other.x).count_ones() * 2;
        let k = self.n_y() + other.n_y() + sign + 4 * 64 - (x & z).count_ones();
        (i_pow(k), PauliWord { x, z })
    }

    /// `P|b⟩ = phase |b ^ x⟩`; returns `(b ^ x, phase)`.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (u64, Complex64) {
        let mut k = self.n_y();
        if (self.z & b).count_ones() % 2 == 1 {
            k += 2;
        }
        (b ^ self.x, i_pow(k))
    }

    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }
}

/// Complex-weighted Pauli sum used while building operators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PauliSum {
    pub terms: BTreeMap<PauliWord, Complex64>,
}

impl PauliSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_term(word: PauliWord, coeff: Complex64) -> Self {
        let mut s = Self::new();
        s.add_term(word, coeff);
        s
    }

    pub fn add_term(&mut self, word: PauliWord, coeff: Complex64) {
        *self.terms.entry(word).or_insert(Complex64::new(0.0, 0.0)) += coeff;
    }

    pub fn add_scaled(&mut self, other: &PauliSum, scale: Complex64) {
        for (w, c) in &other.terms {
            self.add_term(*w, c * scale);
        }
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::new();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let (phase, w) = w1.mul(w2);
                out.add_term(w, c1 * c2 * phase);
            }
        }
        out
    }

    /// Drops terms whose coefficient magnitude is below `tol`.
    pub fn simplify(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() >= tol);
    }

    pub fn coeff(&self, word: &PauliWord) -> Complex64 {
        self.terms.get(word).copied().unwrap_or_default()
    }
}

/// A real-weighted Pauli word.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliString {
    pub word: PauliWord,
    pub coeff: f64,
}

/// Hermitian operator `Σ c_P P` on `n_qubits` qubits with distinct words.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitHamiltonian {
    pub n_qubits: usize,
    pub terms: Vec<PauliString>,
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    paulis: String,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonHamiltonian {
    n_qubits: usize,
    terms: Vec<JsonTerm>,
}

impl QubitHamiltonian {
    /// Converts a Pauli sum, asserting Hermiticity (imaginary parts below
    /// `1e-10`) and dropping terms under [`MERGE_TOLERANCE`].
    pub fn from_sum(n_qubits: usize, sum: &PauliSum) -> Result<Self> {
        let mut terms = Vec::with_capacity(sum.terms.len());
        for (w, c) in &sum.terms {
            if w.width() > n_qubits {
                return Err(Error::domain(format!(
                    "Pauli word acts on qubit {} of a {n_qubits}-qubit register",
                    w.width() - 1
                )));
            }
            if c.im.abs() > 1e-10 {
                return Err(Error::domain(format!(
                    "non-Hermitian coefficient {c} on {}",
                    w.to_string(n_qubits)
                )));
            }
            if c.re.abs() >= MERGE_TOLERANCE {
                terms.push(PauliString {
                    word: *w,
                    coeff: c.re,
                });
            }
        }
        Ok(Self { n_qubits, terms })
    }

    /// Builds from arbitrary terms, merging duplicate words.
    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = PauliString>) -> Result<Self> {
        let mut sum = PauliSum::new();
        for t in terms {
            sum.add_term(t.word, Complex64::new(t.coeff, 0.0));
        }
        Self::from_sum(n_qubits, &sum)
    }

    pub fn identity_coeff(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.word.is_identity())
            .map_or(0.0, |t| t.coeff)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = JsonHamiltonian {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| JsonTerm {
                    paulis: t.word.to_string(self.n_qubits),
                    coeff: t.coeff,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JsonHamiltonian = serde_json::from_str(text)?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            if t.paulis.len() != doc.n_qubits {
                return Err(Error::domain(format!(
                    "Pauli string {:?} has length {} but n_qubits = {}",
                    t.paulis,
                    t.paulis.len(),
                    doc.n_qubits
                )));
            }
            terms.push(PauliString {
                word: PauliWord::parse(&t.paulis)?,
                coeff: t.coeff,
            });
        }
        Self::from_terms(doc.n_qubits, terms)
    }

    /// `H|b⟩` as a list of `(b', amplitude)` pairs (unmerged).
    pub fn apply_to_basis(&self, b: u64) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.terms.iter().map(move |t| {
            let (b2, phase) = t.word.apply_to_basis(b);
            (b2, phase * t.coeff)
        })
    }

    /// Matrix of `H` projected onto the span of `basis`:
    /// entry `(i, j) = ⟨basis_i|H|basis_j⟩`, row-major.
    pub fn projected_matrix(&self, basis: &[u64]) -> Vec<Complex64> {
        let index: std::collections::HashMap<u64, usize> =
            basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let n = basis.len();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for (j, &b) in basis.iter().enumerate() {
            for (b2, amp) in self.apply_to_basis(b) {
                if let Some(&i) = index.get(&b2) {
                    m[i * n + j] += amp;
                }
            }
        }
        m
    }

    /// Sum of absolute coefficients; an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }
}

/// Removes every non-identity term with `|c| < threshold`; returns the
/// reduced Hamiltonian and the dropped weight `Σ|c_dropped|`.
pub fn tailor(h: &QubitHamiltonian, threshold: f64) -> Result<(QubitHamiltonian, f64)> {
    if !(threshold >= 0.0) {
        return Err(Error::domain(format!(
            "tailoring threshold must be non-negative, got {threshold}"
        )));
    }
    let mut dropped = 0.0;
    let mut kept = Vec::with_capacity(h.terms.len());
    for t in &h.terms {
        if t.word.is_identity() || t.coeff.abs() >= threshold {
            kept.push(*t);
        } else {
            dropped += t.coeff.abs();
        }
    }
    Ok((
        QubitHamiltonian {
            n_qubits: h.n_qubits,
            terms: kept,
        },
        dropped,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(word: &PauliWord, n: usize) -> Vec<Complex64> {
        let dim = 1usize << n;
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for b in 0..dim as u64 {
            let (b2, ph) = word.apply_to_basis(b);
            m[b2 as usize * dim + b as usize] = ph;
        }
        m
    }

    fn matmul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                for j in 0..dim {
                    c[i * dim + j] += a[i * dim + k] * b[k * dim + j];
                }
            }
        }
        c
    }

    #[test]
    fn single_qubit_letters_match_textbook_matrices() {
        let y = dense(&PauliWord::parse("Y").unwrap(), 1);
        // Y = [[0, -i], [i, 0]]
        assert_eq!(y[1], Complex64::new(0.0, -1.0));
        assert_eq!(y[2], Complex64::new(0.0, 1.0));
        let z = dense(&PauliWord::parse("Z").unwrap(), 1);
        assert_eq!(z[3], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn word_product_matches_dense_product() {
        let letters = ['I', 'X', 'Y', 'Z'];
        for a in 0..16 {
            for b in 0..16 {
                let s1: String = [letters[a % 4], letters[a / 4]].iter().collect();
                let s2: String = [letters[b % 4], letters[b / 4]].iter().collect();
                let w1 = PauliWord::parse(&s1).unwrap();
                let w2 = PauliWord::parse(&s2).unwrap();
                let (ph, w3) = w1.mul(&w2);
                let lhs = matmul(&dense(&w1, 2), &dense(&w2, 2), 4);
                let rhs: Vec<Complex64> = dense(&w3, 2).iter().map(|v| v * ph).collect();
                for (l, r) in lhs.iter().zip(&rhs) {
                    assert!((l - r).norm() < 1e-15, "{s1} * {s2}");
                }
                let commute = matmul(&dense(&w2, 2), &dense(&w1, 2), 4) == lhs;
                assert_eq!(w1.commutes_with(&w2), commute);
            }
        }
    }

    fn sample() -> QubitHamiltonian {
        QubitHamiltonian::from_terms(
            3,
            [("III", -1.0), ("ZII", 0.3), ("XXI", 1e-5), ("YYI", 1e-5), ("IZZ", 2e-3)]
                .iter()
                .map(|(s, c)| PauliString {
                    word: PauliWord::parse(s).unwrap(),
                    coeff: *c,
                }),
        )
        .unwrap()
    }

    #[test]
    fn tailor_edge_thresholds() {
        let h = sample();
        let (same, dropped) = tailor(&h, 0.0).unwrap();
        assert_eq!(same, h);
        assert_eq!(dropped, 0.0);
        let (only_id, dropped) = tailor(&h, f64::INFINITY).unwrap();
        assert_eq!(only_id.len(), 1);
        assert!(only_id.terms[0].word.is_identity());
        assert!((dropped - (0.3 + 2e-5 + 2e-3)).abs() < 1e-15);
        assert!(tailor(&h, -1.0).is_err());
        assert!(tailor(&h, f64::NAN).is_err());
    }

    #[test]
    fn tailor_idempotent_and_monotone() {
        let h = sample();
        let mut last = usize::MAX;
        for tau in [0.0, 1e-6, 1e-4, 1e-2, 1.0] {
            let (t1, _) = tailor(&h, tau).unwrap();
            let (t2, d2) = tailor(&t1, tau).unwrap();
            assert_eq!(t1, t2);
            assert_eq!(d2, 0.0);
            assert!(t1.len() <= last);
            last = t1.len();
        }
    }

    #[test]
    fn json_round_trip() {
        let h = sample();
        let text = h.to_json().unwrap();
        assert!(text.contains("\"paulis\": \"ZII\""));
        assert_eq!(QubitHamiltonian::from_json(&text).unwrap(), h);
        assert!(QubitHamiltonian::from_json(r#"{"n_qubits":2,"terms":[{"paulis":"XYZ","coeff":1}]}"#)
            .is_err());
    }

    #[test]
    fn duplicates_merge() {
        let w = PauliWord::parse("XZ").unwrap();
        let h = QubitHamiltonian::from_terms(
            2,
            [
                PauliString { word: w, coeff: 0.25 },
                PauliString { word: w, coeff: 0.5 },
                PauliString { word: PauliWord::IDENTITY, coeff: 1.0 },
                PauliString { word: PauliWord::IDENTITY, coeff: 1.0 },
            ],
        )
        .unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.identity_coeff(), 2.0);
    }
}
