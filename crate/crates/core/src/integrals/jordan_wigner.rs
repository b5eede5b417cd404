//! Jordan–Wigner encoding of the second-quantized molecular Hamiltonian.
//!
//! Spin orbital `(p, σ)` lives on qubit `2p + σ` and
//! `a_k = (Π_{j<k} Z_j)(X_k + iY_k)/2`.

use num_complex::Complex64;

use super::pauli::{PauliSum, PauliWord, QubitHamiltonian, MERGE_TOLERANCE};
use super::IntegralSet;

/// A creation (`dagger`) or annihilation operator on spin orbital `mode`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }

    pub fn to_pauli(&self) -> PauliSum {
        let parity = (1u64 << self.mode) - 1;
        let bit = 1u64 << self.mode;
        let x_word = PauliWord { x: bit, z: parity };
        let y_word = PauliWord { x: bit, z: parity | bit };
        let y_coeff = if self.dagger { -0.5 } else { 0.5 };
        let mut s = PauliSum::new();
        s.add_term(x_word, Complex64::new(0.5, 0.0));
        s.add_term(y_word, Complex64::new(0.0, y_coeff));
        s
    }
}

/// Pauli expansion of the ordered product `ops[0] · ops[1] · …`.
pub fn fermion_product(ops: &[Ladder]) -> PauliSum {
    let mut acc = PauliSum::from_term(PauliWord::IDENTITY, Complex64::new(1.0, 0.0));
    for op in ops {
        acc = acc.mul(&op.to_pauli());
        acc.simplify(1e-15);
    }
    acc
}

/// Maps the molecular Hamiltonian
/// `E_core + Σ h_pq a†_pσ a_qσ + ½ Σ (pq|rs) a†_pσ a†_rτ a_sτ a_qσ`
/// to a qubit Hamiltonian on `2·n_orb` qubits.
pub fn jordan_wigner(ints: &IntegralSet) -> QubitHamiltonian {
    let n = ints.n_orb;
    let n_so = 2 * n;

    // E_kl = a†_k a_l for same-spin pairs
    let mut excitation = vec![PauliSum::new(); n_so * n_so];
    for k in 0..n_so {
        for l in 0..n_so {
            if k % 2 == l % 2 {
                excitation[k * n_so + l] =
                    fermion_product(&[Ladder::create(k), Ladder::annihilate(l)]);
            }
        }
    }

    let mut total = PauliSum::from_term(PauliWord::IDENTITY, Complex64::new(ints.e_core, 0.0));
    for p in 0..n {
        for q in 0..n {
            let h = ints.h1(p, q);
            if h == 0.0 {
                continue;
            }
            for sigma in 0..2 {
                let e = &excitation[(2 * p + sigma) * n_so + 2 * q + sigma];
                total.add_scaled(e, Complex64::new(h, 0.0));
            }
        }
    }

    // a†_p a†_r a_s a_q = E_pq E_rs - δ_qr E_ps
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.h2(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    let half = Complex64::new(0.5 * v, 0.0);
                    for sigma in 0..2 {
                        for tau in 0..2 {
                            let (ps, qs) = (2 * p + sigma, 2 * q + sigma);
                            let (rs, ss) = (2 * r + tau, 2 * s + tau);
                            let e_pq = &excitation[ps * n_so + qs];
                            let e_rs = &excitation[rs * n_so + ss];
                            total.add_scaled(&e_pq.mul(e_rs), half);
                            if qs == rs {
                                total.add_scaled(&excitation[ps * n_so + ss], -half);
                            }
                        }
                    }
                }
            }
        }
    }
    total.simplify(MERGE_TOLERANCE);
    QubitHamiltonian::from_sum(n_so, &total)
        .expect("real symmetric integrals give a Hermitian operator")
}
