//! Molecular integrals, active-space reduction and the Jordan–Wigner qubit
//! Hamiltonian.

mod active;
mod fcidump;
mod jordan_wigner;
mod pauli;

pub use active::{apply_active_space, ActiveSpace};
pub use fcidump::{parse_fcidump, read_fcidump, write_fcidump};
pub use jordan_wigner::{fermion_product, jordan_wigner, Ladder};
pub use pauli::{tailor, PauliString, PauliSum, PauliWord, QubitHamiltonian, MERGE_TOLERANCE};

use crate::error::{Error, Result};

/// Spatial-orbital integrals of a molecular Hamiltonian, in hartree.
///
/// `h2` is stored densely in chemists' notation `(pq|rs)` and always carries
/// all eight permutational images.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralSet {
    pub n_orb: usize,
    pub n_elec: usize,
    pub ms2: i64,
    pub e_core: f64,
    h1: Vec<f64>,
    h2: Vec<f64>,
}

impl IntegralSet {
    /// All-zero integrals for `n_orb` orbitals.
    pub fn zeros(n_orb: usize, n_elec: usize, ms2: i64) -> Result<Self> {
        if n_elec > 2 * n_orb {
            return Err(Error::domain(format!(
                "{n_elec} electrons do not fit in {n_orb} orbitals"
            )));
        }
        if (n_elec as i64 - ms2).rem_euclid(2) != 0 || ms2.unsigned_abs() as usize > n_elec {
            return Err(Error::domain(format!(
                "MS2={ms2} is inconsistent with {n_elec} electrons"
            )));
        }
        Ok(Self {
            n_orb,
            n_elec,
            ms2,
            e_core: 0.0,
            h1: vec![0.0; n_orb * n_orb],
            h2: vec![0.0; n_orb.pow(4)],
        })
    }

    #[inline]
    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.h1[p * self.n_orb + q]
    }

    #[inline]
    pub fn h2(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orb;
        self.h2[((p * n + q) * n + r) * n + s]
    }

    /// Sets `h1[p][q]` and `h1[q][p]`.
    pub fn set_h1(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_orb;
        self.h1[p * n + q] = value;
        self.h1[q * n + p] = value;
    }

    /// Sets `(pq|rs)` and its seven symmetric images.
    pub fn set_h2(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        let n = self.n_orb;
        for (a, b, c, d) in eightfold(p, q, r, s) {
            self.h2[((a * n + b) * n + c) * n + d] = value;
        }
    }

    /// Row-major `n_orb × n_orb` one-electron matrix.
    pub fn h1_matrix(&self) -> &[f64] {
        &self.h1
    }

    /// Row-major `n_orb^4` two-electron tensor.
    pub fn h2_tensor(&self) -> &[f64] {
        &self.h2
    }

    pub fn n_alpha(&self) -> usize {
        ((self.n_elec as i64 + self.ms2) / 2) as usize
    }

    pub fn n_beta(&self) -> usize {
        ((self.n_elec as i64 - self.ms2) / 2) as usize
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_orb
    }

    /// Seeded synthetic integrals with molecule-like structure: increasing
    /// orbital energies, dominant Coulomb diagonals and small couplings.
    pub fn random(n_orb: usize, n_elec: usize, ms2: i64, seed: u64) -> Result<Self> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut ints = Self::zeros(n_orb, n_elec, ms2)?;
        ints.e_core = rng.gen_range(0.5..1.5);
        for p in 0..n_orb {
            ints.set_h1(p, p, -2.0 + 0.6 * p as f64 + rng.gen_range(-0.1..0.1));
            for q in 0..p {
                ints.set_h1(p, q, rng.gen_range(-0.15..0.15));
            }
        }
        for p in 0..n_orb {
            for q in 0..=p {
                for r in 0..n_orb {
                    for s in 0..=r {
                        if (p * n_orb + q) < (r * n_orb + s) {
                            continue;
                        }
                        let v = if p == q && r == s {
                            rng.gen_range(0.3..0.7)
                        } else if (p == r && q == s) || (p == s && q == r) {
                            rng.gen_range(0.05..0.2)
                        } else {
                            rng.gen_range(-0.05..0.05)
                        };
                        ints.set_h2(p, q, r, s, v);
                    }
                }
            }
        }
        Ok(ints)
    }
}

pub(crate) fn eightfold(
    p: usize,
    q: usize,
    r: usize,
    s: usize,
) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setters_fill_symmetric_images() {
        let mut ints = IntegralSet::zeros(3, 2, 0).unwrap();
        ints.set_h1(0, 2, -0.5);
        ints.set_h2(0, 1, 2, 2, 0.25);
        assert_eq!(ints.h1(2, 0), -0.5);
        for (a, b, c, d) in eightfold(0, 1, 2, 2) {
            assert_eq!(ints.h2(a, b, c, d), 0.25);
        }
        assert_eq!(ints.h2(0, 2, 1, 2), 0.0);
    }

    #[test]
    fn rejects_inconsistent_spin() {
        assert!(IntegralSet::zeros(2, 2, 1).is_err());
        assert!(IntegralSet::zeros(2, 5, 1).is_err());
        assert!(IntegralSet::zeros(2, 3, 1).is_ok());
    }
}
