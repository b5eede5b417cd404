//! Determinant-space reference solvers: Hartree–Fock energy, CISD and FCI.

mod direct;
mod lanczos;
mod slater;

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use lanczos::LanczosSettings;
pub use slater::hamiltonian_element;

use crate::error::{Error, Result};
use crate::extraction::{enumerate_sector, sector_dimension, Configuration, TableMeta, TableSource, WavefunctionTable};
use crate::integrals::IntegralSet;
use direct::DirectCi;
use slater::{element_bits, excitations};

/// Spaces up to this size are diagonalized densely.
pub const DENSE_LIMIT: usize = 2000;

/// Largest determinant space `solve` accepts.
pub const CAPACITY: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiLevel {
    Fci,
    Cisd,
}

/// An ordered determinant basis.
#[derive(Clone, Debug)]
pub struct CiSpace {
    pub level: CiLevel,
    pub reference: Configuration,
    determinants: Vec<Configuration>,
}

impl CiSpace {
    pub fn fci(ints: &IntegralSet) -> Result<Self> {
        let (na, nb) = (ints.n_alpha(), ints.n_beta());
        let dim = sector_dimension(ints.n_orb, na, nb);
        if dim > CAPACITY {
            return Err(Error::Capacity { dim, limit: CAPACITY });
        }
        Ok(Self {
            level: CiLevel::Fci,
            reference: Configuration::hartree_fock(ints.n_orb, na, nb)?,
            determinants: enumerate_sector(ints.n_orb, na, nb)?,
        })
    }

    /// Reference plus every spin-conserving single and double excitation.
    pub fn cisd(ints: &IntegralSet) -> Result<Self> {
        let reference = Configuration::hartree_fock(ints.n_orb, ints.n_alpha(), ints.n_beta())?;
        let mut dets = Vec::new();
        excitations(reference.bits(), reference.len(), &mut dets);
        dets.push(reference.bits());
        let mut determinants: Vec<_> = dets
            .into_iter()
            .map(|b| Configuration::new(b, reference.len()))
            .collect::<Result<_>>()?;
        determinants.sort();
        determinants.dedup();
        Ok(Self {
            level: CiLevel::Cisd,
            reference,
            determinants,
        })
    }

    pub fn determinants(&self) -> &[Configuration] {
        &self.determinants
    }

    pub fn len(&self) -> usize {
        self.determinants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.determinants.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct CiSolution {
    pub energy: f64,
    /// Ground vector over the space in the interleaved convention,
    /// gauge-fixed and sorted by magnitude.
    pub table: WavefunctionTable,
    /// `‖Hv − Ev‖` in the determinant basis.
    pub residual: f64,
    /// Operator applications spent by Lanczos; zero for dense solves.
    pub matvecs: usize,
}

/// `⟨HF|Ĥ|HF⟩` with the lowest orbitals occupied.
pub fn hartree_fock_energy(ints: &IntegralSet) -> Result<f64> {
    let hf = Configuration::hartree_fock(ints.n_orb, ints.n_alpha(), ints.n_beta())?;
    hamiltonian_element(ints, &hf, &hf)
}

/// Lowest eigenpair of `Ĥ` in `space`: dense below [`DENSE_LIMIT`]
/// determinants, otherwise seeded Lanczos.
pub fn solve(ints: &IntegralSet, space: &CiSpace, lanczos: &LanczosSettings) -> Result<CiSolution> {
    let n = space.len();
    if n > CAPACITY {
        return Err(Error::Capacity { dim: n, limit: CAPACITY });
    }
    for c in &space.determinants {
        if c.len() != ints.n_qubits() || !c.in_sector(ints.n_alpha(), ints.n_beta()) {
            return Err(Error::domain(format!("determinant {c} is outside the sector")));
        }
    }
    let (energy, entries, residual, matvecs) = if n <= DENSE_LIMIT {
        dense(ints, space)
    } else if space.level == CiLevel::Fci {
        direct_fci(ints, lanczos)?
    } else {
        sparse(ints, space, lanczos)?
    };
    let mut table = WavefunctionTable::new(
        TableMeta {
            source: match space.level {
                CiLevel::Fci => TableSource::Fci,
                CiLevel::Cisd => TableSource::Cisd,
            },
            n_qubits: ints.n_qubits(),
            n_alpha: ints.n_alpha(),
            n_beta: ints.n_beta(),
        },
        entries,
    )?;
    table.sort_by_magnitude();
    table.gauge_fix();
    Ok(CiSolution {
        energy,
        table,
        residual,
        matvecs,
    })
}

type Entries = Vec<(Configuration, num_complex::Complex64)>;

type Solved = (f64, Entries, f64, usize);

fn to_entries(dets: &[Configuration], v: &[f64]) -> Entries {
    dets.iter()
        .zip(v)
        .map(|(c, &x)| (*c, num_complex::Complex64::new(x, 0.0)))
        .collect()
}

fn dense(ints: &IntegralSet, space: &CiSpace) -> Solved {
    let dets = &space.determinants;
    let n = dets.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = element_bits(ints, dets[i].bits(), dets[j].bits());
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(h.clone());
    let k = eig.eigenvalues.argmin().0;
    let e = eig.eigenvalues[k];
    let v = eig.eigenvectors.column(k).into_owned();
    let residual = (&h * &v - &v * e).norm();
    (e, to_entries(dets, v.as_slice()), residual, 0)
}

fn seeded_start(dim: usize, hf_index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..dim).map(|_| 1e-3 * (rng.gen::<f64>() - 0.5)).collect();
    v[hf_index] = 1.0;
    v
}

fn direct_fci(ints: &IntegralSet, settings: &LanczosSettings) -> Result<Solved> {
    let mut ci = DirectCi::new(ints, ints.n_alpha(), ints.n_beta());
    let dim = ci.dim();
    // strings are ascending, so index 0 is the lowest-orbital occupation
    let start = seeded_start(dim, 0);
    let pair = lanczos::lowest_eigenpair(dim, |x, y| ci.matvec(x, y), start, settings)?;
    let nb = ci.beta.len();
    let n_qubits = ints.n_qubits();
    let mut entries = Vec::with_capacity(dim);
    for ia in 0..ci.alpha.len() {
        for ib in 0..nb {
            let sign = ci.interleave_sign(ci.alpha[ia], ci.beta[ib]);
            let c = Configuration::new(ci.interleaved_bits(ia, ib), n_qubits)?;
            entries.push((c, num_complex::Complex64::new(sign * pair.vector[ia * nb + ib], 0.0)));
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    Ok((pair.value, entries, pair.residual, pair.matvecs))
}

fn sparse(ints: &IntegralSet, space: &CiSpace, settings: &LanczosSettings) -> Result<Solved> {
    let dets = &space.determinants;
    let index: HashMap<u64, usize> = dets.iter().enumerate().map(|(i, c)| (c.bits(), i)).collect();
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(dets.len());
    let mut buf = Vec::new();
    for c in dets {
        let mut row = vec![(index[&c.bits()] as u32, element_bits(ints, c.bits(), c.bits()))];
        excitations(c.bits(), c.len(), &mut buf);
        for b in &buf {
            if let Some(&j) = index.get(b) {
                let v = element_bits(ints, c.bits(), *b);
                if v != 0.0 {
                    row.push((j as u32, v));
                }
            }
        }
        rows.push(row);
    }
    let hf = index[&space.reference.bits()];
    let pair = lanczos::lowest_eigenpair(
        dets.len(),
        |x, y| {
            for (i, row) in rows.iter().enumerate() {
                y[i] = row.iter().map(|&(j, v)| v * x[j as usize]).sum();
            }
        },
        seeded_start(dets.len(), hf),
        settings,
    )?;
    Ok((pair.value, to_entries(dets, &pair.vector), pair.residual, pair.matvecs))
}
