use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extraction::{Configuration, WavefunctionTable};
use crate::integrals::QubitHamiltonian;
use crate::nnqs::ModelParams;

/// Anything that assigns amplitudes to configurations.
pub trait Amplitudes {
    fn n_qubits(&self) -> usize;
    fn amplitudes(&self, configs: &[Configuration]) -> Result<Vec<Complex64>>;
}

impl Amplitudes for ModelParams {
    fn n_qubits(&self) -> usize {
        self.config().n_qubits()
    }

    fn amplitudes(&self, configs: &[Configuration]) -> Result<Vec<Complex64>> {
        ModelParams::amplitudes(self, configs)
    }
}

/// Configurations absent from the table have amplitude zero.
impl Amplitudes for WavefunctionTable {
    fn n_qubits(&self) -> usize {
        self.meta.n_qubits
    }

    fn amplitudes(&self, configs: &[Configuration]) -> Result<Vec<Complex64>> {
        let map = self.to_map();
        Ok(configs.iter().map(|c| map.get(c).copied().unwrap_or_default()).collect())
    }
}

const ALPHA: u64 = 0x5555_5555_5555_5555;

/// Pauli terms grouped by the bits they flip, for fast row access.
#[derive(Clone, Debug)]
pub struct Connections {
    n_qubits: usize,
    groups: Vec<(u64, Vec<(u64, Complex64)>)>,
}

impl Connections {
    pub fn new(h: &QubitHamiltonian) -> Self {
        let mut map: HashMap<u64, Vec<(u64, Complex64)>> = HashMap::new();
        for t in &h.terms {
            let (_, phase) = t.word.apply_to_basis(0);
            map.entry(t.word.x).or_default().push((t.word.z, phase * t.coeff));
        }
        let mut groups: Vec<_> = map.into_iter().collect();
        groups.sort_by_key(|g| g.0);
        Self {
            n_qubits: h.n_qubits,
            groups,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Nonzero `⟨x|H|x'⟩` for every `x'` with the same particle and spin
    /// counts as `x`.
    pub fn row(&self, x: &Configuration) -> Vec<(Configuration, Complex64)> {
        let b = x.bits();
        let mut out = Vec::new();
        for (flip, terms) in &self.groups {
            let b2 = b ^ flip;
            if (b2 & ALPHA).count_ones() != (b & ALPHA).count_ones()
                || (b2 & !ALPHA).count_ones() != (b & !ALPHA).count_ones()
            {
                continue;
            }
            // ⟨x'|H|x⟩, conjugated below
            let mut v = Complex64::default();
            for &(z, c) in terms {
                if (z & b).count_ones() % 2 == 1 {
                    v -= c;
                } else {
                    v += c;
                }
            }
            if v != Complex64::default() {
                out.push((Configuration::from_bits(b2, x.len()), v.conj()));
            }
        }
        out
    }
}

/// `E_loc(x) = Σ_{x'} ⟨x|H|x'⟩ ψ(x')/ψ(x)`.
pub fn local_energy(psi: &dyn Amplitudes, x: &Configuration, h: &QubitHamiltonian) -> Result<Complex64> {
    Ok(local_energies(psi, std::slice::from_ref(x), h)?[0])
}

/// Local energies of a batch, scoring all connected configurations at once.
pub fn local_energies(psi: &dyn Amplitudes, xs: &[Configuration], h: &QubitHamiltonian) -> Result<Vec<Complex64>> {
    if h.n_qubits != psi.n_qubits() {
        return Err(Error::domain(format!(
            "Hamiltonian on {} qubits for a {}-qubit wavefunction",
            h.n_qubits,
            psi.n_qubits()
        )));
    }
    let conn = Connections::new(h);
    let rows: Vec<_> = xs.iter().map(|x| conn.row(x)).collect();
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let mut needed = Vec::new();
    for x in xs.iter().chain(rows.iter().flatten().map(|(c, _)| c)) {
        index.entry(*x).or_insert_with(|| {
            needed.push(*x);
            needed.len() - 1
        });
    }
    let amps = psi.amplitudes(&needed)?;
    let lookup = |c: &Configuration| amps[index[c]];
    combine(xs, &rows, lookup)
}

pub(crate) fn combine(
    xs: &[Configuration],
    rows: &[Vec<(Configuration, Complex64)>],
    lookup: impl Fn(&Configuration) -> Complex64,
) -> Result<Vec<Complex64>> {
    xs.iter()
        .zip(rows)
        .map(|(x, row)| {
            let a = lookup(x);
            if a == Complex64::default() {
                return Err(Error::ZeroProbability { config: x.to_string() });
            }
            let s: Complex64 = row.iter().map(|(c, v)| v * lookup(c)).sum();
            Ok(s / a)
        })
        .collect()
}
