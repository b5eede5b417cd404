use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Configuration, TableMeta, TableSource, WavefunctionTable};
use crate::error::{Error, Result};
use crate::integrals::QubitHamiltonian;
use crate::simulator::Statevector;

/// Knobs of the accept/reject walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McSettings {
    pub steps: usize,
    /// Metropolis temperature for uphill moves, hartree.
    pub temperature: f64,
    pub seed: u64,
    /// Proposals with `|c|` below this are rejected outright.
    pub cutoff: f64,
    /// Consecutive small-change additions that end the walk.
    pub patience: usize,
    pub energy_tol: f64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            steps: 5000,
            temperature: 0.01,
            seed: 0,
            cutoff: super::DEFAULT_CUTOFF,
            patience: 50,
            energy_tol: 1e-6,
        }
    }
}

/// One accepted addition to the table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEvent {
    pub step: usize,
    pub config: Configuration,
    pub energy: f64,
    pub downhill: bool,
}

#[derive(Clone, Debug)]
pub struct McExtraction {
    pub table: WavefunctionTable,
    /// Rayleigh quotient of the final table.
    pub energy: f64,
    pub history: Vec<McEvent>,
    pub steps_taken: usize,
}

/// Incremental Rayleigh quotient `⟨c|H|c⟩ / ⟨c|c⟩` over a growing support.
struct Accumulator<'a> {
    h: &'a QubitHamiltonian,
    coeffs: HashMap<u64, Complex64>,
    order: Vec<Configuration>,
    numerator: f64,
    denominator: f64,
}

impl<'a> Accumulator<'a> {
    fn energy(&self) -> f64 {
        self.numerator / self.denominator
    }

    /// Numerator and denominator after adding `x` with amplitude `a`.
    fn candidate(&self, x: u64, a: Complex64) -> (f64, f64) {
        // Σ_i ⟨x|H|i⟩ c_i over the current support, plus the diagonal
        let mut coupling = Complex64::new(0.0, 0.0);
        let mut diag = 0.0;
        for (y, amp) in self.h.apply_to_basis(x) {
            if y == x {
                diag += amp.re;
            } else if let Some(c) = self.coeffs.get(&y) {
                coupling += amp.conj() * c;
            }
        }
        let num = self.numerator + 2.0 * (a.conj() * coupling).re + diag * a.norm_sqr();
        (num, self.denominator + a.norm_sqr())
    }

    fn push(&mut self, c: Configuration, a: Complex64, num: f64, den: f64) {
        self.coeffs.insert(c.bits(), a);
        self.order.push(c);
        self.numerator = num;
        self.denominator = den;
    }
}

/// Relocates one α electron, one β electron, or one of each, uniformly among
/// the moves the occupation allows.
fn propose(x: &Configuration, rng: &mut ChaCha8Rng) -> Option<Configuration> {
    let n_orb = x.len() / 2;
    let spin_move = |bits: u64, spin: usize, rng: &mut ChaCha8Rng| -> Option<u64> {
        let occ: Vec<usize> = (0..n_orb).filter(|p| bits >> (2 * p + spin) & 1 == 1).collect();
        if occ.is_empty() || occ.len() == n_orb {
            return None;
        }
        let virt: Vec<usize> = (0..n_orb).filter(|p| bits >> (2 * p + spin) & 1 == 0).collect();
        let i = occ[rng.gen_range(0..occ.len())];
        let a = virt[rng.gen_range(0..virt.len())];
        Some(bits ^ (1 << (2 * i + spin)) ^ (1 << (2 * a + spin)))
    };
    let can = |spin: usize| {
        let n = if spin == 0 { x.n_alpha() } else { x.n_beta() };
        n > 0 && n < n_orb
    };
    let mut kinds = Vec::with_capacity(3);
    if can(0) {
        kinds.push(0);
    }
    if can(1) {
        kinds.push(1);
    }
    if kinds.len() == 2 {
        kinds.push(2);
    }
    if kinds.is_empty() {
        return None;
    }
    let bits = match kinds[rng.gen_range(0..kinds.len())] {
        0 => spin_move(x.bits(), 0, rng)?,
        1 => spin_move(x.bits(), 1, rng)?,
        _ => {
            let b = spin_move(x.bits(), 0, rng)?;
            spin_move(b, 1, rng)?
        }
    };
    Some(Configuration::from_bits(bits, x.len()))
}

/// Grows a table of important configurations by a seeded accept/reject walk
/// starting at the Hartree–Fock configuration.
///
/// A proposal is accepted when the Rayleigh quotient of the enlarged table
/// drops, otherwise with probability `exp(−ΔE/T)`. The walk stops after
/// `steps` proposals or once `patience` consecutive additions each move the
/// energy by less than `energy_tol`.
pub fn extract_mc(
    state: &Statevector,
    sector: (usize, usize),
    h: &QubitHamiltonian,
    e_hf: f64,
    settings: &McSettings,
) -> Result<McExtraction> {
    let n_qubits = state.n_qubits();
    if h.n_qubits != n_qubits || n_qubits % 2 != 0 {
        return Err(Error::domain(format!(
            "Hamiltonian on {} qubits for a {n_qubits}-qubit state",
            h.n_qubits
        )));
    }
    if !(settings.temperature > 0.0) {
        return Err(Error::domain("temperature must be positive"));
    }
    if settings.steps == 0 {
        return Err(Error::domain("steps must be at least 1"));
    }
    let hf = Configuration::hartree_fock(n_qubits / 2, sector.0, sector.1)?;
    let a0 = state.amplitude(&hf)?;
    if a0.norm() == 0.0 {
        return Err(Error::CannotSeed {
            config: hf.to_string(),
        });
    }
    let mut acc = Accumulator {
        h,
        coeffs: HashMap::new(),
        order: Vec::new(),
        numerator: e_hf * a0.norm_sqr(),
        denominator: a0.norm_sqr(),
    };
    acc.coeffs.insert(hf.bits(), a0);
    acc.order.push(hf);

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut walker = hf;
    let mut history = Vec::new();
    let mut calm = 0usize;
    let mut steps_taken = 0;
    for step in 0..settings.steps {
        steps_taken = step + 1;
        let Some(x) = propose(&walker, &mut rng) else {
            break;
        };
        if acc.coeffs.contains_key(&x.bits()) {
            walker = x;
            continue;
        }
        let a = state.amps()[x.bits() as usize];
        if a.norm() < settings.cutoff {
            continue;
        }
        let current = acc.energy();
        let (num, den) = acc.candidate(x.bits(), a);
        let proposed = num / den;
        let delta = proposed - current;
        let downhill = delta < 0.0;
        // uniform draw taken every step so the stream does not depend on ΔE
        let u: f64 = rng.gen();
        if downhill || u < (-delta / settings.temperature).exp() {
            acc.push(x, a, num, den);
            walker = x;
            history.push(McEvent {
                step,
                config: x,
                energy: proposed,
                downhill,
            });
            if delta.abs() < settings.energy_tol {
                calm += 1;
                if calm >= settings.patience {
                    break;
                }
            } else {
                calm = 0;
            }
        }
    }
    let energy = acc.energy();
    let entries = acc
        .order
        .iter()
        .map(|c| (*c, acc.coeffs[&c.bits()]))
        .collect();
    let mut table = WavefunctionTable::new(
        TableMeta {
            source: TableSource::VqeExtractMc,
            n_qubits,
            n_alpha: sector.0,
            n_beta: sector.1,
        },
        entries,
    )?;
    table.sort_by_magnitude();
    table.gauge_fix();
    Ok(McExtraction {
        table,
        energy,
        history,
        steps_taken,
    })
}
