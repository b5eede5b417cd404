use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::local::{combine, Connections};
use crate::error::{Error, Result};
use crate::extraction::{enumerate_sector, sector_dimension, Configuration};
use crate::integrals::QubitHamiltonian;
use crate::nnqs::{Forward, ModelParams, SampleBatch, ENUMERATION_LIMIT};

const SHARD: usize = 64;

/// Where the expectation values are taken.
#[derive(Clone, Copy, Debug)]
pub enum Estimate<'a> {
    /// Weighted by multiplicity over a sampled batch. With `clip = Some(k)`
    /// the local energies entering the gradient are pulled to within `k`
    /// mean absolute deviations of their median; the reported energy is
    /// never clipped.
    Sampled { batch: &'a SampleBatch, clip: Option<f64> },
    /// Weighted by the exact `p(x)` over the whole sector.
    Exact,
}

/// Clips `values` (weighted by `weights`) around their weighted median.
fn clip_local_energies(values: &mut [Complex64], weights: &[f64], width: f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));
    let mut acc = 0.0;
    let mut median = values[order[0]].re;
    for &i in &order {
        acc += weights[i];
        if acc >= 0.5 {
            median = values[i].re;
            break;
        }
    }
    let center = Complex64::new(median, 0.0);
    let mad: f64 = values.iter().zip(weights).map(|(v, w)| w * (v - center).norm()).sum();
    let limit = width * mad;
    for v in values.iter_mut() {
        let d = *v - center;
        if d.norm() > limit {
            *v = center + d * (limit / d.norm());
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyGradient {
    /// `Re⟨E_loc⟩` in hartree.
    pub energy: f64,
    pub variance: f64,
    pub grad: Vec<f64>,
    /// Distinct configurations carrying weight.
    pub unique: usize,
}

impl EnergyGradient {
    pub fn grad_norm(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

pub(crate) fn sector_configs(params: &ModelParams) -> Result<Vec<Configuration>> {
    let cfg = params.config();
    let dim = sector_dimension(cfg.n_orb, cfg.sector.0, cfg.sector.1);
    if dim > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            dim,
            limit: ENUMERATION_LIMIT,
        });
    }
    enumerate_sector(cfg.n_orb, cfg.sector.0, cfg.sector.1)
}

/// Energy and VMC gradient
/// `2·Re⟨(E_loc − ⟨E_loc⟩)·conj(∂ ln ψ)⟩` with `ln ψ = ½ log p + iφ`.
///
/// A non-finite energy comes back with a NaN gradient.
pub fn energy_and_gradient(params: &ModelParams, estimate: Estimate<'_>, h: &QubitHamiltonian) -> Result<EnergyGradient> {
    energy_and_gradient_with(params, estimate, &Connections::new(h))
}

pub(crate) fn energy_and_gradient_with(
    params: &ModelParams,
    estimate: Estimate<'_>,
    conn: &Connections,
) -> Result<EnergyGradient> {
    if conn.n_qubits() != params.config().n_qubits() {
        return Err(Error::domain(format!(
            "Hamiltonian on {} qubits for a {}-qubit model",
            conn.n_qubits(),
            params.config().n_qubits()
        )));
    }
    let (configs, counts, clip) = match estimate {
        Estimate::Sampled { batch, clip } => {
            if batch.is_empty() {
                return Err(Error::domain("empty sample batch"));
            }
            let counts = batch.entries.iter().map(|s| s.count as f64).collect::<Vec<_>>();
            (batch.configs(), Some(counts), clip)
        }
        Estimate::Exact => (sector_configs(params)?, None, None),
    };
    let forwards: Vec<Forward> = configs
        .par_chunks(SHARD)
        .map(|chunk| params.forward(chunk))
        .collect::<Result<_>>()?;
    let log_probs: Vec<f64> = forwards.iter().flat_map(|f| f.log_probs().to_vec()).collect();
    let phases: Vec<f64> = forwards.iter().flat_map(|f| f.phases().to_vec()).collect();
    let psi: Vec<Complex64> = log_probs
        .iter()
        .zip(&phases)
        .map(|(&lp, &ph)| Complex64::from_polar((0.5 * lp).exp(), ph))
        .collect();

    let live: Vec<usize> = (0..configs.len()).filter(|&i| psi[i] != Complex64::default()).collect();
    let mut weights = vec![0.0; configs.len()];
    match &counts {
        Some(c) => {
            let total: f64 = live.iter().map(|&i| c[i]).sum();
            for &i in &live {
                weights[i] = c[i] / total;
            }
        }
        None => {
            for &i in &live {
                weights[i] = psi[i].norm_sqr();
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
        }
    }
    if live.is_empty() {
        return Err(Error::DegenerateBatch);
    }

    let live_configs: Vec<Configuration> = live.iter().map(|&i| configs[i]).collect();
    let rows: Vec<_> = live_configs.par_iter().map(|x| conn.row(x)).collect();
    let mut known: HashMap<Configuration, Complex64> = configs.iter().copied().zip(psi.iter().copied()).collect();
    if counts.is_some() {
        let mut missing: Vec<Configuration> = rows
            .iter()
            .flatten()
            .map(|(c, _)| *c)
            .filter(|c| !known.contains_key(c))
            .collect();
        missing.sort();
        missing.dedup();
        if !missing.is_empty() {
            let amps = params.amplitudes(&missing)?;
            known.extend(missing.into_iter().zip(amps));
        }
    }
    // exact mode: every connected in-sector configuration is in `known`
    let e_loc = combine(&live_configs, &rows, |c| known.get(c).copied().unwrap_or_default())?;

    let mean: Complex64 = live.iter().zip(&e_loc).map(|(&i, e)| weights[i] * e).sum();
    let variance: f64 = live.iter().zip(&e_loc).map(|(&i, e)| weights[i] * (e - mean).norm_sqr()).sum();
    if !mean.re.is_finite() || !variance.is_finite() {
        // reported to the caller instead of seeding a backward pass with NaN
        return Ok(EnergyGradient {
            energy: mean.re,
            variance,
            grad: vec![f64::NAN; params.len()],
            unique: live.len(),
        });
    }
    let mut for_grad = e_loc;
    let mut grad_mean = mean;
    if let Some(width) = clip {
        let w: Vec<f64> = live.iter().map(|&i| weights[i]).collect();
        clip_local_energies(&mut for_grad, &w, width);
        grad_mean = live.iter().zip(&for_grad).map(|(&i, e)| weights[i] * e).sum();
    }
    let mut d_lp = vec![0.0; configs.len()];
    let mut d_ph = vec![0.0; configs.len()];
    for (&i, e) in live.iter().zip(&for_grad) {
        let delta = e - grad_mean;
        d_lp[i] = weights[i] * delta.re;
        d_ph[i] = 2.0 * weights[i] * delta.im;
    }
    let partial: Vec<Vec<f64>> = forwards
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let r = k * SHARD..(k * SHARD + f.log_probs().len());
            f.gradient(&d_lp[r.clone()], &d_ph[r])
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; params.len()];
    for p in &partial {
        for (g, v) in grad.iter_mut().zip(p) {
            *g += v;
        }
    }
    Ok(EnergyGradient {
        energy: mean.re,
        variance,
        grad,
        unique: live.len(),
    })
}

/// `⟨ψ|H|ψ⟩` by summation over the whole sector.
pub fn exact_energy(params: &ModelParams, h: &QubitHamiltonian) -> Result<f64> {
    Ok(exact_stats_with(params, &Connections::new(h))?.0)
}

/// Full-sector energy and local-energy variance.
pub(crate) fn exact_stats_with(params: &ModelParams, conn: &Connections) -> Result<(f64, f64)> {
    let configs = sector_configs(params)?;
    let amps = params.amplitudes(&configs)?;
    let known: HashMap<Configuration, Complex64> = configs.iter().copied().zip(amps.iter().copied()).collect();
    let h_psi: Vec<Complex64> = configs
        .par_iter()
        .map(|x| {
            conn.row(x)
                .iter()
                .map(|(c, v)| v * known.get(c).copied().unwrap_or_default())
                .sum()
        })
        .collect();
    let den: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::DegenerateBatch);
    }
    let energy = amps.iter().zip(&h_psi).map(|(a, hx)| a.conj() * hx).sum::<Complex64>().re / den;
    let variance = amps
        .iter()
        .zip(&h_psi)
        .filter(|(a, _)| a.norm_sqr() > 0.0)
        .map(|(a, hx)| a.norm_sqr() / den * (hx / a - energy).norm_sqr())
        .sum();
    Ok((energy, variance))
}
