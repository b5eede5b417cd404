use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::estimator::{energy_and_gradient_with, exact_stats_with, Estimate};
use super::local::Connections;
use super::trace::{EvalMode, TrainRecord, TrainTrace};
use crate::error::{Error, Result};
use crate::extraction::sector_dimension;
use crate::integrals::QubitHamiltonian;
use crate::nnqs::{ModelParams, ENUMERATION_LIMIT};
use crate::vqe::{Adam, AdamSettings};

/// Source of the expectation values used for each update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientSource {
    #[default]
    Sampled,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VmcSettings {
    pub max_steps: usize,
    pub n_samples: u64,
    pub adam: AdamSettings,
    pub eval_every: usize,
    /// Convergence gap to the oracle energy, in hartree.
    pub target_gap: f64,
    /// Consecutive evaluations inside the gap required to stop.
    pub patience: usize,
    pub gradient: GradientSource,
    /// Record full-sector energies when the sector is enumerable.
    pub exact_eval: bool,
    /// Local-energy clipping width for sampled gradients, in mean absolute
    /// deviations.
    pub clip: Option<f64>,
}

impl Default for VmcSettings {
    fn default() -> Self {
        Self {
            max_steps: 2000,
            n_samples: 4096,
            adam: AdamSettings::with_lr(1e-3),
            eval_every: 25,
            target_gap: 1.6e-3,
            patience: 5,
            gradient: GradientSource::Sampled,
            exact_eval: true,
            clip: None,
        }
    }
}

fn step_seed(seed: u64, step: usize) -> u64 {
    seed ^ (step as u64 + 1).wrapping_mul(0xA24B_AED4_963E_E407)
}

/// Variational Monte Carlo with Adam. Returns the parameters with the
/// lowest recorded energy.
pub fn train_vmc(
    params: &ModelParams,
    h: &QubitHamiltonian,
    settings: &VmcSettings,
    seed: u64,
    oracle_energy: Option<f64>,
) -> Result<(ModelParams, TrainTrace)> {
    if settings.eval_every == 0 || settings.n_samples == 0 {
        return Err(Error::domain("eval_every and n_samples must be positive"));
    }
    let cfg = params.config();
    let conn = Connections::new(h);
    let enumerable = sector_dimension(cfg.n_orb, cfg.sector.0, cfg.sector.1) <= ENUMERATION_LIMIT;
    let exact_eval = settings.exact_eval && enumerable;
    let mode = if exact_eval { EvalMode::ExactEval } else { EvalMode::Sampled };
    let mut trace = TrainTrace::new(mode);
    let start = Instant::now();
    let mut current = params.clone();
    let mut best = (f64::INFINITY, params.clone());
    let mut adam = Adam::new(params.len(), settings.adam);
    let mut inside = 0;
    for step in 0..=settings.max_steps {
        let batch;
        let estimate = match settings.gradient {
            GradientSource::Exact => Estimate::Exact,
            GradientSource::Sampled => {
                batch = current.sample_batch(settings.n_samples, step_seed(seed, step))?;
                Estimate::Sampled {
                    batch: &batch,
                    clip: settings.clip,
                }
            }
        };
        let eg = energy_and_gradient_with(&current, estimate, &conn)?;
        let grad_norm = eg.grad_norm();
        if !eg.energy.is_finite() || !grad_norm.is_finite() {
            return Err(Error::TrainDiverged { trace });
        }
        let last = step == settings.max_steps;
        if step % settings.eval_every == 0 || last {
            let (energy, variance) = match (exact_eval, settings.gradient) {
                (true, GradientSource::Exact) | (false, _) => (eg.energy, eg.variance),
                (true, GradientSource::Sampled) => exact_stats_with(&current, &conn)?,
            };
            if !energy.is_finite() {
                return Err(Error::TrainDiverged { trace });
            }
            trace.records.push(TrainRecord {
                step,
                energy,
                variance,
                grad_norm,
                unique_samples: eg.unique,
                wall_ms: start.elapsed().as_millis() as u64,
            });
            if energy < best.0 {
                best = (energy, current.clone());
            }
            if let Some(e0) = oracle_energy {
                if (energy - e0).abs() < settings.target_gap {
                    inside += 1;
                } else {
                    inside = 0;
                }
                if inside >= settings.patience {
                    break;
                }
            }
        }
        if last {
            break;
        }
        adam.step(current.values_mut(), &eg.grad);
    }
    Ok((best.1, trace))
}
