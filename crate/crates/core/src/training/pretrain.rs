use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::{Configuration, WavefunctionTable};
use crate::nnqs::{Forward, ModelParams};
use crate::vqe::{Adam, AdamSettings};

const SHARD: usize = 64;

/// Normalized probabilities and phases of a table's support.
#[derive(Clone, Debug, PartialEq)]
pub struct PretrainTarget {
    pub configs: Vec<Configuration>,
    pub probs: Vec<f64>,
    pub phases: Vec<f64>,
}

impl PretrainTarget {
    pub fn new(table: &WavefunctionTable) -> Result<Self> {
        let kept: Vec<_> = table.entries().iter().filter(|(_, c)| c.norm_sqr() > 0.0).collect();
        let total: f64 = kept.iter().map(|(_, c)| c.norm_sqr()).sum();
        if kept.is_empty() || total == 0.0 {
            return Err(Error::domain("pretraining target is empty"));
        }
        Ok(Self {
            configs: kept.iter().map(|(x, _)| *x).collect(),
            probs: kept.iter().map(|(_, c)| c.norm_sqr() / total).collect(),
            phases: kept.iter().map(|(_, c)| c.arg()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PretrainSettings {
    pub max_epochs: usize,
    pub adam: AdamSettings,
    /// Weight of the phase term.
    pub phase_weight: f64,
    /// Epochs without an improvement of `min_improvement` before stopping.
    pub patience: usize,
    pub min_improvement: f64,
}

impl Default for PretrainSettings {
    fn default() -> Self {
        Self {
            max_epochs: 2000,
            adam: AdamSettings::with_lr(1e-3),
            phase_weight: 1.0,
            patience: 20,
            min_improvement: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretrainRecord {
    pub epoch: usize,
    pub loss: f64,
    pub kl: f64,
    pub phase_loss: f64,
    pub grad_norm: f64,
    pub wall_ms: u64,
}

/// `KL(q‖p) + λ·Σ q (1 − cos(φ − arg c))` over the target support, and its
/// gradient.
pub fn pretrain_loss(params: &ModelParams, target: &PretrainTarget, phase_weight: f64) -> Result<(f64, f64, Vec<f64>)> {
    let cfg = params.config();
    if let Some(bad) = target.configs.iter().find(|c| !c.in_sector(cfg.sector.0, cfg.sector.1)) {
        return Err(Error::domain(format!("target configuration {bad} is outside the model sector")));
    }
    let forwards: Vec<Forward> = target
        .configs
        .par_chunks(SHARD)
        .map(|chunk| params.forward(chunk))
        .collect::<Result<_>>()?;
    let lp: Vec<f64> = forwards.iter().flat_map(|f| f.log_probs().to_vec()).collect();
    let ph: Vec<f64> = forwards.iter().flat_map(|f| f.phases().to_vec()).collect();
    let mut kl = 0.0;
    let mut phase_loss = 0.0;
    let mut d_lp = vec![0.0; lp.len()];
    let mut d_ph = vec![0.0; lp.len()];
    for i in 0..lp.len() {
        let q = target.probs[i];
        let diff = ph[i] - target.phases[i];
        kl += q * (q.ln() - lp[i]);
        phase_loss += q * (1.0 - diff.cos());
        d_lp[i] = -q;
        d_ph[i] = phase_weight * q * diff.sin();
    }
    let partial: Vec<Vec<f64>> = forwards
        .par_iter()
        .enumerate()
        .map(|(k, f)| {
            let r = k * SHARD..k * SHARD + f.log_probs().len();
            f.gradient(&d_lp[r.clone()], &d_ph[r])
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; params.len()];
    for p in &partial {
        for (g, v) in grad.iter_mut().zip(p) {
            *g += v;
        }
    }
    Ok((kl, phase_loss, grad))
}

/// Fits the model to a target table with full-support batches; returns the
/// parameters of the lowest-loss epoch.
pub fn pretrain(
    params: &ModelParams,
    target: &PretrainTarget,
    settings: &PretrainSettings,
) -> Result<(ModelParams, Vec<PretrainRecord>)> {
    if target.is_empty() {
        return Err(Error::domain("pretraining target is empty"));
    }
    let start = Instant::now();
    let mut current = params.clone();
    let mut best = (f64::INFINITY, params.clone());
    let mut adam = Adam::new(params.len(), settings.adam);
    let mut records = Vec::new();
    let mut stale = 0;
    for epoch in 0..=settings.max_epochs {
        let (kl, phase_loss, grad) = pretrain_loss(&current, target, settings.phase_weight)?;
        let loss = kl + settings.phase_weight * phase_loss;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !loss.is_finite() || !grad_norm.is_finite() {
            return Err(Error::domain(format!("pretraining loss became non-finite at epoch {epoch}")));
        }
        records.push(PretrainRecord {
            epoch,
            loss,
            kl,
            phase_loss,
            grad_norm,
            wall_ms: start.elapsed().as_millis() as u64,
        });
        if loss < best.0 - settings.min_improvement {
            stale = 0;
        } else {
            stale += 1;
        }
        if loss < best.0 {
            best = (loss, current.clone());
        }
        if stale >= settings.patience || epoch == settings.max_epochs {
            break;
        }
        adam.step(current.values_mut(), &grad);
    }
    Ok((best.1, records))
}
