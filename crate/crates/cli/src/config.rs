//! Run configuration: a JSON file with every knob of the pipeline, which
//! command-line flags may override.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nqsvqe::extraction::{McSettings, DEFAULT_CUTOFF};
use nqsvqe::integrals::{apply_active_space, read_fcidump, ActiveSpace, IntegralSet};
use nqsvqe::nnqs::ModelConfig;
use nqsvqe::training::{PretrainSettings, VmcSettings};
use nqsvqe::vqe::{AnsatzKind, VqeSettings};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveSpaceSpec {
    /// Freeze the `k` lowest orbitals.
    FreezeLowest(usize),
    /// Explicit frozen and active orbital lists.
    Explicit { frozen: Vec<usize>, active: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnsatzChoice {
    pub kind: AnsatzKind,
    pub layers: usize,
}

impl Default for AnsatzChoice {
    fn default() -> Self {
        Self { kind: AnsatzKind::Uccsd, layers: 1 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExtractMethod {
    #[default]
    Full,
    Mc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractSettings {
    pub method: ExtractMethod,
    /// Magnitude below which full extraction drops an entry.
    pub cutoff: f64,
    pub mc: McSettings,
}

impl Default for ExtractSettings {
    fn default() -> Self {
        Self { method: ExtractMethod::Full, cutoff: DEFAULT_CUTOFF, mc: McSettings::default() }
    }
}

/// Transformer and phase-network widths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelWidths {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub phase_hidden: Vec<usize>,
}

impl Default for ModelWidths {
    fn default() -> Self {
        let c = ModelConfig::new(1, (0, 0));
        Self { d_model: c.d_model, n_heads: c.n_heads, n_layers: c.n_layers, d_ff: c.d_ff, phase_hidden: c.phase_hidden }
    }
}

impl ModelWidths {
    pub fn config(&self, n_orb: usize, sector: (usize, usize)) -> ModelConfig {
        ModelConfig {
            n_orb,
            d_model: self.d_model,
            n_heads: self.n_heads,
            n_layers: self.n_layers,
            d_ff: self.d_ff,
            phase_hidden: self.phase_hidden.clone(),
            sector,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    pub vqe: u64,
    pub model: u64,
    pub vmc: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub fcidump: Option<PathBuf>,
    pub active_space: Option<ActiveSpaceSpec>,
    pub tailor_threshold: f64,
    pub ansatz: AnsatzChoice,
    pub vqe: VqeSettings,
    pub extract: ExtractSettings,
    pub model: ModelWidths,
    pub pretrain: PretrainSettings,
    pub vmc: VmcSettings,
    pub seeds: Seeds,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a config file, or the `config` block of a run manifest.
    /// Relative paths inside are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        let mut cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.fcidump, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Range checks on every knob; a given FCIDUMP must exist.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if let Some(p) = &self.fcidump {
            if !p.is_file() {
                return bad(format!("FCIDUMP {} does not exist", p.display()));
            }
        }
        if !(self.tailor_threshold >= 0.0) {
            return bad(format!("tailor threshold {} must be non-negative", self.tailor_threshold));
        }
        if self.ansatz.layers == 0 {
            return bad("ansatz layers must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if !(self.extract.cutoff >= 0.0) {
            return bad(format!("extraction cutoff {} must be non-negative", self.extract.cutoff));
        }
        if self.extract.mc.steps == 0 || !(self.extract.mc.temperature > 0.0) {
            return bad("Monte Carlo extraction needs steps ≥ 1 and a positive temperature".into());
        }
        for (name, lr) in [("vqe", self.vqe.adam.lr), ("pretrain", self.pretrain.adam.lr), ("vmc", self.vmc.adam.lr)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return bad(format!("{name} learning rate {lr} must be positive"));
            }
        }
        if self.vqe.group_size == Some(0) {
            return bad("vqe group size must be at least 1".into());
        }
        if self.vmc.n_samples == 0 || self.vmc.eval_every == 0 || self.vmc.patience == 0 {
            return bad("vmc n_samples, eval_every and patience must be positive".into());
        }
        if !(self.vmc.target_gap > 0.0) {
            return bad("vmc target gap must be positive".into());
        }
        if matches!(self.vmc.clip, Some(c) if !(c > 0.0)) {
            return bad("vmc clip width must be positive".into());
        }
        if !(self.pretrain.phase_weight >= 0.0) {
            return bad("pretrain phase weight must be non-negative".into());
        }
        self.model
            .config(1, (0, 0))
            .validate()
            .map_err(|e| CliError::Usage(format!("model: {e}")))?;
        Ok(())
    }

    pub fn integrals(&self) -> Result<IntegralSet, CliError> {
        let path = self
            .fcidump
            .as_ref()
            .ok_or_else(|| CliError::Usage("no FCIDUMP given (use --fcidump or the config's \"fcidump\")".into()))?;
        let ints = read_fcidump(path)?;
        let Some(spec) = &self.active_space else {
            return Ok(ints);
        };
        let space = match spec {
            ActiveSpaceSpec::FreezeLowest(k) => ActiveSpace::freeze_lowest(&ints, *k)?,
            ActiveSpaceSpec::Explicit { frozen, active } => ActiveSpace::new(&ints, frozen.clone(), active.clone())?,
        };
        Ok(apply_active_space(&ints, &space)?)
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("no output directory given (use --out)".into()))
    }
}
