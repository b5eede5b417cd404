use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{Layout, Slot};
use super::ModelConfig;
use crate::error::{Error, Result};

const INIT_STD: f64 = 0.02;

/// Flat parameter vector of a model together with its shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    config: ModelConfig,
    pub(crate) layout: Layout,
    values: Vec<f64>,
}

impl ModelParams {
    /// Seeded initialisation: weights and embeddings from `N(0, 0.02²)`,
    /// zero biases, unit layer-norm gains. Hidden phase layers draw from
    /// `N(0, 1/fan_in)`.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = config.layout();
        let mut values = vec![0.0; layout.total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, INIT_STD).expect("positive deviation");
        let mut fill = |s: Slot, values: &mut [f64]| {
            for v in &mut values[s.range()] {
                *v = normal.sample(&mut rng);
            }
        };
        fill(layout.token_embedding, &mut values);
        fill(layout.position_embedding, &mut values);
        let ones = |s: Slot, values: &mut [f64]| values[s.range()].fill(1.0);
        for l in &layout.layers {
            ones(l.ln1.0, &mut values);
            ones(l.ln2.0, &mut values);
            for (w, _) in [l.qkv, l.proj, l.ff1, l.ff2] {
                fill(w, &mut values);
            }
        }
        ones(layout.ln_final.0, &mut values);
        fill(layout.head.0, &mut values);
        // Hidden phase layers use fan-in scaling so the network starts
        // nonlinear in the occupations; the output layer is small but not
        // zero, since a constant phase makes every local energy real and
        // the phase gradient vanish.
        let last = layout.phase.len() - 1;
        for (i, (w, _)) in layout.phase.iter().enumerate() {
            let std = if i < last { 1.0 / (w.rows as f64).sqrt() } else { INIT_STD };
            let normal = Normal::new(0.0, std).expect("positive deviation");
            for v in &mut values[w.range()] {
                *v = normal.sample(&mut rng);
            }
        }
        Ok(Self { config, layout, values })
    }

    pub fn from_values(config: ModelConfig, values: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = config.layout();
        if values.len() != layout.total {
            return Err(Error::Shape {
                op: "model parameters",
                detail: format!("{} values for a model with {}", values.len(), layout.total),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("model parameters contain non-finite values"));
        }
        Ok(Self { config, layout, values })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access for optimisers; callers keep the values finite.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the bias feeding the `k`-th phase output.
    pub fn phase_output_bias(&self, k: usize) -> usize {
        self.layout.phase.last().expect("phase head").1.offset + k
    }

    /// Checkpoint bytes: little-endian `u64` header length, the
    /// configuration as JSON, then every parameter as a little-endian `f64`.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.config)?;
        let mut out = Vec::with_capacity(8 + header.len() + 8 * self.values.len());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let truncated = || Error::Parse {
            line: 0,
            msg: "truncated checkpoint".into(),
        };
        let len_bytes: [u8; 8] = bytes.get(..8).ok_or_else(truncated)?.try_into().expect("8 bytes");
        let len = u64::from_le_bytes(len_bytes) as usize;
        let header = bytes.get(8..8 + len).ok_or_else(truncated)?;
        let config: ModelConfig = serde_json::from_slice(header)?;
        let body = &bytes[8 + len..];
        if body.len() % 8 != 0 {
            return Err(truncated());
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::from_values(config, values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)?.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}
