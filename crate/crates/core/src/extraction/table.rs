use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Configuration;
use crate::error::{Error, Result};
use crate::simulator::Statevector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableSource {
    VqeExtractFull,
    VqeExtractMc,
    Fci,
    Cisd,
    ModelDump,
}

impl TableSource {
    /// Sources whose tables are complete normalized vectors.
    fn is_complete(&self) -> bool {
        matches!(self, Self::VqeExtractFull | Self::Fci | Self::Cisd)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub source: TableSource,
    pub n_qubits: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
}

/// Sparse map from configurations to complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct WavefunctionTable {
    pub meta: TableMeta,
    entries: Vec<(Configuration, Complex64)>,
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    config: Configuration,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonHeader {
    meta: TableMeta,
}

const NORM_TOLERANCE: f64 = 1e-10;

impl WavefunctionTable {
    /// Validates sector membership, distinctness and `Σ|c|² ≤ 1`.
    pub fn new(meta: TableMeta, entries: Vec<(Configuration, Complex64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for (c, _) in &entries {
            if c.len() != meta.n_qubits {
                return Err(Error::domain(format!(
                    "configuration {c} does not have {} qubits",
                    meta.n_qubits
                )));
            }
            if !c.in_sector(meta.n_alpha, meta.n_beta) {
                return Err(Error::domain(format!(
                    "configuration {c} is outside sector ({}, {})",
                    meta.n_alpha, meta.n_beta
                )));
            }
            if !seen.insert(*c) {
                return Err(Error::domain(format!("configuration {c} appears twice")));
            }
        }
        let table = Self { meta, entries };
        let norm = table.norm_sqr();
        if norm > 1.0 + NORM_TOLERANCE {
            return Err(Error::domain(format!("table norm² {norm} exceeds 1")));
        }
        Ok(table)
    }

    pub fn entries(&self) -> &[(Configuration, Complex64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    /// Checks the completeness invariant for full extractions and oracle
    /// eigenvectors.
    pub fn check_normalized(&self) -> Result<()> {
        if self.meta.source.is_complete() {
            let n = self.norm_sqr();
            if (n - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::domain(format!(
                    "{:?} table has norm² {n}, expected 1",
                    self.meta.source
                )));
            }
        }
        Ok(())
    }

    /// Rotates the global phase so the largest-magnitude entry is real
    /// positive.
    pub fn gauge_fix(&mut self) {
        let Some(&(_, lead)) = self
            .entries
            .iter()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        else {
            return;
        };
        if lead.norm() == 0.0 {
            return;
        }
        let rot = lead.conj() / lead.norm();
        for (_, c) in &mut self.entries {
            *c *= rot;
        }
        // remove the residual rounding on the pivot itself
        if let Some(e) = self
            .entries
            .iter_mut()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        {
            e.1 = Complex64::new(e.1.norm(), 0.0);
        }
    }

    /// Stable sort by descending magnitude.
    pub fn sort_by_magnitude(&mut self) {
        self.entries
            .sort_by(|a, b| b.1.norm_sqr().total_cmp(&a.1.norm_sqr()));
    }

    pub fn to_map(&self) -> HashMap<Configuration, Complex64> {
        self.entries.iter().copied().collect()
    }

    pub fn get(&self, config: &Configuration) -> Option<Complex64> {
        self.entries
            .iter()
            .find(|(c, _)| c == config)
            .map(|(_, v)| *v)
    }

    /// Embeds the table into a dense statevector (zeros elsewhere).
    pub fn to_statevector(&self) -> Result<Statevector> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << self.meta.n_qubits];
        for (c, v) in &self.entries {
            amps[c.bits() as usize] = *v;
        }
        Statevector::from_amplitudes(self.meta.n_qubits, amps)
    }

    /// JSON lines: a `{"meta": …}` header then one `{"config","re","im"}`
    /// record per entry.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = serde_json::to_string(&JsonHeader {
            meta: self.meta.clone(),
        })?;
        out.push('\n');
        for (c, v) in &self.entries {
            let line = serde_json::to_string(&JsonEntry {
                config: *c,
                re: v.re,
                im: v.im,
            })?;
            let _ = writeln!(out, "{line}");
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: JsonHeader = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::domain("empty wavefunction table file"))?,
        )?;
        let mut entries = Vec::new();
        for line in lines {
            let e: JsonEntry = serde_json::from_str(line)?;
            entries.push((e.config, Complex64::new(e.re, e.im)));
        }
        Self::new(header.meta, entries)
    }
}
