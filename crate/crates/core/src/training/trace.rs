use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How recorded energies were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    ExactEval,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub step: usize,
    pub energy: f64,
    pub variance: f64,
    pub grad_norm: f64,
    pub unique_samples: usize,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub mode: EvalMode,
    pub records: Vec<TrainRecord>,
}

const HEADER: &str = "step,energy,variance,grad_norm,unique_samples,wall_ms";

impl TrainTrace {
    pub fn new(mode: EvalMode) -> Self {
        Self {
            mode,
            records: Vec::new(),
        }
    }

    /// First recorded step whose energy lies within `gap` of `reference`.
    pub fn steps_to_accuracy(&self, reference: f64, gap: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| (r.energy - reference).abs() < gap)
            .map(|r| r.step)
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.records.last().map(|r| r.energy)
    }

    pub fn best_energy(&self) -> Option<f64> {
        self.records.iter().map(|r| r.energy).reduce(f64::min)
    }

    /// Energies are written with full round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?},{},{}",
                r.step, r.energy, r.variance, r.grad_norm, r.unique_samples, r.wall_ms
            );
        }
        out
    }

    pub fn from_csv(text: &str, mode: EvalMode) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("expected header {HEADER:?}"),
                })
            }
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad("expected 6 fields"));
            }
            let num = |k: usize| f[k].trim().parse::<f64>().map_err(|e| bad(&e.to_string()));
            let int = |k: usize| f[k].trim().parse::<u64>().map_err(|e| bad(&e.to_string()));
            records.push(TrainRecord {
                step: int(0)? as usize,
                energy: num(1)?,
                variance: num(2)?,
                grad_norm: num(3)?,
                unique_samples: int(4)? as usize,
                wall_ms: int(5)?,
            });
        }
        Ok(Self { mode, records })
    }
}
