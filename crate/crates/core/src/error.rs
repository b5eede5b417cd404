//! Error type shared by every module of the engine.

use crate::training::TrainTrace;
use crate::vqe::IterationRecord;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("unsupported parameterized gate: {0}")]
    UnsupportedGate(String),

    #[error("sector dimension {dim} exceeds enumeration limit {limit}; use Monte Carlo extraction")]
    EnumerationLimit { dim: usize, limit: usize },

    #[error("seed configuration {config} has zero amplitude")]
    CannotSeed { config: String },

    #[error("model probability is zero at configuration {config}")]
    ZeroProbability { config: String },

    #[error("every configuration in the batch has zero probability")]
    DegenerateBatch,

    #[error("space of {dim} determinants exceeds capacity {limit}")]
    Capacity { dim: usize, limit: usize },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("VQE optimization diverged after {} iterations", trace.len())]
    VqeDiverged { trace: Vec<IterationRecord> },

    #[error("training diverged after {} recorded evaluations", trace.records.len())]
    TrainDiverged { trace: TrainTrace },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors raised by a numerical procedure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::VqeDiverged { .. }
                | Error::TrainDiverged { .. }
                | Error::DegenerateBatch
                | Error::ZeroProbability { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
