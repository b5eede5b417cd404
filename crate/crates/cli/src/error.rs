use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Engine(#[from] nqsvqe::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for bad input, 2 when a numerical procedure failed.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Engine(e) if e.is_numerical() => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }

    /// Extra lines for standard error describing how a run failed.
    pub fn diagnostics(&self) -> Vec<String> {
        match self {
            CliError::Engine(nqsvqe::Error::VqeDiverged { trace }) => trace
                .iter()
                .rev()
                .take(5)
                .rev()
                .map(|r| format!("  iteration {} energy {:e} grad_norm {:e}", r.iteration, r.energy, r.grad_norm))
                .collect(),
            CliError::Engine(nqsvqe::Error::TrainDiverged { trace }) => trace
                .records
                .iter()
                .rev()
                .take(5)
                .rev()
                .map(|r| format!("  step {} energy {:e} grad_norm {:e}", r.step, r.energy, r.grad_norm))
                .collect(),
            _ => Vec::new(),
        }
    }
}
