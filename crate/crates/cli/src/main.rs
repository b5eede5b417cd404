//! `nqsvqe`: VQE simulation, configuration extraction, neural-network
//! pretraining and VMC refinement from an FCIDUMP file.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ActiveSpaceSpec, ExtractMethod, RunConfig};
use error::CliError;
use nqsvqe::vqe::AnsatzKind;

#[derive(Parser, Debug)]
#[command(name = "nqsvqe", version, about = "VQE-pretrained neural quantum states for molecular ground states")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; they override the config file.
#[derive(Args, Debug, Default)]
struct Common {
    /// JSON run configuration, or a manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Molecular integrals in FCIDUMP format.
    #[arg(long, global = true)]
    fcidump: Option<PathBuf>,
    /// Freeze the k lowest spatial orbitals.
    #[arg(long, value_name = "K", global = true)]
    freeze_lowest: Option<usize>,
    /// Drop Pauli terms with |coefficient| below this value.
    #[arg(long, global = true)]
    tailor_threshold: Option<f64>,
    #[arg(long, value_enum, global = true)]
    ansatz: Option<AnsatzArg>,
    /// Entangling layers of the hardware-efficient ansatz.
    #[arg(long, global = true)]
    layers: Option<usize>,
    /// Seed for the VQE, the model initialization and the sampler.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AnsatzArg {
    Uccsd,
    Hea,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print qubit-Hamiltonian statistics.
    Inspect,
    /// Exact diagonalization in the full sector.
    Fci,
    /// Diagonalization in the singles-and-doubles space.
    Cisd,
    /// Optimize the ansatz and store the result and final statevector.
    Vqe,
    /// Extract a configuration table from a stored statevector.
    Extract {
        /// Statevector file (default: <out>/state.bin).
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<ExtractMethod>,
    },
    /// Fit the network to a configuration table.
    Pretrain {
        /// Table in JSON lines (default: <out>/extract.jsonl).
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Variational Monte Carlo from a checkpoint or a fresh initialization.
    Train {
        /// Starting checkpoint; omitted means random initialization.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// vqe → extract → pretrain → train in one run directory.
    Pipeline,
    /// Merge training traces into one comparison CSV.
    Report {
        /// `label=path`, where path is a trace CSV or a run directory.
        #[arg(long = "trace", required = true, value_name = "LABEL=PATH")]
        traces: Vec<String>,
        /// Reference energy; defaults to the FCI energy in a run manifest.
        #[arg(long, allow_hyphen_values = true)]
        reference: Option<f64>,
    },
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.fcidump {
            cfg.fcidump = Some(p.clone());
        }
        if let Some(k) = self.freeze_lowest {
            cfg.active_space = Some(ActiveSpaceSpec::FreezeLowest(k));
        }
        if let Some(t) = self.tailor_threshold {
            cfg.tailor_threshold = t;
        }
        if let Some(a) = self.ansatz {
            cfg.ansatz.kind = match a {
                AnsatzArg::Uccsd => AnsatzKind::Uccsd,
                AnsatzArg::Hea => AnsatzKind::Hea,
            };
        }
        if let Some(l) = self.layers {
            cfg.ansatz.layers = l;
        }
        if let Some(s) = self.seed {
            cfg.seeds = config::Seeds { vqe: s, model: s, vmc: s };
        }
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = cli.common.resolve()?;
    if let Some(n) = cfg.threads {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Inspect => commands::inspect(&cfg),
        Command::Fci => commands::ci(&cfg, commands::CiKind::Fci),
        Command::Cisd => commands::ci(&cfg, commands::CiKind::Cisd),
        Command::Vqe => commands::vqe(&cfg),
        Command::Extract { state, method } => {
            if let Some(m) = method {
                cfg.extract.method = m;
            }
            commands::extract(&cfg, state)
        }
        Command::Pretrain { table } => commands::pretrain(&cfg, table),
        Command::Train { init } => commands::train(&cfg, init),
        Command::Pipeline => commands::pipeline(&cfg),
        Command::Report { traces, reference } => report::report(&cfg, &traces, reference),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            for line in e.diagnostics() {
                eprintln!("{line}");
            }
            e.exit_code()
        }
    }
}
