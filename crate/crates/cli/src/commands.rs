use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use nqsvqe::extraction::{extract_full, extract_mc, Configuration, WavefunctionTable, DEFAULT_ENUMERATION_LIMIT};
use nqsvqe::integrals::{jordan_wigner, tailor, IntegralSet, QubitHamiltonian};
use nqsvqe::nnqs::ModelParams;
use nqsvqe::simulator::Statevector;
use nqsvqe::solver::{hartree_fock_energy, solve, CiSpace, LanczosSettings};
use nqsvqe::training::{pretrain as fit, train_vmc, PretrainRecord, PretrainTarget, TrainTrace};
use nqsvqe::vqe::{run_vqe, AnsatzKind, AnsatzSpec, VqeResult};
use nqsvqe::Error;

use crate::config::{ExtractMethod, RunConfig};
use crate::error::CliError;

/// Integrals, the (possibly tailored) qubit Hamiltonian and its sector.
struct Problem {
    ints: IntegralSet,
    h: QubitHamiltonian,
    full_terms: usize,
    dropped: f64,
    sector: (usize, usize),
    hf_energy: f64,
}

impl Problem {
    fn load(cfg: &RunConfig) -> Result<Self, CliError> {
        let ints = cfg.integrals()?;
        let full = jordan_wigner(&ints);
        let full_terms = full.len();
        let (h, dropped) = tailor(&full, cfg.tailor_threshold)?;
        Ok(Self {
            sector: (ints.n_alpha(), ints.n_beta()),
            hf_energy: hartree_fock_energy(&ints)?,
            ints,
            h,
            full_terms,
            dropped,
        })
    }

    fn reference(&self) -> Result<Configuration, CliError> {
        Ok(Configuration::hartree_fock(self.ints.n_orb, self.sector.0, self.sector.1)?)
    }

    /// FCI energy when the sector fits the solver, else `None`.
    fn oracle(&self) -> Result<Option<f64>, CliError> {
        match CiSpace::fci(&self.ints) {
            Ok(space) => Ok(Some(solve(&self.ints, &space, &LanczosSettings::default())?.energy)),
            Err(Error::Capacity { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn summary(&self, cfg: &RunConfig) -> Value {
        json!({
            "fcidump": cfg.fcidump,
            "n_orb": self.ints.n_orb,
            "n_qubits": self.h.n_qubits,
            "n_alpha": self.sector.0,
            "n_beta": self.sector.1,
            "terms": self.h.len(),
            "dropped_weight": self.dropped,
            "hf_energy": self.hf_energy,
        })
    }
}

/// Record of one invocation: the resolved configuration plus results.
#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a RunConfig,
    hamiltonian: Value,
    results: BTreeMap<&'a str, Value>,
}

fn write_manifest(cfg: &RunConfig, command: &str, problem: Option<&Problem>, results: BTreeMap<&str, Value>) -> Result<(), CliError> {
    let m = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        hamiltonian: problem.map(|p| p.summary(cfg)).unwrap_or(Value::Null),
        results,
    };
    let dir = cfg.out_dir()?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&m).map_err(Error::from)?)?;
    Ok(())
}

fn prepare_out(cfg: &RunConfig) -> Result<&Path, CliError> {
    let dir = cfg.out_dir()?;
    fs::create_dir_all(dir)?;
    Ok(dir)
}

pub fn inspect(cfg: &RunConfig) -> Result<(), CliError> {
    let p = Problem::load(cfg)?;
    println!("orbitals: {}", p.ints.n_orb);
    println!("qubits: {}", p.h.n_qubits);
    println!("sector: ({}, {})", p.sector.0, p.sector.1);
    println!("terms: {}", p.full_terms);
    println!("remaining_terms: {}", p.h.len());
    println!("dropped_weight: {:e}", p.dropped);
    println!("hf_energy: {:.10}", p.hf_energy);
    Ok(())
}

#[derive(Clone, Copy)]
pub enum CiKind {
    Fci,
    Cisd,
}

pub fn ci(cfg: &RunConfig, kind: CiKind) -> Result<(), CliError> {
    let p = Problem::load(cfg)?;
    let (space, name) = match kind {
        CiKind::Fci => (CiSpace::fci(&p.ints)?, "fci"),
        CiKind::Cisd => (CiSpace::cisd(&p.ints)?, "cisd"),
    };
    let sol = solve(&p.ints, &space, &LanczosSettings::default())?;
    println!("determinants: {}", space.len());
    println!("energy: {:.10}", sol.energy);
    if cfg.out.is_some() {
        let dir = prepare_out(cfg)?;
        fs::write(dir.join(format!("{name}.jsonl")), sol.table.to_jsonl()?)?;
        let results = BTreeMap::from([
            ("energy", json!(sol.energy)),
            ("residual", json!(sol.residual)),
            ("determinants", json!(space.len())),
        ]);
        write_manifest(cfg, name, Some(&p), results)?;
    }
    Ok(())
}

fn run_ansatz(cfg: &RunConfig, p: &Problem) -> Result<VqeResult, CliError> {
    let reference = p.reference()?;
    let spec = match cfg.ansatz.kind {
        AnsatzKind::Uccsd => AnsatzSpec::uccsd(reference),
        AnsatzKind::Hea => AnsatzSpec::hea(reference, cfg.ansatz.layers),
    };
    Ok(run_vqe(&p.h, &spec, &cfg.vqe, cfg.seeds.vqe)?)
}

fn save_vqe(dir: &Path, result: &VqeResult, state: &Statevector) -> Result<(), CliError> {
    fs::write(dir.join("vqe.json"), result.to_json()?)?;
    state.write_to(BufWriter::new(File::create(dir.join("state.bin"))?))?;
    Ok(())
}

pub fn vqe(cfg: &RunConfig) -> Result<(), CliError> {
    let p = Problem::load(cfg)?;
    let dir = prepare_out(cfg)?;
    let result = run_ansatz(cfg, &p)?;
    let state = result.state()?;
    save_vqe(dir, &result, &state)?;
    println!("parameters: {}", result.params.len());
    println!("iterations: {}", result.trace.len());
    println!("energy: {:.10}", result.energy);
    let results = BTreeMap::from([
        ("vqe_energy", json!(result.energy)),
        ("parameters", json!(result.params.len())),
        ("iterations", json!(result.trace.len())),
    ]);
    write_manifest(cfg, "vqe", Some(&p), results)
}

fn extract_table(cfg: &RunConfig, p: &Problem, state: &Statevector) -> Result<WavefunctionTable, CliError> {
    if state.n_qubits() != p.h.n_qubits {
        return Err(CliError::Usage(format!(
            "statevector has {} qubits but the Hamiltonian has {}",
            state.n_qubits(),
            p.h.n_qubits
        )));
    }
    Ok(match cfg.extract.method {
        ExtractMethod::Full => extract_full(state, p.sector, cfg.extract.cutoff, DEFAULT_ENUMERATION_LIMIT)?,
        ExtractMethod::Mc => extract_mc(state, p.sector, &p.h, p.hf_energy, &cfg.extract.mc)?.table,
    })
}

pub fn extract(cfg: &RunConfig, state: Option<PathBuf>) -> Result<(), CliError> {
    let p = Problem::load(cfg)?;
    let dir = prepare_out(cfg)?;
    let path = state.unwrap_or_else(|| dir.join("state.bin"));
    let file = File::open(&path).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    let sv = Statevector::read_from(BufReader::new(file))?;
    let table = extract_table(cfg, &p, &sv)?;
    fs::write(dir.join("extract.jsonl"), table.to_jsonl()?)?;
    println!("configurations: {}", table.len());
    println!("captured_weight: {:.10}", table.norm_sqr());
    let results = BTreeMap::from([
        ("state", json!(path)),
        ("configurations", json!(table.len())),
        ("captured_weight", json!(table.norm_sqr())),
    ]);
    write_manifest(cfg, "extract", Some(&p), results)
}

fn pretrain_csv(records: &[PretrainRecord]) -> String {
    let mut out = String::from("epoch,loss,kl,phase_loss,grad_norm,wall_ms\n");
    for r in records {
        let _ = writeln!(out, "{},{:?},{:?},{:?},{:?},{}", r.epoch, r.loss, r.kl, r.phase_loss, r.grad_norm, r.wall_ms);
    }
    out
}

fn run_pretrain(cfg: &RunConfig, table: &WavefunctionTable, dir: &Path) -> Result<(ModelParams, Vec<PretrainRecord>), CliError> {
    let n_orb = table.meta.n_qubits / 2;
    let model = cfg.model.config(n_orb, (table.meta.n_alpha, table.meta.n_beta));
    let init = ModelParams::init(model, cfg.seeds.model)?;
    let (params, records) = fit(&init, &PretrainTarget::new(table)?, &cfg.pretrain)?;
    params.save(&dir.join("pretrain.ckpt"))?;
    fs::write(dir.join("pretrain.csv"), pretrain_csv(&records))?;
    Ok((params, records))
}

fn pretrain_results(records: &[PretrainRecord]) -> [(&'static str, Value); 3] {
    let best = records.iter().map(|r| r.loss).fold(f64::INFINITY, f64::min);
    [
        ("pretrain_epochs", json!(records.len().saturating_sub(1))),
        ("pretrain_initial_loss", json!(records.first().map(|r| r.loss))),
        ("pretrain_best_loss", json!(best)),
    ]
}

pub fn pretrain(cfg: &RunConfig, table: Option<PathBuf>) -> Result<(), CliError> {
    let dir = prepare_out(cfg)?;
    let path = table.unwrap_or_else(|| dir.join("extract.jsonl"));
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let table = WavefunctionTable::from_jsonl(&text)?;
    let (_, records) = run_pretrain(cfg, &table, dir)?;
    let last = records.last().expect("pretraining records at least one epoch");
    println!("epochs: {}", last.epoch);
    println!("initial_loss: {:e}", records[0].loss);
    println!("final_loss: {:e}", last.loss);
    let mut results = BTreeMap::from(pretrain_results(&records));
    results.insert("pretrain_source", json!(path));
    write_manifest(cfg, "pretrain", None, results)
}

fn run_train(cfg: &RunConfig, p: &Problem, start: &ModelParams, oracle: Option<f64>, dir: &Path) -> Result<TrainTrace, CliError> {
    let (best, trace) = train_vmc(start, &p.h, &cfg.vmc, cfg.seeds.vmc, oracle)?;
    best.save(&dir.join("train.ckpt"))?;
    fs::write(dir.join("train.csv"), trace.to_csv())?;
    Ok(trace)
}

fn train_results(trace: &TrainTrace, oracle: Option<f64>, gap: f64) -> BTreeMap<&'static str, Value> {
    BTreeMap::from([
        ("eval_mode", json!(trace.mode)),
        ("final_energy", json!(trace.final_energy())),
        ("best_energy", json!(trace.best_energy())),
        ("fci_energy", json!(oracle)),
        ("steps_to_accuracy", json!(oracle.and_then(|e| trace.steps_to_accuracy(e, gap)))),
    ])
}

fn print_train(trace: &TrainTrace, oracle: Option<f64>) {
    let last = trace.records.last().expect("training records at least one evaluation");
    println!("steps: {}", last.step);
    println!("final_energy: {:.10}", last.energy);
    if let Some(e) = oracle {
        println!("fci_energy: {e:.10}");
        println!("error: {:e}", (last.energy - e).abs());
    }
}

pub fn train(cfg: &RunConfig, init: Option<PathBuf>) -> Result<(), CliError> {
    let p = Problem::load(cfg)?;
    let dir = prepare_out(cfg)?;
    let start = match &init {
        Some(path) => ModelParams::load(path)?,
        None => ModelParams::init(cfg.model.config(p.ints.n_orb, p.sector), cfg.seeds.model)?,
    };
    if start.config().n_orb != p.ints.n_orb || start.config().sector != p.sector {
        return Err(CliError::Usage("checkpoint does not match the Hamiltonian's orbitals and sector".into()));
    }
    let oracle = p.oracle()?;
    let trace = run_train(cfg, &p, &start, oracle, dir)?;
    print_train(&trace, oracle);
    let mut results = train_results(&trace, oracle, cfg.vmc.target_gap);
    results.insert("init", json!(init));
    write_manifest(cfg, "train", Some(&p), results)
}

pub fn pipeline(cfg: &RunConfig) -> Result<(), CliError> {
    let p = Problem::load(cfg)?;
    let dir = prepare_out(cfg)?;
    let oracle = p.oracle()?;

    let result = run_ansatz(cfg, &p)?;
    let state = result.state()?;
    save_vqe(dir, &result, &state)?;
    println!("vqe_energy: {:.10}", result.energy);

    let table = extract_table(cfg, &p, &state)?;
    fs::write(dir.join("extract.jsonl"), table.to_jsonl()?)?;
    println!("configurations: {}", table.len());

    let (pretrained, records) = run_pretrain(cfg, &table, dir)?;
    println!("pretrain_epochs: {}", records.len().saturating_sub(1));

    let trace = run_train(cfg, &p, &pretrained, oracle, dir)?;
    print_train(&trace, oracle);

    let mut results = train_results(&trace, oracle, cfg.vmc.target_gap);
    results.insert("vqe_energy", json!(result.energy));
    results.insert("vqe_parameters", json!(result.params.len()));
    results.insert("configurations", json!(table.len()));
    results.insert("pretrain_source", json!("extract.jsonl"));
    results.extend(pretrain_results(&records));
    write_manifest(cfg, "pipeline", Some(&p), results)
}
