use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nqsvqe::training::{EvalMode, TrainTrace};

use crate::config::RunConfig;
use crate::error::CliError;

struct Source {
    label: String,
    csv: PathBuf,
    manifest: Option<PathBuf>,
}

fn parse_source(arg: &str) -> Result<Source, CliError> {
    let (label, path) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("trace '{arg}' is not of the form label=path")))?;
    if label.is_empty() || label.contains(',') {
        return Err(CliError::Usage(format!("bad trace label '{label}'")));
    }
    let path = Path::new(path);
    let (csv, manifest) = if path.is_dir() {
        (path.join("train.csv"), Some(path.join("manifest.json")))
    } else {
        (path.to_path_buf(), path.parent().map(|d| d.join("manifest.json")))
    };
    Ok(Source { label: label.to_string(), csv, manifest })
}

fn manifest_reference(path: &Path) -> Option<f64> {
    let text = fs::read_to_string(path).ok()?;
    let v: serde_json::Value = serde_json::from_str(&text).ok()?;
    v.get("results")?.get("fci_energy")?.as_f64()
}

/// Merges traces into `step,method,energy,abs_error` rows. Reads files
/// only; nothing is recomputed.
pub fn report(cfg: &RunConfig, traces: &[String], reference: Option<f64>) -> Result<(), CliError> {
    let sources = traces.iter().map(|t| parse_source(t)).collect::<Result<Vec<_>, _>>()?;
    let reference = reference
        .or_else(|| sources.iter().filter_map(|s| s.manifest.as_deref()).find_map(manifest_reference))
        .ok_or_else(|| CliError::Usage("no reference energy: pass --reference or a run directory with an FCI result".into()))?;
    let mut out = String::from("step,method,energy,abs_error\n");
    for s in &sources {
        let text = fs::read_to_string(&s.csv)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", s.csv.display())))?;
        let trace = TrainTrace::from_csv(&text, EvalMode::ExactEval)?;
        for r in &trace.records {
            let _ = writeln!(out, "{},{},{:?},{:?}", r.step, s.label, r.energy, (r.energy - reference).abs());
        }
    }
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("report.csv"), &out)?;
        }
        None => print!("{out}"),
    }
    Ok(())
}
