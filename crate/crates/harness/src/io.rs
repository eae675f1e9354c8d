//! Deterministic artifact export. Numeric CSV cells use 17 significant
//! digits (exact f64 round-trip), JSON uses serde's shortest-round-trip
//! floats, and every writer walks runs in index order — so identical results
//! produce identical bytes, whatever thread count produced them.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sgdlab_core::{format_f64, write_csv_path};

use crate::compare::CompareReport;
use crate::config::ExperimentConfig;
use crate::ensemble::{EnsembleResult, FractionEntry};
use crate::error::HarnessError;

/// One run's identity and label in the JSON report.
#[derive(Debug, Serialize)]
struct RunLabel {
    run: usize,
    stream: u64,
    label: String,
}

/// The aggregate JSON document (`<name>.fractions.json`).
#[derive(Debug, Serialize)]
struct FractionsDoc<'a> {
    name: &'a str,
    master_seed: u64,
    runs: usize,
    classified: usize,
    diverged: usize,
    fractions: &'a BTreeMap<String, FractionEntry>,
    run_labels: Vec<RunLabel>,
    config: &'a ExperimentConfig,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

/// Renders the per-run endpoint table (`<name>.runs.csv`): run index, stream
/// index, label, then the endpoint summary (empty cells for diverged runs).
pub fn runs_csv_string(result: &EnsembleResult) -> String {
    let mut out = String::from("run,stream,label");
    for name in result.schema.names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for o in &result.outcomes {
        out.push_str(&format!("{},{},{}", o.run_index, o.run_index, o.label));
        match &o.endpoint {
            Some(endpoint) => {
                for v in endpoint.values() {
                    out.push(',');
                    out.push_str(&format_f64(*v));
                }
            }
            None => {
                for _ in 0..result.schema.len() {
                    out.push(',');
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Renders the aggregate JSON (`<name>.fractions.json`).
pub fn fractions_json_string(result: &EnsembleResult) -> Result<String, HarnessError> {
    let doc = FractionsDoc {
        name: &result.config.name,
        master_seed: result.config.master_seed,
        runs: result.outcomes.len(),
        classified: result.classified,
        diverged: result.diverged,
        fractions: &result.fractions,
        run_labels: result
            .outcomes
            .iter()
            .map(|o| RunLabel {
                run: o.run_index,
                stream: o.run_index as u64,
                label: o.label.clone(),
            })
            .collect(),
        config: &result.config,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Renders the comparison table (`<name>.compare.csv`).
pub fn compare_csv_string(report: &CompareReport) -> String {
    let mut out = String::from("series,system,mode,sup_distance\n");
    for (i, d) in report.per_run.iter().enumerate() {
        out.push_str(&format!(
            "run-{i:04},{},{},{}\n",
            report.system,
            report.mode,
            format_f64(*d)
        ));
    }
    out.push_str(&format!(
        "mean,{},{},{}\n",
        report.system,
        report.mode,
        format_f64(report.mean_distance)
    ));
    out
}

/// Writes `<name>.runs.csv` and `<name>.fractions.json` under `dir`, returning
/// the paths written.
pub fn export_ensemble(
    result: &EnsembleResult,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    let runs_path = dir.join(format!("{}.runs.csv", result.config.name));
    write_file(&runs_path, runs_csv_string(result).as_bytes())?;
    let fractions_path = dir.join(format!("{}.fractions.json", result.config.name));
    write_file(&fractions_path, fractions_json_string(result)?.as_bytes())?;
    Ok(vec![runs_path, fractions_path])
}

/// Writes `<name>.compare.csv` under `dir`.
pub fn export_compare(
    report: &CompareReport,
    name: &str,
    dir: &Path,
) -> Result<PathBuf, HarnessError> {
    let path = dir.join(format!("{name}.compare.csv"));
    write_file(&path, compare_csv_string(report).as_bytes())?;
    Ok(path)
}

/// Writes each kept trajectory as `<name>.run<idx>.csv` under `dir`.
pub fn export_trajectories(
    result: &EnsembleResult,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut paths = Vec::new();
    for o in &result.outcomes {
        if let Some(traj) = &o.trajectory {
            let path = dir.join(format!("{}.run{:04}.csv", result.config.name, o.run_index));
            write_csv_path(traj, &path)?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// Writes a plain text report to `path` (helper for CLI subcommands).
pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    write_file(path, text.as_bytes())
}

/// Writes a trajectory CSV through a generic writer (stdout, file, buffer).
pub fn write_trajectory<W: Write>(
    traj: &sgdlab_core::Trajectory,
    w: W,
) -> Result<(), std::io::Error> {
    sgdlab_core::write_csv(traj, w)
}
