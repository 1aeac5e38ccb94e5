//! Run directories: `manifest.json`, `results.json`, `results.csv` and snapshots.

use std::fs;
use std::path::{Path, PathBuf};

use hartree_core::grid::io::write_field;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::{RunError, RunResult};
use crate::experiments::{run_experiment, Outcome};

pub const MANIFEST: &str = "manifest.json";
pub const RESULTS_JSON: &str = "results.json";
pub const RESULTS_CSV: &str = "results.csv";

/// `runs/<kind>-<first 12 hash digits>` unless the config names a directory.
pub fn default_output_dir(config: &ExperimentConfig) -> PathBuf {
    match &config.output_dir {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from("runs").join(format!("{}-{}", config.kind, &config.content_hash()[..12])),
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |e| RunError::Io(format!("{}: {e}", path.display()))
}

fn write(path: &Path, body: &str) -> RunResult<()> {
    fs::write(path, body).map_err(io(path))
}

pub fn manifest(config: &ExperimentConfig, artifacts: &[String]) -> Value {
    json!({
        "kind": config.kind,
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": config.content_hash(),
        "seed": config.seed,
        "grid": config.grid,
        "time": config.time,
        "artifacts": artifacts,
        "config": config,
    })
}

/// Runs the experiment and writes its artifacts into `dir`, returning the results.
pub fn run(config: &ExperimentConfig, dir: &Path) -> RunResult<Value> {
    config.validate()?;
    let Outcome { results, csv, snapshots } = run_experiment(config)?;
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut artifacts = vec![RESULTS_JSON.to_string(), RESULTS_CSV.to_string()];
    if !snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        fs::create_dir_all(&snap_dir).map_err(io(&snap_dir))?;
        for (stem, t, field) in &snapshots {
            write_field(field, &snap_dir.join(format!("{stem}.bin")), Some(*t))?;
            artifacts.push(format!("snapshots/{stem}.bin"));
        }
    }
    write(&dir.join(RESULTS_CSV), &csv)?;
    write(&dir.join(RESULTS_JSON), &pretty(&results))?;
    write(&dir.join(MANIFEST), &pretty(&manifest(config, &artifacts)))?;
    Ok(results)
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

pub fn read_json(path: &Path) -> RunResult<Value> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}
