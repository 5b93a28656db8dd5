//! Config-driven front end: parse coefficient expressions, run a task, write a
//! trajectory CSV and a JSON report.

pub mod config;
pub mod expr;
pub mod run;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub grid: Option<usize>,
}

pub struct RunSummary {
    pub report: run::Report,
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Load, override, execute and write; the error carries the exit code.
pub fn run_file(config: &Path, out_dir: &Path, ov: &Overrides) -> Result<RunSummary, run::RunError> {
    let mut cfg = config::load(config)?;
    let mut source = BTreeMap::new();
    source.insert("check_tol".to_string(), "config".to_string());
    source.insert("grid".to_string(), "config".to_string());
    if let Some(t) = ov.tol {
        cfg.numerics.check_tol = t;
        source.insert("check_tol".into(), "cli".into());
    }
    if let Some(n) = ov.grid {
        cfg.numerics.grid = n;
        source.insert("grid".into(), "cli".into());
    }
    let (report, out) = run::execute(&cfg, source)?;
    let (csv, json) = run::write_artifacts(out_dir, &report, &out)?;
    Ok(RunSummary { report, csv, json })
}
