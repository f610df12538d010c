//! Running a config and persisting its results directory.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::experiments::{execute, Outcome, Verdict};
use crate::{RunError, ARTIFACT_VERSION};

pub const RESULTS: &str = "results.csv";
pub const SUMMARY: &str = "summary.json";
pub const PLOT: &str = "plot.svg";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub op: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub status: Status,
    pub wall_time_s: f64,
    pub convergence: Vec<bool>,
    pub all_converged: bool,
    pub verdict: Option<Verdict>,
    pub error: Option<ErrorInfo>,
}

fn write_csv(path: &Path, out: &Outcome) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "{}", out.header.join(","))?;
    for row in &out.rows {
        writeln!(f, "{}", row.join(","))?;
    }
    f.flush()
}

fn remove_outputs(dir: &Path) {
    for name in [RESULTS, SUMMARY, PLOT, MANIFEST] {
        let _ = fs::remove_file(dir.join(name));
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), RunError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| RunError::Io(e.into()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Validates, computes and writes the results directory. On failure any
/// partial outputs are removed and a manifest recording the error is left
/// in their place (unless the directory itself could not be prepared).
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest, RunError> {
    cfg.validate()?;
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir)
        .map_err(|e| RunError::config(format!("cannot create output_dir {}: {e}", dir.display())))?;
    remove_outputs(dir);

    let start = Instant::now();
    let result = execute(cfg).and_then(|out| persist(dir, &out).map(|_| out));
    let wall_time_s = start.elapsed().as_secs_f64();
    let mut manifest = RunManifest {
        artifact: "curvelab".into(),
        version: ARTIFACT_VERSION.into(),
        experiment: cfg.experiment.name().into(),
        config: cfg.clone(),
        status: Status::Error,
        wall_time_s,
        convergence: Vec::new(),
        all_converged: false,
        verdict: None,
        error: None,
    };
    match result {
        Ok(out) => {
            manifest.status = if out.verdict.passed { Status::Pass } else { Status::Fail };
            manifest.all_converged = out.convergence.iter().all(|&c| c);
            manifest.convergence = out.convergence;
            manifest.verdict = Some(out.verdict);
            write_json(&dir.join(MANIFEST), &manifest)?;
            Ok(manifest)
        }
        Err(e) => {
            remove_outputs(dir);
            let op = match &e {
                RunError::Failed { op, .. } => Some(op.clone()),
                _ => None,
            };
            manifest.error = Some(ErrorInfo { kind: e.kind().into(), op, message: e.to_string() });
            write_json(&dir.join(MANIFEST), &manifest)?;
            Err(e)
        }
    }
}

fn persist(dir: &Path, out: &Outcome) -> Result<(), RunError> {
    write_csv(&dir.join(RESULTS), out)?;
    let summary = json!({"verdict": out.verdict, "details": out.summary});
    write_json(&dir.join(SUMMARY), &summary)?;
    if let Some(plot) = &out.plot {
        fs::write(dir.join(PLOT), plot.to_svg())?;
    }
    Ok(())
}
