//! One table row per results directory.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::output::MANIFEST;
use crate::{RunError, ARTIFACT_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dir: PathBuf,
    pub experiment: String,
    pub parameters: String,
    pub measured_exponent: Option<f64>,
    pub predicted_exponent: Option<f64>,
    pub status: String,
    pub warning: Option<String>,
}

/// Manifests are read as loose JSON so that runs from other versions still
/// report; a version other than this build's goes in the warning column.
pub fn report(dirs: &[PathBuf]) -> Result<Vec<ReportRow>, RunError> {
    dirs.iter().map(|d| row(d)).collect()
}

fn row(dir: &Path) -> Result<ReportRow, RunError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| RunError::config(format!("missing manifest {}: {e}", path.display())))?;
    let m: Value = serde_json::from_str(&text)
        .map_err(|e| RunError::config(format!("corrupt manifest {}: {e}", path.display())))?;
    let field = |k: &str| {
        m.get(k)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| RunError::config(format!("corrupt manifest {}: no \"{k}\"", path.display())))
    };
    let version = field("version")?;
    let verdict = m.get("verdict");
    let exponent = |k: &str| verdict.and_then(|v| v.get(k)).and_then(Value::as_f64);
    let parameters = m
        .get("config")
        .and_then(|c| c.get("parameters"))
        .map(|p| p.to_string())
        .unwrap_or_default();
    Ok(ReportRow {
        dir: dir.to_path_buf(),
        experiment: field("experiment")?,
        parameters,
        measured_exponent: exponent("measured_exponent"),
        predicted_exponent: exponent("predicted_exponent"),
        status: field("status")?,
        warning: (version != ARTIFACT_VERSION)
            .then(|| format!("artifact version {version} differs from {ARTIFACT_VERSION}")),
    })
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

/// Tab-separated table with a header line.
pub fn render(rows: &[ReportRow]) -> String {
    let mut out = String::from("dir\texperiment\tparameters\tmeasured\tpredicted\tstatus\twarning\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.dir.display(),
            r.experiment,
            r.parameters,
            cell(r.measured_exponent),
            cell(r.predicted_exponent),
            r.status,
            r.warning.as_deref().unwrap_or("")
        ));
    }
    out
}
