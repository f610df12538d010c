use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lab"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("lab runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn decay_config(out: &Path) -> String {
    format!(
        r#"{{"experiment": "decay",
            "parameters": {{"measure": {{"kind": "cantor", "alpha": 1.5}},
                            "r_values": {{"log2_from": 6, "log2_to": 10}}}},
            "seed": 1, "output_dir": {:?}}}"#,
        out
    )
}

#[test]
fn decay_run_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("decay");
    let cfg = write_config(tmp.path(), "decay.json", &decay_config(&out));
    let res = lab(&["run", &cfg], &[]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["results.csv", "summary.json", "plot.svg", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["details"]["reference_slope"], -0.75);
    assert!(summary["details"]["fit"]["slope"].as_f64().unwrap() <= -0.6);
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(csv.starts_with("R,value,gamma,kind,quad_nodes,converged\n"));
    assert_eq!(csv.lines().count(), 6);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["status"], "pass");
    assert_eq!(manifest["all_converged"], true);
    assert!(std::fs::read_to_string(out.join("plot.svg")).unwrap().contains("stroke-dasharray"));

    // The report maps the run onto its predicted exponent.
    let rep = lab(&["report", out.to_str().unwrap()], &[]);
    assert_eq!(rep.status.code(), Some(0));
    let text = String::from_utf8(rep.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split('\t').collect();
    assert_eq!(cols[1], "decay");
    assert_eq!(cols[4], "-0.7500");
    assert_eq!(cols[5], "pass");
    assert_eq!(cols[6], "");
}

#[test]
fn reruns_are_bitwise_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for exp in ["tubes", "whitney"] {
        let mut csvs = Vec::new();
        for rep in 0..2 {
            let out = tmp.path().join(format!("{exp}{rep}"));
            let params = if exp == "tubes" {
                r#"{"delta": 0.1, "n_values": [2, 3], "r_values": [64, 128, 256], "mc_samples": 20000}"#
            } else {
                r#"{"n_max": 8, "points": 500}"#
            };
            let body = format!(
                r#"{{"experiment": "{exp}", "parameters": {params}, "seed": 42, "output_dir": {out:?}}}"#
            );
            let cfg = write_config(tmp.path(), &format!("{exp}{rep}.json"), &body);
            let res = lab(&["run", &cfg], &[("LAB_THREADS", if rep == 0 { "1" } else { "3" })]);
            assert!(res.status.code().is_some(), "{exp}");
            csvs.push(std::fs::read(out.join("results.csv")).unwrap());
        }
        assert_eq!(csvs[0], csvs[1], "{exp}");
    }
}

#[test]
fn whitney_histogram_is_all_ones() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("w");
    let cfg = write_config(
        tmp.path(),
        "w.json",
        &format!(r#"{{"experiment": "whitney", "parameters": {{"n_max": 12}}, "output_dir": {out:?}}}"#),
    );
    let res = lab(&["run", &cfg], &[]);
    assert_eq!(res.status.code(), Some(0));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["details"]["histogram"], serde_json::json!({"1": 10000}));
    assert_eq!(summary["details"]["pairs_per_generation"]["2"], 6);
}

#[test]
fn invalid_weight_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t");
    let cfg = write_config(
        tmp.path(),
        "t.json",
        &format!(
            r#"{{"experiment": "threshold",
                 "parameters": {{"alpha": 1.5, "p": 2, "gamma": -1.0, "r_values": [4, 8, 16]}},
                 "output_dir": {out:?}}}"#
        ),
    );
    let res = lab(&["run", &cfg], &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn budget_overrun_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    let cfg = write_config(
        tmp.path(),
        "b.json",
        &format!(
            r#"{{"experiment": "decay",
                 "parameters": {{"measure": {{"kind": "cantor", "alpha": 1.5, "depth": 16}}, "r_values": [64, 128, 256]}},
                 "output_dir": {out:?}, "atom_budget": 1000}}"#
        ),
    );
    assert_eq!(lab(&["run", &cfg], &[]).status.code(), Some(3));
}

#[test]
fn failing_operation_leaves_only_an_error_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join("results.csv"), "stale").unwrap();
    // Reading a measure file that is not a measure CSV fails after validation.
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "not a measure\n").unwrap();
    let cfg = write_config(
        tmp.path(),
        "f.json",
        &format!(
            r#"{{"experiment": "decay",
                 "parameters": {{"measure": {{"kind": "csv", "path": {bad:?}}}, "r_values": [64, 128, 256]}},
                 "output_dir": {out:?}}}"#
        ),
    );
    let res = lab(&["run", &cfg], &[]);
    assert_ne!(res.status.code(), Some(0));
    assert!(!out.join("results.csv").exists());
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["status"], "error");
    assert!(!manifest["error"]["message"].as_str().unwrap().is_empty());
    assert_eq!(manifest["config"]["experiment"], "decay");
}

#[test]
fn report_handles_empty_missing_and_mixed_versions() {
    let res = lab(&["report"], &[]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(String::from_utf8(res.stdout).unwrap().lines().count(), 1);

    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nothing");
    let res = lab(&["report", missing.to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("manifest.json"));

    let out = tmp.path().join("rect");
    let cfg = write_config(
        tmp.path(),
        "r.json",
        &format!(r#"{{"experiment": "rect", "parameters": {{"r_values": [16, 64, 256]}}, "output_dir": {out:?}}}"#),
    );
    assert_eq!(lab(&["run", &cfg], &[]).status.code(), Some(0));
    let old = tmp.path().join("old");
    std::fs::create_dir_all(&old).unwrap();
    let mut manifest = json(&out.join("manifest.json"));
    manifest["version"] = "0.0.1".into();
    std::fs::write(old.join("manifest.json"), manifest.to_string()).unwrap();
    let res = lab(&["report", out.to_str().unwrap(), old.to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with('\t'));
    assert!(lines[2].contains("0.0.1"));

    std::fs::write(old.join("manifest.json"), "{").unwrap();
    let res = lab(&["report", old.to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("corrupt"));
}

#[test]
fn synth_then_audit() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_config(tmp.path(), "spec.json", r#"{"kind": "cantor", "alpha": 1.5, "depth": 4}"#);
    let csv = tmp.path().join("m.csv");
    let res = lab(&["synth-measure", &spec, "-o", csv.to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("# atomic-measure v1, alpha=1.5"), "{header}");
    assert!(header.ends_with("provenance=cantor"), "{header}");
    let res = lab(&["audit-dim", csv.to_str().unwrap(), "--alpha", "1.5"], &[]);
    assert_eq!(res.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&res.stdout).unwrap();
    let ratio = rep["worst_ratio"].as_f64().unwrap();
    assert!(ratio > 0.1 && ratio < 10.0, "{ratio}");

    let sharp = write_config(tmp.path(), "sharp.json", r#"{"p": 2, "alpha": 1.5, "R": 128, "case_id": "case_i"}"#);
    let res = lab(&["synth-measure", &sharp, "-o", tmp.path().join("s.csv").to_str().unwrap()], &[]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let res = lab(
        &["synth-measure", &sharp, "-o", tmp.path().join("s.csv").to_str().unwrap(), "--atom-budget", "10"],
        &[],
    );
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let res = lab(&["report"], &[("LAB_THREADS", "zero")]);
    assert_eq!(res.status.code(), Some(2));
}
