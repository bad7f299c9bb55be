use std::path::Path;
use std::process::{Command, Output};

fn colwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colwalk")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("suite.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SUITE: &str = r#"
model = "heyde"
steps = 2000
replicates = 50
tests = ["step_fractions", "msd", "anisotropy_ratio"]
t_grid = [0.5, 1.0]

[profile]
kind = "uniform"
L = 4

[tolerance]
step_fractions = { absolute = 0.05 }
msd = { relative = 1.0 }
"#;

#[test]
fn targets_for_iid_environment() {
    let out = colwalk(&["targets", "--model", "env", "--q", "0.5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in ["hfrac=0.666667", "vfrac=0.333333"] {
        assert!(text.lines().any(|l| l == line), "missing {line} in\n{text}");
    }
    let qn: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("qn_const="))
        .expect("qn_const line")
        .parse()
        .unwrap();
    // 1.5 / (2 pi sqrt(0.5)) = 0.33761862
    assert!((qn - 0.337_618).abs() < 1.5e-6, "qn_const={qn}");
}

#[test]
fn targets_for_fixed_profiles() {
    let text = stdout(&colwalk(&["targets", "--model", "heyde", "--L", "4"]));
    assert!(text.contains("gamma=1.250000") && text.contains("hfrac=0.800000"));
    assert!(text.contains("qn_const=n/a"));
    let text = stdout(&colwalk(&["targets", "--model", "heyde", "--probs", "0.25"]));
    assert!(text.contains("qn_const=0.318310"));
    let text = stdout(&colwalk(&["targets", "--model", "env", "--p01", "0.2", "--p10", "0.2"]));
    assert!(text.contains("q=0.500000") && text.contains("qn_const=n/a"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(colwalk(&["targets", "--model", "env", "--q", "0.5", "--bogus"]).status.code(), Some(2));
    assert_eq!(colwalk(&["targets", "--model", "env"]).status.code(), Some(2));
    assert_eq!(colwalk(&["targets", "--model", "env", "--q", "1.5"]).status.code(), Some(2));
    assert_eq!(colwalk(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "model = \"heyde\"\nsteps = [\n");
    assert_eq!(colwalk(&["verify", "--config", &bad, "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn verify_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SUITE);
    let out_dir = dir.path().join("out");
    let out = colwalk(&["verify", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    assert!(!out_dir.exists());
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SUITE);
    let mut reports = Vec::new();
    // Same output dir for both runs: it is part of the echoed config.
    let out_dir = dir.path().join("out");
    for workers in ["1", "4"] {
        let out = colwalk(&[
            "verify", "--config", &cfg, "--seed", "42", "--workers", workers, "--out", out_dir.to_str().unwrap(),
            "--format", "csv",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        reports.push(std::fs::read(out_dir.join("report.json")).unwrap());
        let rows = std::fs::read_to_string(out_dir.join("msd_msd_x.csv")).unwrap();
        assert_eq!(rows.lines().count(), 1 + 2);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn failing_suite_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SUITE.replace("absolute = 0.05", "absolute = 0.0"));
    let out_dir = dir.path().join("out");
    let out = colwalk(&["verify", "--config", &cfg, "--seed", "42", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "fail");
    assert_eq!(report["tests"][0]["verdict"], "fail");
}

#[test]
fn overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SUITE);
    let out_dir = dir.path().join("out");
    let out = colwalk(&[
        "verify", "--config", &cfg, "--seed", "9", "--steps", "1000", "--replicates", "30", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["steps"], 1000);
    assert_eq!(report["config"]["replicates"], 30);
    assert_eq!(report["seed"], 9);
    assert_eq!(report["tests"][0]["replicates"], 30);
}

#[test]
fn simulate_writes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SUITE);
    let json_dir = dir.path().join("json");
    let out = colwalk(&["simulate", "--config", &cfg, "--seed", "5", "--replicates", "3", "--out", json_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let runs: serde_json::Value = serde_json::from_slice(&std::fs::read(json_dir.join("trajectories.json")).unwrap()).unwrap();
    assert_eq!(runs.as_array().unwrap().len(), 3);
    assert_eq!(runs[0]["end"]["n"], 2000);

    let csv_dir = dir.path().join("csv");
    let out = colwalk(&[
        "simulate", "--config", &cfg, "--seed", "5", "--replicates", "3", "--format", "csv", "--out",
        csv_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(csv_dir.join("trajectory_2.csv")).unwrap();
    assert!(csv.starts_with("m,x,y,h_count,v_count\n"));
    assert!(csv.lines().last().unwrap().starts_with("2000,"));
    assert_eq!(colwalk(&["simulate", "--config", &cfg]).status.code(), Some(2));
}
