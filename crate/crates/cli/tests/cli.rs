use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn itqde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itqde"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const TFIM2_EXACT: &str = r#"
name = "tfim2-exact"
seed = 3

[model]
kind = "tfim"
j = 1.0
h = 2.0
sites = 2
boundary = "open"

[method]
kind = "exact"
initial = "maximally_mixed"

[itqde]
dtau = 0.01
m = 200
scheme = "exact_binomial"
lambda = { kind = "uniform", min = -5.0, max = 5.0, points = 41 }
"#;

#[test]
fn presets_listed_and_printed() {
    let o = itqde(&["presets"]);
    assert!(o.status.success());
    let names = stdout(&o);
    for name in ["tfim8-mixed", "fh4-mixed", "tfim2-sampled", "tfim8-pure", "tfim3-estimator"] {
        assert!(names.contains(name), "{name} missing");
    }
    let o = itqde(&["presets", "fh4-mixed"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("kind = \"fermi_hubbard\""));
    let o = itqde(&["presets", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let o = itqde(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 5, "{out}");
    assert!(!out.contains("FAIL"));

    assert_eq!(itqde(&["verify", "--m", "7"]).status.code(), Some(2));
    assert_eq!(itqde(&["verify", "--qubits", "6", "--dense-limit", "4"]).status.code(), Some(3));
}

#[test]
fn run_writes_files_and_repeats_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("tfim2.toml");
    fs::write(&cfg, TFIM2_EXACT).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = itqde(&["run", "--config", p(&cfg), "--output", p(dir)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert!(files.len() >= 41 + 8);
    for f in files {
        let name = f.as_str().unwrap();
        if name == "manifest.json" {
            continue;
        }
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
    let plateaus: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("plateaus.json")).unwrap()).unwrap();
    assert!(!plateaus["plateaus"].as_array().unwrap().is_empty());
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("tfim2.toml");
    fs::write(&cfg, TFIM2_EXACT).unwrap();
    let out = tmp.path().join("o");
    let o = itqde(&["sample", "--config", p(&cfg), "--output", p(&out), "--m", "40", "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let written = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(written.contains("m = 40"));
    assert!(written.contains("seed = 9"));
    assert!(!out.join("sweep.csv").exists());
}

#[test]
fn bad_config_reports_field_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, TFIM2_EXACT.replace("m = 200", "m = 201")).unwrap();
    let o = itqde(&["run", "--config", p(&cfg), "--output", p(&tmp.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("itqde.m"), "{}", stderr(&o));

    fs::write(&cfg, TFIM2_EXACT.replace("h = 2.0", "h = \"two\"")).unwrap();
    let o = itqde(&["run", "--config", p(&cfg), "--output", p(&tmp.path().join("y"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.h"), "{}", stderr(&o));
}

#[test]
fn sweep_over_stored_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let traj_dir = tmp.path().join("t");
    let o = itqde(&["sample", "--preset", "tfim2-sampled", "--output", p(&traj_dir)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("s");
    let o = itqde(&[
        "sweep",
        "--trajectory",
        p(&traj_dir.join("trajectory.json")),
        "--errors",
        p(&traj_dir.join("errors.json")),
        "--lambda",
        "-4.5,-1.5,1.5,4.5",
        "--output",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(sweep["std_errors"].as_array().unwrap().len(), 4);
    assert_eq!(fs::read_to_string(out.join("sweep.csv")).unwrap().lines().count(), 5);

    let o = itqde(&["sweep", "--trajectory", p(&traj_dir.join("trajectory.json")), "--output", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_emits_json_lines() {
    let o = itqde(&["analyze", "--preset", "tfim3-estimator"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let records: Vec<serde_json::Value> =
        text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(records.len() >= 5);
    for r in &records {
        assert!(r["op"].is_string());
        assert!(r["error_norm"].is_number());
        assert!(r["passed"].is_boolean());
    }
    assert!(records.iter().any(|r| r["op"] == "crooks_like"));
}

#[test]
fn singular_partition_everywhere_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("far.toml");
    let text = TFIM2_EXACT.replace(
        "lambda = { kind = \"uniform\", min = -5.0, max = 5.0, points = 41 }",
        "lambda = { kind = \"single\", value = 100.0 }",
    );
    fs::write(&cfg, text).unwrap();
    let o = itqde(&["run", "--config", p(&cfg), "--output", p(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}
