use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oupinball"))
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_vec_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(o.stderr.trim_ascii())
        .unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&o.stderr)))
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn verdict<'a>(report: &'a Value, check: &str) -> &'a Value {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["check"] == check)
        .unwrap_or_else(|| panic!("no {check} verdict in {report}"))
}

/// Primary files, i.e. everything except the metadata sidecar.
fn primary_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "meta.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn centred_ball() -> Value {
    json!({"dim": 2, "lambda": 1.0, "obstacle": {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0}})
}

#[test]
fn print_schema_is_json() {
    let o = bin().arg("--print-schema").output().unwrap();
    assert!(o.status.success());
    let schema: Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["spec", "seed", "simulate", "sweep"] {
        assert!(schema["properties"].get(key).is_some(), "{key}");
    }
}

#[test]
fn bounds_catalogue_and_reruns_are_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({"command": "bounds", "spec": centred_ball()}),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run("bounds", &cfg, &a, &[]).status.success());
    assert!(run("bounds", &cfg, &b, &[]).status.success());
    assert_eq!(primary_files(&a), primary_files(&b));

    let csv = fs::read_to_string(a.join("catalogue.csv")).unwrap();
    assert!(csv.starts_with("anchor,side,quantity,value,"));
    assert!(csv.contains("centered/lower,lower,poincare_constant,5.0000000000000000e-1,"));
    assert!(csv.contains("\r\n"));
    let meta = read_json(a.join("meta.json"));
    assert_eq!(meta["command"], "bounds");
    assert!(meta["created_unix_seconds"].as_u64().unwrap() > 0);

    let report = read_json(a.join("crosscheck.json"));
    assert_eq!(verdict(&report, "homogeneity")["status"], "PASS");
    assert_eq!(report["catalogue"]["best_explicit_lower"]["anchor"], "centered/lower");
}

#[test]
fn free_space_row_is_gaussian() {
    let tmp = TempDir::new().unwrap();
    let spec = json!({"dim": 3, "lambda": 2.0, "obstacle": {"kind": "none"}});
    let cfg = write_config(tmp.path(), "c.json", &json!({"spec": spec}));
    assert!(run("bounds", &cfg, tmp.path(), &[]).status.success());
    let cat = read_json(tmp.path().join("catalogue.json"));
    assert_eq!(cat["best_explicit_upper"]["anchor"], "gaussian/exact");
    assert_eq!(cat["best_explicit_upper"]["value"], 0.25);
}

#[test]
fn trap_catalogue_has_test_function_row() {
    let tmp = TempDir::new().unwrap();
    let spec = json!({"dim": 2, "lambda": 1.0, "obstacle": {"kind": "trap", "y": 4.0, "arm": 1.0}});
    let cfg = write_config(tmp.path(), "c.json", &json!({"spec": spec}));
    assert!(run("bounds", &cfg, tmp.path(), &[]).status.success());
    let cat = read_json(tmp.path().join("catalogue.json"));
    let row = cat["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["anchor"] == "trap/test-function-lower")
        .unwrap();
    assert_eq!(row["applicable"], true);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let unknown = write_config(tmp.path(), "u.json", &json!({"spec": centred_ball(), "sedd": 1}));
    let o = run("bounds", &unknown, tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "invalid_config");

    let bad_spec = json!({"dim": 2, "lambda": -1.0, "obstacle": {"kind": "none"}});
    let bad = write_config(tmp.path(), "b.json", &json!({"spec": bad_spec}));
    assert_eq!(run("bounds", &bad, tmp.path(), &[]).status.code(), Some(2));

    let mismatch = write_config(
        tmp.path(),
        "m.json",
        &json!({"command": "spectral", "spec": centred_ball()}),
    );
    assert_eq!(run("bounds", &mismatch, tmp.path(), &[]).status.code(), Some(2));
}

#[test]
fn monte_carlo_needs_a_seed() {
    let tmp = TempDir::new().unwrap();
    let exit = json!({"lambda": 1.0, "r": 1.0, "dt": 0.001, "n_paths": 10, "thetas": [1.0]});
    let cfg = write_config(tmp.path(), "c.json", &json!({"exit_time": exit}));
    let o = run("exit-time", &cfg, &tmp.path().join("x"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("seed"));
    assert!(run("exit-time", &cfg, &tmp.path().join("y"), &["--seed", "3"])
        .status
        .success());
}

#[test]
fn missing_config_file_is_io_error() {
    let tmp = TempDir::new().unwrap();
    let o = run("bounds", &tmp.path().join("absent.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "io");
}

#[test]
fn split_grid_exits_with_three() {
    let tmp = TempDir::new().unwrap();
    let spec = json!({"dim": 2, "lambda": 1.0, "obstacle": {"kind": "shell", "center": [0.0, 0.0], "inner": 1.0, "outer": 1.12}});
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({"spec": spec, "spectral": {"h": [0.4, 0.2]}}),
    );
    let o = run("spectral", &cfg, tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "domain_disconnected");
}

#[test]
fn spectral_centred_ball_compares_with_radial_oracle() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({"spec": centred_ball(), "spectral": {"h": [0.2, 0.1]}}),
    );
    let o = run("spectral", &cfg, tmp.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(tmp.path().join("crosscheck.json"));
    for check in ["inside-envelope", "sandwich", "radial-oracle"] {
        assert_eq!(verdict(&report, check)["status"], "PASS", "{check}");
    }
    assert_eq!(
        verdict(&report, "sandwich")["references"][1],
        "catalogue:centered/lower"
    );
    let table = fs::read_to_string(tmp.path().join("refinement.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn simulate_is_thread_count_independent() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({
            "seed": 5,
            "spec": {"dim": 2, "lambda": 1.0, "obstacle": {"kind": "none"}},
            "simulate": {
                "dt": 0.001, "horizon": 10.0, "n_paths": 400, "start": [-1.0, 0.0],
                "target": {"kind": "half_space", "axis": 0, "threshold": 0.0},
                "thetas": [0.25, 0.5]
            }
        }),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run("simulate", &cfg, &a, &["--threads", "1"]).status.success());
    assert!(run("simulate", &cfg, &b, &["--threads", "3"]).status.success());
    assert_eq!(primary_files(&a), primary_files(&b));
    let report = read_json(a.join("crosscheck.json"));
    assert_eq!(verdict(&report, "domain-invariant")["status"], "PASS");
    assert_eq!(verdict(&report, "hitting-time-ks")["status"], "PASS");
    assert_eq!(report["mc"].as_array().unwrap().len(), 2);

    // a different seed changes the samples
    let c = tmp.path().join("c");
    assert!(run("simulate", &cfg, &c, &["--seed", "6"]).status.success());
    assert_ne!(
        fs::read(a.join("paths.csv")).unwrap(),
        fs::read(c.join("paths.csv")).unwrap()
    );
}

#[test]
fn exit_time_table_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let exit = json!({"lambda": 1.0, "r": 1.0, "dt": 0.001, "n_paths": 4000, "thetas": [0.5, 1.0, 2.0]});
    let cfg = write_config(tmp.path(), "c.json", &json!({"seed": 21, "exit_time": exit}));
    assert!(run("exit-time", &cfg, tmp.path(), &[]).status.success());
    let table = fs::read_to_string(tmp.path().join("exit_time.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    let summary = read_json(tmp.path().join("exit_time.json"));
    let beta = summary["beta_star"].as_f64().unwrap();
    assert!(beta > 0.0 && beta <= std::f64::consts::PI.powi(2) / 8.0);
    for v in summary["report"]["verdicts"].as_array().unwrap() {
        assert_eq!(v["status"], "PASS", "{v}");
    }
}

#[test]
fn cheeger_trap_sweep_explodes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({"cheeger": {"trap_y": [3, 4, 5, 6, 7, 8, 9, 10], "trap_arm": 1.0}}),
    );
    assert!(run("cheeger", &cfg, tmp.path(), &[]).status.success());
    let report = read_json(tmp.path().join("crosscheck.json"));
    for check in ["trap-monotone", "trap-chain", "trap-explosion"] {
        assert_eq!(verdict(&report, check)["status"], "PASS", "{check}");
    }
    assert_eq!(
        fs::read_to_string(tmp.path().join("trap.csv")).unwrap().lines().count(),
        9
    );
}

#[test]
fn cheeger_sets_need_a_spec() {
    let tmp = TempDir::new().unwrap();
    let set = json!({"kind": "square_shadow", "a": 4.0, "r": 2.0, "u": 2.0});
    let cfg = write_config(tmp.path(), "c.json", &json!({"cheeger": {"sets": [set]}}));
    assert_eq!(run("cheeger", &cfg, tmp.path(), &[]).status.code(), Some(2));
}

#[test]
fn stiffness_sweep_is_homogeneous() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({
            "spec": {"dim": 2, "lambda": 1.0, "obstacle": {"kind": "none"}},
            "spectral": {"h": [0.4, 0.2]},
            "sweep": {"parameter": "lambda", "values": [0.5, 1.0, 2.0]}
        }),
    );
    let o = run("sweep", &cfg, tmp.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(tmp.path().join("summary.json"));
    let checks: Vec<&str> = summary["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["check"].as_str().unwrap())
        .collect();
    assert!(checks.contains(&"homogeneity-spectral"), "{checks:?}");
    assert_eq!(
        fs::read_to_string(tmp.path().join("summary.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
    for i in 0..3 {
        let p = read_json(tmp.path().join(format!("point_{i:03}.json")));
        assert_eq!(p["index"], i);
        assert_eq!(p["report"]["spec"]["lambda"], [0.5, 1.0, 2.0][i]);
    }
}
