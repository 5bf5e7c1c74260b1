//! End-to-end tests of the `zkstrip` binary: exit codes, file outputs,
//! row arithmetic and manifest reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zkstrip"))
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

fn small_config() -> Value {
    json!({
        "nx": 64,
        "ny": 4,
        "dt": 0.05,
        "t_end": 0.5,
        "stride": 5,
        "initial": {"amplitude": 0.01}
    })
}

fn run_ok(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

#[test]
fn run_writes_series_summary_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "cfg.json", &small_config());
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(run_ok(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(out_dir.join("series.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "t,l2,h1,h2,w1,w2,expk,flux,sup2,sup2_bound,tail");
    // floor(T / (dt * stride)) + 1 data rows
    assert_eq!(rows.len() - 1, (0.5f64 / (0.05 * 5.0)).floor() as usize + 1);

    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["l2_initial"].as_f64().unwrap() > 0.0);
    assert!(summary["l2_final"].as_f64().unwrap() <= summary["l2_initial"].as_f64().unwrap());

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_status"], 0);
    assert_eq!(manifest["command"], "run");
    assert_eq!(manifest["config"]["nx"], 64);
}

#[test]
fn manifest_echo_reproduces_csv_bitwise() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "cfg.json", &small_config());
    let out1 = tmp.path().join("out1");
    let st = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out1)
        .status()
        .unwrap();
    assert!(st.success());

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out1.join("manifest.json")).unwrap()).unwrap();
    let echoed = write_config(tmp.path(), "echo.json", &manifest["config"]);
    let out2 = tmp.path().join("out2");
    let st = bin()
        .args(["run", "--config"])
        .arg(&echoed)
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert!(st.success());

    let a = fs::read(out1.join("series.csv")).unwrap();
    let b = fs::read(out2.join("series.csv")).unwrap();
    assert_eq!(a, b, "re-run from manifest echo is not bitwise identical");
}

#[test]
fn invalid_configs_exit_1() {
    let tmp = tempfile::tempdir().unwrap();

    let mut bad = small_config();
    bad["dt"] = json!(-0.05);
    let cfg = write_config(tmp.path(), "bad_dt.json", &bad);
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(run_ok(&out), 1);

    let garbled = tmp.path().join("garbled.json");
    fs::write(&garbled, "{ not json").unwrap();
    let out = bin().args(["run", "--config"]).arg(&garbled).output().unwrap();
    assert_eq!(run_ok(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("parse"), "diagnostic missing: {err}");

    let missing = tmp.path().join("nope.json");
    let out = bin().args(["run", "--config"]).arg(&missing).output().unwrap();
    assert_eq!(run_ok(&out), 1);

    // usage errors are configuration failures, not blow-ups
    let out = bin().arg("no-such-command").output().unwrap();
    assert_eq!(run_ok(&out), 1);
}

#[test]
fn oversized_run_exits_2_with_blow_up_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "big.json",
        &json!({
            "nx": 64,
            "ny": 4,
            "dt": 0.05,
            "t_end": 5.0,
            "stride": 5,
            "initial": {"amplitude": 60.0, "center": 5.0}
        }),
    );
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(run_ok(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("blew up at t ="), "stderr: {err}");
    // manifest still written, recording the failure
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_status"], 2);
}

#[test]
fn check_data_gates() {
    let tmp = tempfile::tempdir().unwrap();

    // zero-amplitude data passes every gate
    let mut zero = small_config();
    zero["nx"] = json!(128);
    zero["ny"] = json!(8);
    zero["initial"] = json!({"amplitude": 0.0});
    zero["cs2"] = json!(0.0);
    let cfg = write_config(tmp.path(), "zero.json", &zero);
    let out = bin().args(["check-data", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(run_ok(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["threshold_32"].as_f64().unwrap(), 0.125);

    // ||u0|| = 0.2 fails the first smallness gate
    let grid = zkstrip::StripGrid::new(std::f64::consts::PI, 10.0 * std::f64::consts::PI, 128, 8)
        .unwrap();
    let shape = zkstrip::experiments::InitialData {
        amplitude: 1.0,
        center: 3.0,
        width: 1.0,
        mode: 1,
    }
    .build(grid)
    .unwrap();
    let amp = 0.2 / shape.l2_norm_sq().sqrt();
    let mut fat = small_config();
    fat["nx"] = json!(128);
    fat["ny"] = json!(8);
    fat["initial"] = json!({"amplitude": amp});
    fat["cs2"] = json!(0.0);
    let cfg = write_config(tmp.path(), "fat.json", &fat);
    let out = bin().args(["check-data", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(run_ok(&out), 1);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
    assert_eq!(report["l2_ok"], false);
    assert!((report["u0_l2"].as_f64().unwrap() - 0.2).abs() < 1e-9);
}

#[test]
fn verify_inequalities_deterministic_and_parallel() {
    let run = |threads: &str, trials: &str, seed: &str| {
        bin()
            .args([
                "verify-inequalities",
                "--trials",
                trials,
                "--seed",
                seed,
                "--threads",
                threads,
            ])
            .output()
            .unwrap()
    };
    let a = run("1", "60", "7");
    assert_eq!(run_ok(&a), 0, "stderr: {}", String::from_utf8_lossy(&a.stderr));
    let b = run("1", "60", "7");
    assert_eq!(a.stdout, b.stdout, "same seed must reproduce margins");
    let c = run("3", "60", "7");
    assert_eq!(run_ok(&c), 0);
    assert_eq!(a.stdout, c.stdout, "thread count changed the margins");

    let zero = run("1", "0", "7");
    assert_eq!(run_ok(&zero), 1);

    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["worst_steklov_margin"].as_f64().unwrap() >= -1e-10);
}

#[test]
fn fit_decay_small_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "decay.json",
        &json!({
            "nx": 128,
            "ny": 8,
            "t_end": 20.0,
            "stride": 5,
            "initial": {"amplitude": 0.005}
        }),
    );
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["fit-decay", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(run_ok(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!((summary["theoretical_rate"].as_f64().unwrap() - 0.1).abs() < 1e-12);
    assert!(summary["exp_weighted_fit"]["fitted_rate"].as_f64().unwrap() >= 0.09);
    assert_eq!(summary["gates"]["pass"], true);

    // a config failing the gates names the gate and exits 1
    let shape_norm = {
        let grid =
            zkstrip::StripGrid::new(std::f64::consts::PI, 10.0 * std::f64::consts::PI, 128, 8)
                .unwrap();
        zkstrip::experiments::InitialData {
            amplitude: 1.0,
            center: 3.0,
            width: 1.0,
            mode: 1,
        }
        .build(grid)
        .unwrap()
        .l2_norm_sq()
        .sqrt()
    };
    let cfg = write_config(
        tmp.path(),
        "fat_decay.json",
        &json!({
            "nx": 128,
            "ny": 8,
            "t_end": 20.0,
            "initial": {"amplitude": 0.2 / shape_norm}
        }),
    );
    let out = bin()
        .args(["fit-decay", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out2"))
        .output()
        .unwrap();
    assert_eq!(run_ok(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gate"), "stderr: {err}");
}

#[test]
fn converge_command() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "conv.json",
        &json!({
            "nx": 64,
            "ny": 4,
            "dt": 0.02,
            "t_end": 0.2,
            "nonlinear": false,
            "initial": {"amplitude": 0.1, "mode": 3}
        }),
    );
    // single mode count is a configuration error
    let out = bin()
        .args(["converge", "--modes", "8", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(run_ok(&out), 1);

    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["converge", "--modes", "4,8", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(run_ok(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    // linear run with data inside the smaller mode set: difference ~ 0
    let diffs = summary["successive_differences"].as_array().unwrap();
    assert!(diffs[0].as_f64().unwrap() < 1e-12);
}

#[test]
fn stride_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "cfg.json", &small_config());
    let out_dir = tmp.path().join("out");
    let st = bin()
        .args(["run", "--stride", "10", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = fs::read_to_string(out_dir.join("series.csv")).unwrap();
    // 10 steps, stride 10: initial snapshot + step 10
    assert_eq!(csv.lines().count() - 1, 2);
}
