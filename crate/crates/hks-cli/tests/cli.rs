//! End-to-end tests of the `hks` binary: exit codes, emitted files, and the
//! documented index/report formats.

use hks_core::integrator::{RunRecord, RunStatus};
use hks_core::snapshot::load_snapshot;
use std::path::Path;
use std::process::{Command, Output};

fn hks() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hks"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn run_ok(cmd: &mut Command) -> Output {
    cmd.output().expect("binary spawns")
}

const EQUILIBRIUM: &str = r#"
[grid]
dim = 1
n = 64

[variant]
kind = "classical"

[initial]
preset = "constant"
offset = 0.3

[solver]
dt = 1e-2
t_end = 0.5
record_every = 5
"#;

const SHOCK: &str = r#"
[grid]
dim = 1
n = 128

[variant]
kind = "classical"

[initial]
preset = "single_mode"
offset = 0.5
amplitude = 0.4
wavenumber = 1

[solver]
dt = 2e-3
dt_min = 1e-12
t_end = 10.0
grad_blowup_threshold = 1e2
record_every = 50
"#;

#[test]
fn run_equilibrium_exits_zero_with_flat_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("eq.toml");
    write(&cfg, EQUILIBRIUM);
    let out_dir = dir.path().join("out");
    let output = run_ok(hks().args([
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let record =
        RunRecord::from_csv(&std::fs::read_to_string(out_dir.join("record.csv")).unwrap()).unwrap();
    assert_eq!(record.status, RunStatus::Completed);
    for v in &record.linf_u {
        assert!((v - 0.3).abs() < 1e-12);
    }
    for v in &record.mass {
        assert!((v - record.mass[0]).abs() < 1e-12);
    }

    // every emitted file is re-readable
    let snap = load_snapshot(&out_dir.join("final.hks")).unwrap();
    assert_eq!(snap.grid().n(), 64);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["observed"]["status"], "Completed");
}

#[test]
fn run_shock_preset_exits_two_with_blowup_stamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("shock.toml");
    write(&cfg, SHOCK);
    let out_dir = dir.path().join("out");
    let output = run_ok(hks().args([
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["observed"]["status"], "BlowUpDetected");
    assert!(report["observed"]["blowup_time"].as_f64().unwrap() > 0.0);
}

#[test]
fn malformed_config_exits_one_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    write(&cfg, &EQUILIBRIUM.replace("dt = 1e-2", "dt = -1e-2"));
    let output = run_ok(hks().args(["run", "--config", cfg.to_str().unwrap()]));
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("solver"), "stderr: {stderr}");
    assert!(stderr.contains("dt"), "stderr: {stderr}");
    assert!(stderr.contains("bad.toml"), "stderr: {stderr}");
}

#[test]
fn runs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("eq.toml");
    write(&cfg, EQUILIBRIUM);
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let output = run_ok(hks().args([
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]));
        assert_eq!(output.status.code(), Some(0));
        outputs.push(std::fs::read(out_dir.join("record.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn snapshot_roundtrip_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("eq.toml");
    write(&cfg, EQUILIBRIUM);
    let out_dir = dir.path().join("out");
    run_ok(hks().args([
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    // feed the terminal snapshot back in as initial data
    let cfg2 = dir.path().join("resume.toml");
    write(
        &cfg2,
        &EQUILIBRIUM.replace(
            "preset = \"constant\"\noffset = 0.3",
            &format!("snapshot = \"{}\"", out_dir.join("final.hks").display()),
        ),
    );
    let output = run_ok(hks().args([
        "run",
        "--config",
        cfg2.to_str().unwrap(),
        "--out",
        dir.path().join("out2").to_str().unwrap(),
    ]));
    assert_eq!(output.status.code(), Some(0), "{output:?}");
}

#[test]
fn check_is_deterministic_and_zero_schedules_pass_everything() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("check.toml");
    write(
        &cfg,
        r#"
[grid]
dim = 1
n = 64

[variant]
kind = "unified"
alpha = { kind = "constant", value = 0.0 }
beta = { kind = "constant", value = 0.0 }
gamma = { kind = "constant", value = 0.0 }
xi = { kind = "constant", value = 0.0 }

[initial]
preset = "single_mode"
offset = 0.2
amplitude = 0.1

[solver]
dt = 1e-3
t_end = 1.0
"#,
    );
    let a = run_ok(hks().args(["check", "--config", cfg.to_str().unwrap()]));
    let b = run_ok(hks().args(["check", "--config", cfg.to_str().unwrap()]));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    for cond in report["conditions"].as_array().unwrap() {
        assert_eq!(cond["satisfied"], true, "{cond}");
    }
    assert_eq!(report["t_lower_critical"], "inf");
    assert_eq!(report["t_lower_noncritical"], "inf");
}

#[test]
fn check_reports_lambda_star_for_damped_variant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("damped.toml");
    write(
        &cfg,
        r#"
[grid]
dim = 1
n = 64

[variant]
kind = "damped"
lambda = 400.0

[initial]
preset = "single_mode"
offset = 0.5
amplitude = 0.4

[solver]
dt = 1e-3
t_end = 0.1
"#,
    );
    let out = run_ok(hks().args(["check", "--config", cfg.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let star = report["lambda_star"].as_f64().unwrap();
    assert!(star > 0.0);
    // the damping-rate condition shows up among the evaluated conditions
    let conds = report["conditions"].as_array().unwrap();
    assert!(conds.iter().any(|c| c["condition"] == "lambda_sufficiency"));
}

#[test]
fn friedrichs_constant_initial_data_has_zero_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("f.toml");
    write(
        &cfg,
        r#"
[grid]
dim = 1
n = 32

[variant]
kind = "sensitivity_adjusted"
rho = { kind = "constant", value = 0.3 }

[initial]
preset = "constant"
offset = 0.4

[solver]
dt = 1e-2
t_end = 0.2
"#,
    );
    let out_dir = dir.path().join("out");
    let output = run_ok(hks().args([
        "friedrichs",
        "--config",
        cfg.to_str().unwrap(),
        "--iters",
        "4",
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let table = std::fs::read_to_string(out_dir.join("friedrichs.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iterate,l2_error,besov_lower_error,sup_besov"
    );
    for line in lines {
        let l2: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(l2 < 1e-12, "{line}");
    }

    // zero iterations is a usage error
    let bad = run_ok(hks().args([
        "friedrichs",
        "--config",
        cfg.to_str().unwrap(),
        "--iters",
        "0",
    ]));
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn sweep_lambda_shows_monotone_transition() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("damped.toml");
    write(
        &base,
        r#"
[grid]
dim = 1
n = 128

[variant]
kind = "damped"
lambda = 1.0

[initial]
preset = "single_mode"
offset = 0.5
amplitude = 0.4

[solver]
dt = 2e-3
dt_min = 1e-12
t_end = 12.0
grad_blowup_threshold = 1e2
record_every = 50
"#,
    );
    let sweep = dir.path().join("sweep.toml");
    write(
        &sweep,
        r#"
base = "damped.toml"
max_parallel = 4

[[axes]]
path = "variant.lambda"
values = [0.02, 0.1, 0.5, 2.0]
"#,
    );
    let out_dir = dir.path().join("out");
    let output = run_ok(hks().args([
        "sweep",
        "--config",
        sweep.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let index = std::fs::read_to_string(out_dir.join("index.csv")).unwrap();
    let rows: Vec<&str> = index.lines().skip(1).collect();
    assert_eq!(rows.len(), 4, "one row per combination:\n{index}");
    let statuses: Vec<&str> = rows.iter().map(|r| r.split(',').nth(2).unwrap()).collect();
    assert_eq!(statuses[0], "BlowUpDetected", "{index}");
    assert_eq!(*statuses.last().unwrap(), "Completed", "{index}");
    // once the damping rate is large enough to complete, larger rates stay so
    let first_completed = statuses.iter().position(|s| *s == "Completed").unwrap();
    for s in &statuses[first_completed..] {
        assert_eq!(*s, "Completed", "{index}");
    }
    // per-run artifacts exist
    for i in 0..4 {
        assert!(out_dir.join(format!("run_{i:03}/record.csv")).exists());
    }
}

#[test]
fn sweep_rational_sensitivity_flips_threshold_flag() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("rho.toml");
    write(
        &base,
        r#"
[grid]
dim = 1
n = 32

[variant]
kind = "sensitivity_adjusted"
rho = { kind = "rational", a = 1.0, b = 1.0 }

[initial]
preset = "single_mode"
offset = 0.5
amplitude = 0.4

[solver]
dt = 1e-3
t_end = 0.05
"#,
    );
    let sweep = dir.path().join("sweep.toml");
    write(
        &sweep,
        r#"
base = "rho.toml"

[[axes]]
path = "variant.rho.a"
values = [0.1, 1.0, 10.0]
"#,
    );
    let out_dir = dir.path().join("out");
    let output = run_ok(hks().args([
        "sweep",
        "--config",
        sweep.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--constant-C",
        "0.128",
    ]));
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let index = std::fs::read_to_string(out_dir.join("index.csv")).unwrap();
    let flags: Vec<&str> = index
        .lines()
        .skip(1)
        .map(|r| r.split(',').nth(4).unwrap())
        .collect();
    // shrinking the total integral (larger a) eventually satisfies the
    // smallness condition; the flag flips once and stays
    assert_eq!(flags, vec!["false", "false", "true"], "{index}");
}

#[test]
fn step_underflow_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("steep.toml");
    write(
        &cfg,
        r#"
[grid]
dim = 1
n = 64

[variant]
kind = "classical"

[initial]
preset = "single_mode"
offset = 0.5
amplitude = 5.0

[solver]
dt = 0.1
dt_min = 0.05
t_end = 1.0
"#,
    );
    let output = run_ok(hks().args([
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]));
    assert_eq!(output.status.code(), Some(3), "{output:?}");
}

#[test]
fn sweep_two_axes_emits_product_rows() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("eq.toml");
    write(&base, EQUILIBRIUM);
    let sweep = dir.path().join("sweep.toml");
    write(
        &sweep,
        r#"
base = "eq.toml"
max_parallel = 2

[[axes]]
path = "initial.offset"
values = [0.2, 0.3]

[[axes]]
path = "solver.dt"
values = [0.01, 0.005]
"#,
    );
    let out_dir = dir.path().join("out");
    let output = run_ok(hks().args([
        "sweep",
        "--config",
        sweep.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let index = std::fs::read_to_string(out_dir.join("index.csv")).unwrap();
    assert_eq!(index.lines().count(), 1 + 4, "{index}");
    let header = index.lines().next().unwrap();
    assert!(
        header.starts_with("run,initial.offset,solver.dt,status"),
        "{header}"
    );
}

#[test]
fn sweep_with_empty_axes_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("eq.toml");
    write(&base, EQUILIBRIUM);
    let sweep = dir.path().join("sweep.toml");
    write(&sweep, "base = \"eq.toml\"\naxes = []\n");
    let output = run_ok(hks().args(["sweep", "--config", sweep.to_str().unwrap()]));
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("axes"), "{stderr}");
}

#[test]
fn out_dir_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("eq.toml");
    write(&cfg, EQUILIBRIUM);
    let out_dir = dir.path().join("from_env");
    let output = hks()
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("HKS_OUT_DIR", out_dir.to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(out_dir.join("record.csv").exists());
}
