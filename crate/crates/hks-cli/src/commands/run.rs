//! `hks run`: integrate one configuration, persist its record, terminal
//! snapshot, and oracle report.

use crate::config::{load_config, resolve, Overrides, Resolved};
use crate::exit_code;
use crate::report::{num, to_pretty};
use crate::theory::{theory_summary, TheorySummary};
use hks_core::integrator::{integrate_with_trajectory, RunRecord, RunStatus};
use hks_core::oracles::minimal_c_for_uniform_bound;
use hks_core::snapshot::save_snapshot;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

pub fn run_command(config_path: &Path, overrides: &Overrides) -> i32 {
    let resolved = match load_and_resolve(config_path, overrides) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return exit_code::CONFIG;
        }
    };
    match execute(&resolved) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code::CONFIG
        }
    }
}

pub(crate) fn load_and_resolve(
    config_path: &Path,
    overrides: &Overrides,
) -> Result<Resolved, String> {
    let cfg = load_config(config_path).map_err(|e| e.to_string())?;
    resolve(&cfg, config_path, overrides).map_err(|e| e.to_string())
}

pub(crate) fn status_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::Completed => exit_code::OK,
        RunStatus::BlowUpDetected(_) => exit_code::BLOW_UP,
        RunStatus::StepUnderflow(_) => exit_code::UNDERFLOW,
    }
}

pub(crate) struct RunArtifacts {
    pub record: RunRecord,
    pub report: Value,
}

/// Integrate and assemble the run artifacts; shared with the sweep command.
pub(crate) fn run_resolved(r: &Resolved, out_dir: Option<&Path>) -> hks_core::Result<RunArtifacts> {
    let summary = theory_summary(r)?;
    let (record, trajectory) =
        integrate_with_trajectory(&r.u0, &r.variant, &r.solver, &r.monitors)?;
    let report = build_report(r, &summary, &record)?;

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("record.csv"), record.to_csv())?;
        if let Some(last) = trajectory.last() {
            save_snapshot(&dir.join("final.hks"), last)?;
        }
        std::fs::write(dir.join("report.json"), to_pretty(&report))?;
    }
    Ok(RunArtifacts { record, report })
}

fn execute(r: &Resolved) -> hks_core::Result<i32> {
    let out = r.out_dir.clone().or_else(|| Some(PathBuf::from(".")));
    let artifacts = run_resolved(r, out.as_deref())?;
    println!("{}", to_pretty(&artifacts.report).trim_end());
    Ok(status_code(artifacts.record.status))
}

pub(crate) fn observed_vs_predicted(record: &RunRecord, t_lower: f64) -> &'static str {
    match record.status {
        RunStatus::BlowUpDetected(t) if t < t_lower => "violated_lower_bound",
        RunStatus::BlowUpDetected(_) => "consistent",
        RunStatus::Completed => "consistent",
        RunStatus::StepUnderflow(_) => "n/a",
    }
}

fn build_report(
    r: &Resolved,
    summary: &TheorySummary,
    record: &RunRecord,
) -> hks_core::Result<Value> {
    let sup_besov = record.besov.iter().cloned().fold(f64::NAN, f64::max);
    let params = r.variant.monitor_params();
    let minimal_c = if sup_besov.is_finite() {
        minimal_c_for_uniform_bound(summary.configured_norm, &params, sup_besov)?
    } else {
        f64::NAN
    };

    let mut m = Map::new();
    m.insert(
        "observed".into(),
        Value::Object({
            let mut o = Map::new();
            o.insert(
                "blowup_time".into(),
                match record.status {
                    RunStatus::BlowUpDetected(t) => num(t),
                    _ => Value::Null,
                },
            );
            o.insert(
                "final_time".into(),
                num(*record.times.last().unwrap_or(&0.0)),
            );
            o.insert("minimal_c_for_bound".into(), num(minimal_c));
            o.insert("samples".into(), Value::from(record.len()));
            o.insert(
                "status".into(),
                Value::String(match record.status {
                    RunStatus::Completed => "Completed".to_string(),
                    RunStatus::BlowUpDetected(_) => "BlowUpDetected".to_string(),
                    RunStatus::StepUnderflow(_) => "StepUnderflow".to_string(),
                }),
            );
            o.insert("sup_besov".into(), num(sup_besov));
            o.insert(
                "vs_predicted".into(),
                Value::String(observed_vs_predicted(record, summary.t_lower_critical).into()),
            );
            o
        }),
    );
    m.insert("theory".into(), summary.to_value());
    Ok(Value::Object(m))
}
