//! `hks friedrichs`: run the linearized iteration next to the direct solve
//! and tabulate per-iterate errors.

use crate::commands::run::load_and_resolve;
use crate::config::{Overrides, Resolved};
use crate::exit_code;
use crate::report::{num, to_pretty};
use hks_core::besov::besov_norm;
use hks_core::equation::{specialize_parameters, EquationVariant};
use hks_core::error::HksError;
use hks_core::field::lp_norm;
use hks_core::friedrichs::{friedrichs_iterate, solve_direct};
use hks_core::oracles::{uniform_bound_value, IntegralBundle};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

pub fn friedrichs_command(config_path: &Path, overrides: &Overrides, n_iters: usize) -> i32 {
    if n_iters == 0 {
        eprintln!("error: --iters must be >= 1");
        return exit_code::CONFIG;
    }
    let resolved = match load_and_resolve(config_path, overrides) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return exit_code::CONFIG;
        }
    };
    match execute(&resolved, n_iters) {
        Ok(code) => code,
        Err(HksError::Divergence { t, context }) => {
            eprintln!(
                "error: iteration diverged at t = {t}{}",
                context.map(|c| format!(" ({c})")).unwrap_or_default()
            );
            exit_code::BLOW_UP
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code::CONFIG
        }
    }
}

fn execute(r: &Resolved, n_iters: usize) -> hks_core::Result<i32> {
    let params = match &r.variant {
        EquationVariant::Unified(p) => p.clone(),
        other => specialize_parameters(other)?,
    };
    let idx = r.theory.besov_index;
    let result = friedrichs_iterate(&r.u0, &params, r.solver.t_end, r.solver.dt, n_iters, idx)?;
    let reference = solve_direct(&r.u0, &params, r.solver.t_end, r.solver.dt)?;

    let bundle = IntegralBundle::from_params(&params)?;
    let u0_norm = besov_norm(&r.u0, idx)?;
    let bound = uniform_bound_value(u0_norm, &bundle, &r.theory)?;

    let mut table = String::from("iterate,l2_error,besov_lower_error,sup_besov\n");
    let mut rows = Vec::new();
    for (i, traj) in result.trajectories.iter().enumerate() {
        let diff = traj
            .terminal()
            .zip_with(reference.terminal(), |a, b| a - b)?;
        let l2 = lp_norm(&diff, 2.0)?;
        let blow = besov_norm(&diff, idx.lower())?;
        let sup = result.sup_norms[i];
        table.push_str(&format!("{},{l2:.17e},{blow:.17e},{sup:.17e}\n", i + 1));
        let mut row = Map::new();
        row.insert("besov_lower_error".into(), num(blow));
        row.insert("iterate".into(), Value::from(i + 1));
        row.insert("l2_error".into(), num(l2));
        row.insert("sup_besov".into(), num(sup));
        row.insert("within_uniform_bound".into(), Value::Bool(sup <= bound));
        rows.push(Value::Object(row));
    }

    let mut report = Map::new();
    report.insert("iterates".into(), Value::Array(rows));
    report.insert("u0_norm".into(), num(u0_norm));
    report.insert("uniform_bound".into(), num(bound));
    let report = Value::Object(report);

    print!("{table}");
    let out = r.out_dir.clone().or_else(|| Some(PathBuf::from(".")));
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("friedrichs.csv"), &table)?;
        std::fs::write(dir.join("friedrichs.json"), to_pretty(&report))?;
    }
    Ok(exit_code::OK)
}
