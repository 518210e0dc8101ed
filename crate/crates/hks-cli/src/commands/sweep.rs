//! `hks sweep`: Cartesian parameter sweeps over a base configuration with
//! bounded parallelism and a consolidated index.

use crate::commands::run::{observed_vs_predicted, run_resolved, RunArtifacts};
use crate::config::{parse_config, resolve, ConfigError, Overrides};
use crate::exit_code;
use crate::theory::theory_summary;
use hks_core::integrator::RunStatus;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    /// Base experiment config, relative to the sweep file.
    base: PathBuf,
    max_parallel: Option<usize>,
    #[serde(default)]
    strict_bounds: bool,
    axes: Vec<AxisSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisSpec {
    /// Dotted path into the base config, e.g. `variant.lambda`.
    path: String,
    values: Vec<toml::Value>,
}

pub fn sweep_command(
    sweep_path: &Path,
    overrides: &Overrides,
    parallel_flag: Option<usize>,
    strict_flag: bool,
) -> i32 {
    match execute(sweep_path, overrides, parallel_flag, strict_flag) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            exit_code::CONFIG
        }
    }
}

fn set_path(root: &mut toml::Value, path: &str, value: toml::Value) -> Result<(), String> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| format!("'{path}': segment '{part}' is not a table"))?;
        if i + 1 == parts.len() {
            table.insert((*part).to_string(), value);
            return Ok(());
        }
        node = table
            .entry((*part).to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    unreachable!("empty axis path rejected earlier")
}

fn toml_value_to_string(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

struct RowResult {
    run_id: usize,
    values: Vec<String>,
    line: String,
    violated: bool,
    produced: bool,
}

fn execute(
    sweep_path: &Path,
    overrides: &Overrides,
    parallel_flag: Option<usize>,
    strict_flag: bool,
) -> Result<i32, String> {
    let text = std::fs::read_to_string(sweep_path)
        .map_err(|e| format!("{}: {e}", sweep_path.display()))?;
    let spec: SweepSpec =
        toml::from_str(&text).map_err(|e| format!("{}: {e}", sweep_path.display()))?;
    if spec.axes.is_empty() {
        return Err(format!("{}: axes list is empty", sweep_path.display()));
    }
    for axis in &spec.axes {
        if axis.path.is_empty() || axis.values.is_empty() {
            return Err(format!(
                "{}: axis '{}' needs a path and at least one value",
                sweep_path.display(),
                axis.path
            ));
        }
    }

    let base_path = if spec.base.is_absolute() {
        spec.base.clone()
    } else {
        sweep_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&spec.base)
    };
    let base_text =
        std::fs::read_to_string(&base_path).map_err(|e| format!("{}: {e}", base_path.display()))?;
    let base_value: toml::Value =
        toml::from_str(&base_text).map_err(|e| format!("{}: {e}", base_path.display()))?;

    let total: usize = spec.axes.iter().map(|a| a.values.len()).product();
    println!("sweep: {} axes, {total} combinations", spec.axes.len());

    let out_root = overrides
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("HKS_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_root).map_err(|e| format!("{}: {e}", out_root.display()))?;

    // materialize every combination up front (row order is the index order)
    let mut combos: Vec<Vec<(String, toml::Value)>> = vec![Vec::new()];
    for axis in &spec.axes {
        let mut next = Vec::with_capacity(combos.len() * axis.values.len());
        for combo in &combos {
            for v in &axis.values {
                let mut c = combo.clone();
                c.push((axis.path.clone(), v.clone()));
                next.push(c);
            }
        }
        combos = next;
    }

    let threads = parallel_flag
        .or(spec.max_parallel)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;

    let rows: Vec<RowResult> = pool.install(|| {
        use rayon::prelude::*;
        combos
            .par_iter()
            .enumerate()
            .map(|(run_id, combo)| {
                run_one(run_id, combo, &base_value, &base_path, &out_root, overrides)
            })
            .collect()
    });

    let mut index = String::new();
    index.push_str("run,");
    for axis in &spec.axes {
        index.push_str(&axis.path);
        index.push(',');
    }
    index.push_str(
        "status,blowup_t,threshold_satisfied,t_lower_critical,t_lower_noncritical,vs_predicted,sup_besov,uniform_bound\n",
    );
    let mut all_produced = true;
    let mut any_violated = false;
    for row in &rows {
        index.push_str(&format!("{},", row.run_id));
        for v in &row.values {
            index.push_str(v);
            index.push(',');
        }
        index.push_str(&row.line);
        index.push('\n');
        all_produced &= row.produced;
        any_violated |= row.violated;
    }
    std::fs::write(out_root.join("index.csv"), &index)
        .map_err(|e| format!("{}: {e}", out_root.display()))?;
    print!("{index}");

    let strict = strict_flag || spec.strict_bounds;
    if strict && any_violated {
        eprintln!("error: observed blow-up before the predicted lower bound (strict mode)");
        return Ok(exit_code::CONFIG);
    }
    Ok(if all_produced {
        exit_code::OK
    } else {
        exit_code::CONFIG
    })
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.12e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn run_one(
    run_id: usize,
    combo: &[(String, toml::Value)],
    base_value: &toml::Value,
    base_path: &Path,
    out_root: &Path,
    overrides: &Overrides,
) -> RowResult {
    let values: Vec<String> = combo.iter().map(|(_, v)| toml_value_to_string(v)).collect();
    let mut doc = base_value.clone();
    let row = |line: String, violated: bool, produced: bool| RowResult {
        run_id,
        values: values.clone(),
        line,
        violated,
        produced,
    };

    for (path, value) in combo {
        if let Err(e) = set_path(&mut doc, path, value.clone()) {
            return row(format!("error: {e},,,,,,,"), false, false);
        }
    }
    let text = match toml::to_string(&doc) {
        Ok(t) => t,
        Err(e) => return row(format!("error: {e},,,,,,,"), false, false),
    };
    let parsed = match parse_config(&text, base_path) {
        Ok(p) => p,
        Err(ConfigError(msg)) => return row(format!("error: {msg},,,,,,,"), false, false),
    };
    let mut per_run = overrides.clone();
    per_run.out_dir = None; // runs live under the sweep root regardless
    let resolved = match resolve(&parsed, base_path, &per_run) {
        Ok(r) => r,
        Err(ConfigError(msg)) => return row(format!("error: {msg},,,,,,,"), false, false),
    };

    let summary = match theory_summary(&resolved) {
        Ok(s) => s,
        Err(e) => return row(format!("error: {e},,,,,,,"), false, false),
    };
    let dir = out_root.join(format!("run_{run_id:03}"));
    let RunArtifacts { record, .. } = match run_resolved(&resolved, Some(&dir)) {
        Ok(a) => a,
        Err(e) => return row(format!("error: {e},,,,,,,"), false, false),
    };

    let (status, blowup_t) = match record.status {
        RunStatus::Completed => ("Completed".to_string(), String::new()),
        RunStatus::BlowUpDetected(t) => ("BlowUpDetected".to_string(), fmt(t)),
        RunStatus::StepUnderflow(t) => ("StepUnderflow".to_string(), fmt(t)),
    };
    let verdict = observed_vs_predicted(&record, summary.t_lower_critical);
    let sup_besov = record.besov.iter().cloned().fold(f64::NAN, f64::max);
    let line = format!(
        "{status},{blowup_t},{},{},{},{verdict},{},{}",
        summary.threshold_critical.satisfied,
        fmt(summary.t_lower_critical),
        fmt(summary.t_lower_noncritical),
        fmt(sup_besov),
        fmt(summary.uniform_bound),
    );
    row(line, verdict == "violated_lower_bound", true)
}
