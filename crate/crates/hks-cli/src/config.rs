//! TOML experiment configuration and its resolution into core types.

use hks_core::besov::BesovIndex;
use hks_core::equation::EquationVariant;
use hks_core::field::RealField;
use hks_core::grid::TorusGrid;
use hks_core::integrator::{MonitorSet, SolverConfig};
use hks_core::oracles::TheoryConfig;
use hks_core::schedule::ParameterSchedule;
use hks_core::snapshot::load_snapshot;
use hks_core::spectral::{dealias_cutoff, inverse_transform, Complex64, SpectralField};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Errors carry the config file name and the field or parse position.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn bad(file: &Path, what: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{}: {what}", file.display()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub variant: VariantSpec,
    pub initial: InitialSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub theory: TheorySpec,
    #[serde(default)]
    pub monitors: MonitorSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSpec {
    pub kind: String,
    pub lambda: Option<f64>,
    #[serde(default)]
    pub xi_positive: bool,
    pub rho: Option<ScheduleSpec>,
    pub alpha: Option<ScheduleSpec>,
    pub beta: Option<ScheduleSpec>,
    pub gamma: Option<ScheduleSpec>,
    pub xi: Option<ScheduleSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: String,
    pub value: Option<f64>,
    pub amplitude: Option<f64>,
    pub rate: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub points: Option<Vec<(f64, f64)>>,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub preset: Option<String>,
    pub snapshot: Option<PathBuf>,
    #[serde(default)]
    pub offset: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_wavenumber")]
    pub wavenumber: i64,
    pub amplitude2: Option<f64>,
    pub wavenumber2: Option<i64>,
    pub width: Option<f64>,
}

fn default_amplitude() -> f64 {
    0.1
}

fn default_wavenumber() -> i64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub dt: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_threshold")]
    pub grad_blowup_threshold: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_dt_min() -> f64 {
    1e-10
}

fn default_cfl() -> f64 {
    0.4
}

fn default_threshold() -> f64 {
    1e4
}

fn default_record_every() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TheorySpec {
    pub constant_c: Option<f64>,
    pub besov: Option<BesovSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSpec {
    #[serde(default = "default_true")]
    pub besov: bool,
    #[serde(default = "default_true")]
    pub homogeneous: bool,
    #[serde(default = "default_true")]
    pub criteria: bool,
}

fn default_true() -> bool {
    true
}

impl Default for MonitorSpec {
    fn default() -> Self {
        Self {
            besov: true,
            homogeneous: true,
            criteria: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

/// Everything a command needs, resolved into core types.
#[derive(Debug)]
pub struct Resolved {
    pub grid: TorusGrid,
    pub variant: EquationVariant,
    pub u0: RealField,
    pub solver: SolverConfig,
    pub monitors: MonitorSet,
    pub theory: TheoryConfig,
    pub out_dir: Option<PathBuf>,
}

/// CLI-level overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub constant_c: Option<f64>,
    pub seed: Option<u64>,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(path, e))?;
    parse_config(&text, path)
}

pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig> {
    // toml errors carry line/column spans in their Display output
    toml::from_str(text).map_err(|e| bad(path, e))
}

fn schedule_from_spec(spec: &ScheduleSpec, file: &Path, field: &str) -> Result<ParameterSchedule> {
    let need = |opt: Option<f64>, name: &str| {
        opt.ok_or_else(|| {
            bad(
                file,
                format!("{field}: '{name}' is required for kind '{}'", spec.kind),
            )
        })
    };
    let base = match spec.kind.as_str() {
        "constant" => ParameterSchedule::constant(need(spec.value, "value")?),
        "exp_decay" => {
            ParameterSchedule::exp_decay(need(spec.amplitude, "amplitude")?, need(spec.rate, "rate")?)
                .map_err(|e| bad(file, format!("{field}: {e}")))?
        }
        "rational" => ParameterSchedule::rational(need(spec.a, "a")?, need(spec.b, "b")?)
            .map_err(|e| bad(file, format!("{field}: {e}")))?,
        "tabulated" => {
            let points = spec
                .points
                .clone()
                .ok_or_else(|| bad(file, format!("{field}: 'points' is required for tabulated")))?;
            ParameterSchedule::tabulated(points).map_err(|e| bad(file, format!("{field}: {e}")))?
        }
        other => {
            return Err(bad(
                file,
                format!("{field}: unknown schedule kind '{other}' (constant | exp_decay | rational | tabulated)"),
            ))
        }
    };
    Ok(match spec.scale {
        Some(s) => base.scaled(s),
        None => base,
    })
}

fn variant_from_spec(spec: &VariantSpec, file: &Path) -> Result<EquationVariant> {
    let variant = match spec.kind.as_str() {
        "classical" => EquationVariant::Classical,
        "sensitivity_adjusted" => {
            let rho = spec
                .rho
                .as_ref()
                .ok_or_else(|| bad(file, "variant.rho is required for sensitivity_adjusted"))?;
            EquationVariant::SensitivityAdjusted(schedule_from_spec(rho, file, "variant.rho")?)
        }
        "damped" => EquationVariant::Damped(
            spec.lambda
                .ok_or_else(|| bad(file, "variant.lambda is required for damped"))?,
        ),
        "transformed" => {
            let lambda = spec
                .lambda
                .ok_or_else(|| bad(file, "variant.lambda is required for transformed"))?;
            if spec.xi_positive {
                let p = hks_core::equation::transformed_params_with_xi_sign(lambda, true);
                EquationVariant::Unified(p)
            } else {
                EquationVariant::Transformed(lambda)
            }
        }
        "unified" => {
            let get = |s: &Option<ScheduleSpec>, name: &str| -> Result<ParameterSchedule> {
                let s = s
                    .as_ref()
                    .ok_or_else(|| bad(file, format!("variant.{name} is required for unified")))?;
                schedule_from_spec(s, file, &format!("variant.{name}"))
            };
            EquationVariant::Unified(hks_core::HksParams {
                alpha: get(&spec.alpha, "alpha")?,
                beta: get(&spec.beta, "beta")?,
                gamma: get(&spec.gamma, "gamma")?,
                xi: get(&spec.xi, "xi")?,
            })
        }
        other => {
            return Err(bad(
                file,
                format!(
                    "variant.kind '{other}' unknown \
                     (unified | classical | sensitivity_adjusted | damped | transformed)"
                ),
            ))
        }
    };
    variant.validate().map_err(|e| bad(file, e))?;
    Ok(variant)
}

fn initial_field(
    spec: &InitialSpec,
    grid: TorusGrid,
    file: &Path,
    base_dir: &Path,
    seed: u64,
) -> Result<RealField> {
    if let Some(snap) = &spec.snapshot {
        if spec.preset.is_some() {
            return Err(bad(
                file,
                "initial: give either 'preset' or 'snapshot', not both",
            ));
        }
        let path = if snap.is_absolute() {
            snap.clone()
        } else {
            base_dir.join(snap)
        };
        let field = load_snapshot(&path).map_err(|e| bad(&path, e))?;
        if field.grid() != grid {
            return Err(bad(
                file,
                format!(
                    "snapshot grid (dim {}, n {}) does not match [grid] (dim {}, n {})",
                    field.grid().dim(),
                    field.grid().n(),
                    grid.dim(),
                    grid.n()
                ),
            ));
        }
        return Ok(field);
    }
    let preset = spec
        .preset
        .as_deref()
        .ok_or_else(|| bad(file, "initial: one of 'preset' or 'snapshot' is required"))?;
    let m = spec.offset;
    let a = spec.amplitude;
    let k = spec.wavenumber as f64;
    let field = match preset {
        "constant" => RealField::constant(grid, m),
        "single_mode" => match grid.dim() {
            1 => RealField::from_fn(grid, |x, _| m + a * (k * x).sin()),
            _ => RealField::from_fn(grid, |x, y| m + a * (k * x).sin() * (k * y).cos()),
        },
        "two_mode" => {
            let a2 = spec.amplitude2.unwrap_or(a / 2.0);
            let k2 = spec.wavenumber2.unwrap_or(spec.wavenumber + 2) as f64;
            match grid.dim() {
                1 => RealField::from_fn(grid, |x, _| m + a * (k * x).sin() + a2 * (k2 * x).cos()),
                _ => RealField::from_fn(grid, |x, y| m + a * (k * x).sin() + a2 * (k2 * y).cos()),
            }
        }
        "gaussian_bump" => gaussian_bump(grid, m, a, spec.width.unwrap_or(0.5)),
        "random_smooth" => random_smooth(grid, m, a, spec.wavenumber.max(1) as f64, seed)
            .map_err(|e| bad(file, e))?,
        other => {
            return Err(bad(
                file,
                format!(
                    "initial.preset '{other}' unknown \
                     (constant | single_mode | two_mode | gaussian_bump | random_smooth)"
                ),
            ))
        }
    };
    Ok(field)
}

/// Periodic bump centered at π per axis: a truncated Fourier heat-kernel
/// series normalized to peak amplitude `a` on top of the offset.
fn gaussian_bump(grid: TorusGrid, m: f64, a: f64, width: f64) -> RealField {
    let kmax = dealias_cutoff(grid);
    let profile = |x: f64| -> f64 {
        let mut s = 0.0;
        for k in 1..=kmax {
            let kf = k as f64;
            s += (-0.5 * (kf * width).powi(2)).exp() * (kf * (x - std::f64::consts::PI)).cos();
        }
        s
    };
    let peak = profile(std::f64::consts::PI);
    match grid.dim() {
        1 => RealField::from_fn(grid, |x, _| m + a * profile(x) / peak),
        _ => RealField::from_fn(grid, |x, y| m + a * profile(x) * profile(y) / (peak * peak)),
    }
}

/// Seeded band-limited random field built from an explicitly Hermitian
/// spectrum with Gaussian-decaying amplitudes, normalized to sup norm `a`.
fn random_smooth(
    grid: TorusGrid,
    m: f64,
    a: f64,
    k0: f64,
    seed: u64,
) -> std::result::Result<RealField, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let mut spec = SpectralField::zeros(grid);
    {
        let coeffs = spec.coeffs_mut();
        let mut set = |flat_pos: usize, flat_neg: usize, ksq: f64| {
            let decay = (-ksq / (k0 * k0)).exp();
            let re = rng.gen_range(-1.0..1.0) * decay;
            let im = rng.gen_range(-1.0..1.0) * decay;
            coeffs[flat_pos] = Complex64::new(re, im);
            coeffs[flat_neg] = Complex64::new(re, -im);
        };
        match grid.dim() {
            1 => {
                for k in 1..(n / 2) {
                    set(k, n - k, (k * k) as f64);
                }
            }
            _ => {
                for i in 0..n {
                    for j in 0..n {
                        let k0i = grid.wavenumber(i);
                        let k1j = grid.wavenumber(j);
                        // fill one representative of each ±k pair, skip the
                        // self-conjugate bins
                        let self_conj = (i == 0 || i == n / 2) && (j == 0 || j == n / 2);
                        if self_conj || k0i < 0 || (k0i == 0 && k1j <= 0) {
                            continue;
                        }
                        if i == n / 2 || j == n / 2 {
                            continue;
                        }
                        let ineg = (n - i) % n;
                        let jneg = (n - j) % n;
                        set(i * n + j, ineg * n + jneg, (k0i * k0i + k1j * k1j) as f64);
                    }
                }
            }
        }
    }
    let rough = inverse_transform(&spec).map_err(|e| e.to_string())?;
    let peak = rough.max_abs();
    if peak == 0.0 {
        return Ok(RealField::constant(grid, m));
    }
    Ok(rough.map(|v| m + a * v / peak))
}

pub fn resolve(cfg: &ExperimentConfig, file: &Path, overrides: &Overrides) -> Result<Resolved> {
    let grid =
        TorusGrid::new(cfg.grid.dim, cfg.grid.n).map_err(|e| bad(file, format!("grid: {e}")))?;
    let variant = variant_from_spec(&cfg.variant, file)?;

    let base_dir = file.parent().unwrap_or_else(|| Path::new("."));
    let u0 = initial_field(
        &cfg.initial,
        grid,
        file,
        base_dir,
        overrides.seed.unwrap_or(0),
    )?;

    let solver = SolverConfig {
        dt: cfg.solver.dt,
        dt_min: cfg.solver.dt_min,
        t_end: cfg.solver.t_end,
        cfl: cfg.solver.cfl,
        grad_blowup_threshold: cfg.solver.grad_blowup_threshold,
        record_every: cfg.solver.record_every,
    };
    solver
        .validate()
        .map_err(|e| bad(file, format!("solver: {e}")))?;

    let besov_index = match cfg.theory.besov {
        Some(b) => {
            BesovIndex::new(b.s, b.p, b.r).map_err(|e| bad(file, format!("theory.besov: {e}")))?
        }
        None => BesovIndex::critical(grid.dim()),
    };
    let constant_c = overrides
        .constant_c
        .or(cfg.theory.constant_c)
        .unwrap_or(1.0);
    let theory = TheoryConfig::new(constant_c, besov_index)
        .map_err(|e| bad(file, format!("theory: {e}")))?;

    let monitors = MonitorSet {
        besov: cfg.monitors.besov.then_some(besov_index),
        homogeneous: cfg.monitors.homogeneous,
        criteria: cfg.monitors.criteria,
    };
    monitors
        .validate()
        .map_err(|e| bad(file, format!("monitors: {e}")))?;

    // precedence: --out flag, then [output] dir, then HKS_OUT_DIR
    let out_dir = overrides
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .or_else(|| std::env::var_os("HKS_OUT_DIR").map(PathBuf::from));

    Ok(Resolved {
        grid,
        variant,
        u0,
        solver,
        monitors,
        theory,
        out_dir,
    })
}
