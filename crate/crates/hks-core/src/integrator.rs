//! Explicit RK4 time stepping with CFL step control, divergence detection,
//! and norm monitoring.

use crate::besov::{besov_norm, homogeneous_b0_norm, BesovIndex};
use crate::equation::{rhs_damped, rhs_divergence, rhs_unified, EquationVariant, HksParams};
use crate::error::{HksError, Result};
use crate::field::{lp_norm, RealField};
use crate::schedule::ParameterSchedule;
use crate::spectral::gradient;

/// Step-size and termination policy for one integration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Initial (and largest) time step.
    pub dt: f64,
    /// Smallest step tolerated before the run aborts with `StepUnderflow`.
    pub dt_min: f64,
    /// Integration horizon.
    pub t_end: f64,
    /// Courant number in (0, 1].
    pub cfl: f64,
    /// Halt once `||∇u||_∞` exceeds this.
    pub grad_blowup_threshold: f64,
    /// Evaluate monitors every this many accepted steps.
    pub record_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            dt_min: 1e-10,
            t_end: 1.0,
            cfl: 0.4,
            grad_blowup_threshold: 1e4,
            record_every: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt_min > 0.0 && self.dt_min <= self.dt) {
            return Err(HksError::Domain(format!(
                "need 0 < dt_min <= dt, got dt = {}, dt_min = {}",
                self.dt, self.dt_min
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(HksError::Domain(format!(
                "t_end must be > 0, got {}",
                self.t_end
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(HksError::Domain(format!(
                "cfl must be in (0,1], got {}",
                self.cfl
            )));
        }
        if !(self.grad_blowup_threshold > 0.0) {
            return Err(HksError::Domain("grad_blowup_threshold must be > 0".into()));
        }
        if self.record_every == 0 {
            return Err(HksError::Domain("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Which monitors to evaluate at recorded steps. Mass and sup norms are
/// always on; the Besov and homogeneous-block norms carry the FFT cost of a
/// full dyadic decomposition per sample.
#[derive(Debug, Clone)]
pub struct MonitorSet {
    /// Besov index for the `besov_s_p_r` series.
    pub besov: Option<BesovIndex>,
    /// Homogeneous block norms of u and ∇u with r = 1 and r = 2.
    pub homogeneous: bool,
    /// Criterion accumulators (require `homogeneous`).
    pub criteria: bool,
}

impl MonitorSet {
    pub fn all(dim: usize) -> Self {
        Self {
            besov: Some(BesovIndex::critical(dim)),
            homogeneous: true,
            criteria: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.criteria && !self.homogeneous {
            return Err(HksError::Domain(
                "criterion accumulators require the homogeneous norms".into(),
            ));
        }
        Ok(())
    }
}

/// Terminal state of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Gradient threshold exceeded or non-finite values; carries the last
    /// accepted time.
    BlowUpDetected(f64),
    /// CFL control pushed the step below `dt_min`.
    StepUnderflow(f64),
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// Time series of the monitored quantities of one run. Series not selected
/// by the monitor set hold NaN.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub linf_u: Vec<f64>,
    pub linf_grad_u: Vec<f64>,
    pub besov: Vec<f64>,
    pub hb0_inf1_u: Vec<f64>,
    pub hb0_inf1_gu: Vec<f64>,
    pub hb0_inf2_u: Vec<f64>,
    pub hb0_inf2_gu: Vec<f64>,
    pub crit_acc_1: Vec<f64>,
    pub crit_acc_2: Vec<f64>,
    /// Schedule weight `|α|+|β|+|γ|+|ξ|` at each recorded time (not part of
    /// the CSV payload; reconstructed records lack it).
    pub weight: Vec<f64>,
    pub status: RunStatus,
}

impl RunRecord {
    fn with_capacity(cap: usize) -> Self {
        Self {
            times: Vec::with_capacity(cap),
            mass: Vec::with_capacity(cap),
            linf_u: Vec::with_capacity(cap),
            linf_grad_u: Vec::with_capacity(cap),
            besov: Vec::with_capacity(cap),
            hb0_inf1_u: Vec::with_capacity(cap),
            hb0_inf1_gu: Vec::with_capacity(cap),
            hb0_inf2_u: Vec::with_capacity(cap),
            hb0_inf2_gu: Vec::with_capacity(cap),
            crit_acc_1: Vec::with_capacity(cap),
            crit_acc_2: Vec::with_capacity(cap),
            weight: Vec::with_capacity(cap),
            status: RunStatus::Completed,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Look up a monitored series by its CSV column name.
    pub fn series(&self, name: &str) -> Result<&[f64]> {
        let s: &[f64] = match name {
            "t" => &self.times,
            "mass" => &self.mass,
            "linf_u" => &self.linf_u,
            "linf_grad_u" => &self.linf_grad_u,
            "besov_s_p_r" => &self.besov,
            "hb0_inf1_u" => &self.hb0_inf1_u,
            "hb0_inf1_gu" => &self.hb0_inf1_gu,
            "hb0_inf2_u" => &self.hb0_inf2_u,
            "hb0_inf2_gu" => &self.hb0_inf2_gu,
            "crit_acc_1" => &self.crit_acc_1,
            "crit_acc_2" => &self.crit_acc_2,
            "weight" => &self.weight,
            _ => return Err(HksError::MissingSeries(name.into())),
        };
        if s.is_empty() && !self.times.is_empty() {
            return Err(HksError::MissingSeries(name.into()));
        }
        Ok(s)
    }

    const COLUMNS: [&'static str; 11] = [
        "t",
        "mass",
        "linf_u",
        "linf_grad_u",
        "besov_s_p_r",
        "hb0_inf1_u",
        "hb0_inf1_gu",
        "hb0_inf2_u",
        "hb0_inf2_gu",
        "crit_acc_1",
        "crit_acc_2",
    ];

    /// Serialize to CSV: a header row, one row per recorded time, and a
    /// trailing `# status=...` comment.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&Self::COLUMNS.join(","));
        out.push('\n');
        for i in 0..self.times.len() {
            let row = [
                self.times[i],
                self.mass[i],
                self.linf_u[i],
                self.linf_grad_u[i],
                self.besov[i],
                self.hb0_inf1_u[i],
                self.hb0_inf1_gu[i],
                self.hb0_inf2_u[i],
                self.hb0_inf2_gu[i],
                self.crit_acc_1[i],
                self.crit_acc_2[i],
            ];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out.push_str(&format!("# status={}\n", status_str(self.status)));
        out
    }

    /// Parse a CSV produced by [`RunRecord::to_csv`]. The schedule-weight
    /// series is not part of the file format, so criterion integrals cannot
    /// be recomputed from a parsed record (the stored accumulators can).
    pub fn from_csv(text: &str) -> Result<RunRecord> {
        let mut rec = RunRecord::with_capacity(16);
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| HksError::Snapshot("empty record file".into()))?;
        if header.trim() != Self::COLUMNS.join(",") {
            return Err(HksError::Snapshot(format!("unexpected header '{header}'")));
        }
        let mut status = None;
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# status=") {
                status = Some(parse_status(rest)?);
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != Self::COLUMNS.len() {
                return Err(HksError::Snapshot(format!(
                    "expected {} columns, got {}",
                    Self::COLUMNS.len(),
                    cells.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| HksError::Snapshot(format!("bad number '{s}': {e}")))
            };
            rec.times.push(parse(cells[0])?);
            rec.mass.push(parse(cells[1])?);
            rec.linf_u.push(parse(cells[2])?);
            rec.linf_grad_u.push(parse(cells[3])?);
            rec.besov.push(parse(cells[4])?);
            rec.hb0_inf1_u.push(parse(cells[5])?);
            rec.hb0_inf1_gu.push(parse(cells[6])?);
            rec.hb0_inf2_u.push(parse(cells[7])?);
            rec.hb0_inf2_gu.push(parse(cells[8])?);
            rec.crit_acc_1.push(parse(cells[9])?);
            rec.crit_acc_2.push(parse(cells[10])?);
        }
        rec.status = status.ok_or_else(|| HksError::Snapshot("missing status line".into()))?;
        Ok(rec)
    }
}

fn status_str(s: RunStatus) -> String {
    match s {
        RunStatus::Completed => "Completed".into(),
        RunStatus::BlowUpDetected(t) => format!("BlowUpDetected t={t:.17e}"),
        RunStatus::StepUnderflow(t) => format!("StepUnderflow t={t:.17e}"),
    }
}

fn parse_status(s: &str) -> Result<RunStatus> {
    let s = s.trim();
    if s == "Completed" {
        return Ok(RunStatus::Completed);
    }
    for (prefix, ctor) in [
        (
            "BlowUpDetected t=",
            RunStatus::BlowUpDetected as fn(f64) -> RunStatus,
        ),
        (
            "StepUnderflow t=",
            RunStatus::StepUnderflow as fn(f64) -> RunStatus,
        ),
    ] {
        if let Some(rest) = s.strip_prefix(prefix) {
            let t = rest
                .parse::<f64>()
                .map_err(|e| HksError::Snapshot(format!("bad status time '{rest}': {e}")))?;
            return Ok(ctor(t));
        }
    }
    Err(HksError::Snapshot(format!("unknown status '{s}'")))
}

/// One classical four-stage Runge-Kutta step. The right-hand side is
/// evaluated at the stage times `t, t+dt/2, t+dt/2, t+dt`.
pub fn rk4_step(
    u: &RealField,
    t: f64,
    dt: f64,
    rhs: &mut impl FnMut(&RealField, f64) -> Result<RealField>,
) -> Result<RealField> {
    if !(dt > 0.0) {
        return Err(HksError::Domain(format!("dt must be > 0, got {dt}")));
    }
    let k1 = rhs(u, t)?;
    let k2 = rhs(&u.axpy(0.5 * dt, &k1)?, t + 0.5 * dt)?;
    let k3 = rhs(&u.axpy(0.5 * dt, &k2)?, t + 0.5 * dt)?;
    let k4 = rhs(&u.axpy(dt, &k3)?, t + dt)?;
    let mut out = u.clone();
    let c = dt / 6.0;
    let (k1v, k2v, k3v, k4v) = (k1.values(), k2.values(), k3.values(), k4.values());
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        *v += c * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    if out.is_finite() {
        Ok(out)
    } else {
        Err(HksError::Divergence {
            t,
            context: Some("rk4 stage produced non-finite values".into()),
        })
    }
}

const VELOCITY_FLOOR: f64 = 1e-12;

/// CFL-limited step: `min(cfg.dt, cfl · h / max(ε, ||(α+βu)∇S||_∞))`.
pub fn adaptive_dt(u: &RealField, t: f64, p: &HksParams, cfg: &SolverConfig) -> Result<f64> {
    u.ensure_finite()?;
    let alpha = p.alpha.evaluate(t)?;
    let beta = p.beta.evaluate(t)?;
    let s = crate::spectral::bessel_potential(u)?;
    let grad_s = gradient(&s)?;
    let mut vmax: f64 = 0.0;
    for i in 0..u.grid().len() {
        let coef = alpha + beta * u.values()[i];
        let mut sq = 0.0;
        for g in &grad_s {
            sq += g.values()[i] * g.values()[i];
        }
        vmax = vmax.max((coef * sq.sqrt()).abs());
    }
    let dt = cfg
        .dt
        .min(cfg.cfl * u.grid().spacing() / vmax.max(VELOCITY_FLOOR));
    if dt < cfg.dt_min {
        return Err(HksError::StepUnderflow {
            t,
            dt,
            dt_min: cfg.dt_min,
        });
    }
    Ok(dt)
}

fn grad_sup(u: &RealField) -> Result<f64> {
    let grads = gradient(u)?;
    let mut m: f64 = 0.0;
    for i in 0..u.grid().len() {
        let mut sq = 0.0;
        for g in &grads {
            sq += g.values()[i] * g.values()[i];
        }
        m = m.max(sq.sqrt());
    }
    Ok(m)
}

struct MonitorState {
    set: MonitorSet,
    params: HksParams,
}

impl MonitorState {
    fn record(&self, rec: &mut RunRecord, u: &RealField, t: f64) -> Result<()> {
        rec.times.push(t);
        rec.mass.push(u.mass());
        rec.linf_u.push(lp_norm(u, f64::INFINITY)?);
        rec.linf_grad_u.push(grad_sup(u)?);

        let besov = match self.set.besov {
            Some(idx) => besov_norm(u, idx)?,
            None => f64::NAN,
        };
        rec.besov.push(besov);

        let w = self.params.weight(t)?;
        rec.weight.push(w);

        if self.set.homogeneous {
            let grads = gradient(u)?;
            let (mut g1, mut g2) = (0.0, 0.0);
            for g in &grads {
                g1 += homogeneous_b0_norm(g, 1.0)?;
                g2 += homogeneous_b0_norm(g, 2.0)?;
            }
            rec.hb0_inf1_u.push(homogeneous_b0_norm(u, 1.0)?);
            rec.hb0_inf1_gu.push(g1);
            rec.hb0_inf2_u.push(homogeneous_b0_norm(u, 2.0)?);
            rec.hb0_inf2_gu.push(g2);
        } else {
            rec.hb0_inf1_u.push(f64::NAN);
            rec.hb0_inf1_gu.push(f64::NAN);
            rec.hb0_inf2_u.push(f64::NAN);
            rec.hb0_inf2_gu.push(f64::NAN);
        }

        // trapezoid update of the criterion accumulators over recorded samples
        let (mut c1, mut c2) = (f64::NAN, f64::NAN);
        if self.set.criteria {
            let n = rec.times.len();
            if n == 1 {
                c1 = 0.0;
                c2 = 0.0;
            } else {
                let dt = rec.times[n - 1] - rec.times[n - 2];
                let integrand = |w: f64, a: f64, b: f64| w * (a * a + b * b);
                let f1_prev = integrand(
                    rec.weight[n - 2],
                    rec.hb0_inf1_u[n - 2],
                    rec.hb0_inf1_gu[n - 2],
                );
                let f1_cur = integrand(w, rec.hb0_inf1_u[n - 1], rec.hb0_inf1_gu[n - 1]);
                c1 = rec.crit_acc_1[n - 2] + 0.5 * dt * (f1_prev + f1_cur);
                let f2_prev = integrand(
                    rec.weight[n - 2],
                    rec.hb0_inf2_u[n - 2],
                    rec.hb0_inf2_gu[n - 2],
                );
                let f2_cur = integrand(w, rec.hb0_inf2_u[n - 1], rec.hb0_inf2_gu[n - 1]);
                c2 = rec.crit_acc_2[n - 2] + 0.5 * dt * (f2_prev + f2_cur);
            }
        }
        rec.crit_acc_1.push(c1);
        rec.crit_acc_2.push(c2);
        Ok(())
    }
}

/// Integrate a variant until `t_end`, blow-up, or step underflow.
pub fn integrate(
    u0: &RealField,
    variant: &EquationVariant,
    cfg: &SolverConfig,
    monitors: &MonitorSet,
) -> Result<RunRecord> {
    Ok(run(u0, variant, cfg, monitors, false)?.0)
}

/// As [`integrate`], additionally returning the solution fields at the
/// recorded times (needed by the paired-run stability check).
pub fn integrate_with_trajectory(
    u0: &RealField,
    variant: &EquationVariant,
    cfg: &SolverConfig,
    monitors: &MonitorSet,
) -> Result<(RunRecord, Vec<RealField>)> {
    run(u0, variant, cfg, monitors, true)
}

fn run(
    u0: &RealField,
    variant: &EquationVariant,
    cfg: &SolverConfig,
    monitors: &MonitorSet,
    keep_trajectory: bool,
) -> Result<(RunRecord, Vec<RealField>)> {
    cfg.validate()?;
    monitors.validate()?;
    variant.validate()?;
    u0.ensure_finite()?;

    let monitor_params = variant.monitor_params();
    let (adv_alpha, adv_beta) = variant.advection_params();
    let adv_params = HksParams {
        alpha: adv_alpha,
        beta: adv_beta,
        gamma: ParameterSchedule::zero(),
        xi: ParameterSchedule::zero(),
    };

    type RhsFn = Box<dyn FnMut(&RealField, f64) -> Result<RealField>>;
    let mut rhs: RhsFn = match variant {
        EquationVariant::Unified(p) => {
            let p = p.clone();
            Box::new(move |u, t| rhs_unified(u, t, &p))
        }
        EquationVariant::Classical => {
            let p = crate::equation::classical_params();
            Box::new(move |u, t| rhs_unified(u, t, &p))
        }
        EquationVariant::SensitivityAdjusted(rho) => {
            let rho = rho.clone();
            Box::new(move |u, t| rhs_divergence(u, t, &rho))
        }
        EquationVariant::Damped(lambda) => {
            let lambda = *lambda;
            Box::new(move |u, t| rhs_damped(u, t, lambda))
        }
        EquationVariant::Transformed(lambda) => {
            let p = crate::equation::transformed_params(*lambda);
            Box::new(move |u, t| rhs_unified(u, t, &p))
        }
    };

    let state = MonitorState {
        set: monitors.clone(),
        params: monitor_params,
    };

    let mut rec = RunRecord::with_capacity(256);
    let mut trajectory = Vec::new();
    let mut u = u0.clone();
    let mut t = 0.0_f64;
    let mut accepted: usize = 0;

    state.record(&mut rec, &u, t)?;
    if keep_trajectory {
        trajectory.push(u.clone());
    }

    // initial state may already violate the halt threshold
    if grad_sup(&u)? > cfg.grad_blowup_threshold {
        rec.status = RunStatus::BlowUpDetected(t);
        return Ok((rec, trajectory));
    }

    let eps = 1e-12 * cfg.t_end.max(1.0);
    loop {
        if t >= cfg.t_end - eps {
            rec.status = RunStatus::Completed;
            break;
        }
        let dt = match adaptive_dt(&u, t, &adv_params, cfg) {
            Ok(dt) => dt.min(cfg.t_end - t),
            Err(HksError::StepUnderflow { t, .. }) => {
                rec.status = RunStatus::StepUnderflow(t);
                break;
            }
            Err(e) => return Err(e),
        };

        match rk4_step(&u, t, dt, &mut rhs) {
            Ok(next) => {
                u = next;
                t += dt;
                accepted += 1;
            }
            Err(HksError::Divergence { .. }) => {
                // last accepted state defines the blow-up stamp
                rec.status = RunStatus::BlowUpDetected(t);
                break;
            }
            Err(e) => return Err(e),
        }

        let record_now = accepted.is_multiple_of(cfg.record_every);
        let grad = grad_sup(&u)?;
        let blew_up = grad > cfg.grad_blowup_threshold;
        if record_now || blew_up || t >= cfg.t_end - eps {
            state.record(&mut rec, &u, t)?;
            if keep_trajectory {
                trajectory.push(u.clone());
            }
        }
        if blew_up {
            rec.status = RunStatus::BlowUpDetected(t);
            break;
        }
    }
    Ok((rec, trajectory))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::classical_params;
    use crate::grid::TorusGrid;
    use crate::schedule::ParameterSchedule;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    #[test]
    fn rk4_leaves_fixed_points_alone() {
        let g = grid1(16);
        let u = RealField::constant(g, 1.3);
        let mut rhs = |f: &RealField, _t: f64| Ok(RealField::zeros(f.grid()));
        let out = rk4_step(&u, 0.0, 0.1, &mut rhs).unwrap();
        assert_eq!(out.values(), u.values());
    }

    #[test]
    fn rk4_scalar_exponential() {
        // u' = -u from u = 1: the RK4 one-step value is exactly 0.9048375
        let g = grid1(8);
        let u = RealField::constant(g, 1.0);
        let mut rhs = |f: &RealField, _t: f64| Ok(f.scale(-1.0));
        let out = rk4_step(&u, 0.0, 0.1, &mut rhs).unwrap();
        let got = out.values()[0];
        assert!((got - 0.9048375).abs() < 1e-15);
        assert!((got - (-0.1_f64).exp()).abs() < 1e-7);
    }

    #[test]
    fn rk4_advection_order() {
        // frozen-velocity advection with a spectrally exact derivative:
        // the remaining error is temporal and fourth order
        let g = grid1(64);
        let u0 = RealField::from_fn(g, |x, _| x.sin());
        let solve = |dt: f64| {
            let mut rhs = |f: &RealField, _t: f64| Ok(gradient(f)?.remove(0).scale(-1.0));
            let mut u = u0.clone();
            let mut t = 0.0;
            while t < 1.0 - 1e-12 {
                let step = dt.min(1.0 - t);
                u = rk4_step(&u, t, step, &mut rhs).unwrap();
                t += step;
            }
            u
        };
        let exact = RealField::from_fn(g, |x, _| (x - 1.0).sin());
        let err = |u: &RealField| lp_norm(&u.zip_with(&exact, |a, b| a - b).unwrap(), 2.0).unwrap();
        let e1 = err(&solve(0.1));
        let e2 = err(&solve(0.05));
        let order = (e1 / e2).log2();
        assert!(order >= 3.9, "observed order {order}");
    }

    #[test]
    fn adaptive_dt_constant_state() {
        let g = grid1(32);
        let u = RealField::constant(g, 0.4);
        let cfg = SolverConfig::default();
        let dt = adaptive_dt(&u, 0.0, &classical_params(), &cfg).unwrap();
        assert_eq!(dt, cfg.dt);
    }

    #[test]
    fn adaptive_dt_scales_with_beta() {
        let g = grid1(64);
        let u = RealField::from_fn(g, |x, _| 1.0 + 0.8 * x.sin());
        let cfg = SolverConfig {
            dt: 10.0,
            ..Default::default()
        };
        let p1 = HksParams::constant(0.0, 1.0, 0.0, 0.0);
        let p2 = HksParams::constant(0.0, 2.0, 0.0, 0.0);
        let d1 = adaptive_dt(&u, 0.0, &p1, &cfg).unwrap();
        let d2 = adaptive_dt(&u, 0.0, &p2, &cfg).unwrap();
        assert!((d1 / d2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_dt_underflow() {
        let g = grid1(64);
        let u = RealField::from_fn(g, |x, _| 1.0 + 0.8 * x.sin());
        let cfg = SolverConfig {
            dt: 1.0,
            dt_min: 1.0,
            ..Default::default()
        };
        // velocity is O(1) so the CFL bound sits far below dt_min = 1
        assert!(matches!(
            adaptive_dt(&u, 0.0, &HksParams::constant(0.0, 50.0, 0.0, 0.0), &cfg),
            Err(HksError::StepUnderflow { .. })
        ));
    }

    #[test]
    fn equilibrium_run_is_flat() {
        let g = grid1(64);
        let u0 = RealField::constant(g, 0.3);
        let cfg = SolverConfig {
            dt: 1e-2,
            t_end: 1.0,
            record_every: 5,
            ..Default::default()
        };
        let rec = integrate(&u0, &EquationVariant::Classical, &cfg, &MonitorSet::all(1)).unwrap();
        assert!(rec.status.is_completed());
        let m0 = rec.mass[0];
        for (i, m) in rec.mass.iter().enumerate() {
            assert!((m - m0).abs() < 1e-12, "mass drift at sample {i}");
        }
        for v in &rec.linf_u {
            assert!((v - 0.3).abs() < 1e-12);
        }
        for v in &rec.linf_grad_u {
            assert!(*v < 1e-12);
        }
        // times strictly increasing, all series same length
        for w in rec.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_eq!(rec.mass.len(), rec.times.len());
        assert_eq!(rec.crit_acc_1.len(), rec.times.len());
    }

    #[test]
    fn determinism_bit_identical() {
        let g = grid1(32);
        let u0 = RealField::from_fn(g, |x, _| 0.4 + 0.1 * x.sin());
        let cfg = SolverConfig {
            dt: 5e-3,
            t_end: 0.2,
            record_every: 2,
            ..Default::default()
        };
        let a = integrate(&u0, &EquationVariant::Classical, &cfg, &MonitorSet::all(1)).unwrap();
        let b = integrate(&u0, &EquationVariant::Classical, &cfg, &MonitorSet::all(1)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn divergence_form_conserves_mass() {
        let g = grid1(64);
        let u0 = RealField::from_fn(g, |x, _| 0.3 + 0.05 * x.cos());
        let cfg = SolverConfig {
            dt: 2e-3,
            t_end: 0.5,
            ..Default::default()
        };
        let rho = ParameterSchedule::constant(1.0);
        let rec = integrate(
            &u0,
            &EquationVariant::SensitivityAdjusted(rho),
            &cfg,
            &MonitorSet::all(1),
        )
        .unwrap();
        assert!(rec.status.is_completed());
        let drift = (rec.mass.last().unwrap() - rec.mass[0]).abs();
        assert!(drift <= 1e-8, "mass drift {drift}");
    }

    #[test]
    fn criterion_accumulators_monotone() {
        let g = grid1(64);
        let u0 = RealField::from_fn(g, |x, _| 0.4 + 0.2 * x.sin());
        let cfg = SolverConfig {
            dt: 2e-3,
            t_end: 0.3,
            record_every: 3,
            ..Default::default()
        };
        let rec = integrate(&u0, &EquationVariant::Classical, &cfg, &MonitorSet::all(1)).unwrap();
        for w in rec.crit_acc_1.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for w in rec.crit_acc_2.windows(2) {
            assert!(w[1] >= w[0]);
        }
        // r = 2 block sums never exceed r = 1 sums, so the accumulators order
        for i in 0..rec.len() {
            assert!(rec.crit_acc_2[i] <= rec.crit_acc_1[i] + 1e-12);
        }
    }

    #[test]
    fn step_shrinks_approaching_blowup() {
        let g = grid1(128);
        let u0 = RealField::from_fn(g, |x, _| 0.5 + 0.4 * x.sin());
        let cfg = SolverConfig {
            dt: 2e-3,
            dt_min: 1e-12,
            t_end: 10.0,
            cfl: 0.4,
            grad_blowup_threshold: 1e3,
            record_every: 10,
        };
        let rec = integrate(&u0, &EquationVariant::Classical, &cfg, &MonitorSet::all(1)).unwrap();
        assert!(matches!(rec.status, RunStatus::BlowUpDetected(_)));
        // recorded time deltas track the CFL step; they shrink monotonically
        // through the last 20 recorded samples of the steepening run
        let t = &rec.times;
        assert!(t.len() > 25);
        let deltas: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let tail = &deltas[deltas.len() - 20..];
        for w in tail.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "deltas not shrinking: {tail:?}");
        }
    }

    #[test]
    fn strong_damping_keeps_norms_bounded() {
        let g = grid1(128);
        let u0 = RealField::from_fn(g, |x, _| 0.5 + 0.4 * x.sin());
        let cfg = SolverConfig {
            dt: 2e-3,
            dt_min: 1e-12,
            t_end: 5.0,
            cfl: 0.4,
            grad_blowup_threshold: 1e4,
            record_every: 25,
        };
        let rec = integrate(
            &u0,
            &EquationVariant::Damped(20.0),
            &cfg,
            &MonitorSet::all(1),
        )
        .unwrap();
        assert!(rec.status.is_completed());
        let sup = rec.besov.iter().cloned().fold(0.0f64, f64::max);
        assert!(
            sup <= 3.0 * rec.besov[0],
            "sup {sup} vs initial {}",
            rec.besov[0]
        );
    }

    #[test]
    fn integrate_2d_smoke() {
        let g = TorusGrid::new(2, 32).unwrap();
        let u0 = RealField::from_fn(g, |x, y| 0.3 + 0.03 * x.sin() * y.cos());
        let cfg = SolverConfig {
            dt: 5e-3,
            t_end: 0.1,
            record_every: 2,
            ..Default::default()
        };
        let rho = ParameterSchedule::constant(1.0);
        let rec = integrate(
            &u0,
            &EquationVariant::SensitivityAdjusted(rho),
            &cfg,
            &MonitorSet::all(2),
        )
        .unwrap();
        assert!(rec.status.is_completed());
        let drift = (rec.mass.last().unwrap() - rec.mass[0]).abs();
        assert!(drift < 1e-10, "2d mass drift {drift:e}");
    }

    #[test]
    fn underflow_surfaces_in_status() {
        let g = grid1(64);
        let u0 = RealField::from_fn(g, |x, _| 0.5 + 5.0 * x.sin());
        let cfg = SolverConfig {
            dt: 0.1,
            dt_min: 0.05,
            t_end: 1.0,
            ..Default::default()
        };
        let rec = integrate(&u0, &EquationVariant::Classical, &cfg, &MonitorSet::all(1)).unwrap();
        assert!(matches!(rec.status, RunStatus::StepUnderflow(_)));
    }

    #[test]
    fn csv_roundtrip() {
        let g = grid1(32);
        let u0 = RealField::from_fn(g, |x, _| 0.4 + 0.1 * x.sin());
        let cfg = SolverConfig {
            dt: 5e-3,
            t_end: 0.1,
            record_every: 2,
            ..Default::default()
        };
        let rec = integrate(
            &u0,
            &EquationVariant::Damped(2.0),
            &cfg,
            &MonitorSet::all(1),
        )
        .unwrap();
        let text = rec.to_csv();
        let back = RunRecord::from_csv(&text).unwrap();
        assert_eq!(back.times, rec.times);
        assert_eq!(back.crit_acc_2, rec.crit_acc_2);
        assert_eq!(back.status, rec.status);
        // round-trip reserializes to the identical bytes
        assert_eq!(back.to_csv(), text);
        // but the in-memory weight series is not part of the format
        assert!(back.series("weight").is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let g = grid1(16);
        let u0 = RealField::zeros(g);
        let cfg = SolverConfig {
            dt: -1.0,
            ..Default::default()
        };
        assert!(integrate(&u0, &EquationVariant::Classical, &cfg, &MonitorSet::all(1)).is_err());
    }
}
