//! Closed-form evaluation of the quantitative theory: the growth function
//! h, global-existence smallness conditions, the damping-rate sufficiency
//! condition, the uniform iterate bound, blow-up-time lower bounds, and two
//! numeric validators (the iterative integral bound and the paired-run
//! stability inequality).
//!
//! The analysis leaves its universal constant unnamed; here it is the single
//! configurable scalar `C` of [`TheoryConfig`], and every output documents
//! its C-dependence. Empirical cross-checks report the smallest C consistent
//! with an observation instead of asserting inequalities at C = 1.

use crate::besov::{besov_norm, BesovIndex};
use crate::equation::HksParams;
use crate::error::{HksError, Result};
use crate::field::RealField;
use crate::integrator::RunRecord;
use crate::schedule::{ParameterSchedule, ScheduleKind};
use std::f64::consts::LN_2;

/// The universal constant and the Besov index used to measure `||u0||`.
#[derive(Debug, Clone)]
pub struct TheoryConfig {
    pub constant_c: f64,
    pub besov_index: BesovIndex,
}

impl TheoryConfig {
    pub fn new(constant_c: f64, besov_index: BesovIndex) -> Result<Self> {
        if !(constant_c > 0.0 && constant_c.is_finite()) {
            return Err(HksError::Domain(format!(
                "constant C must be positive and finite, got {constant_c}"
            )));
        }
        Ok(Self {
            constant_c,
            besov_index,
        })
    }

    fn c3(&self) -> f64 {
        self.constant_c.powi(3)
    }
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            constant_c: 1.0,
            besov_index: BesovIndex::critical(1),
        }
    }
}

/// The schedule integrals entering the theory: `I_ab = ∫₀^∞ (|α|+|β|)`,
/// `I_total = ∫₀^∞ (|α|+|β|+|γ|+|ξ|)`, and the running total
/// `partial(t) = ∫₀^t (|α|+|β|+|γ|+|ξ|)`.
#[derive(Debug, Clone)]
pub struct IntegralBundle {
    i_ab: f64,
    i_total: f64,
    params: HksParams,
}

impl IntegralBundle {
    pub fn from_params(params: &HksParams) -> Result<Self> {
        let i_ab = params.alpha.integral_abs(0.0, f64::INFINITY)?
            + params.beta.integral_abs(0.0, f64::INFINITY)?;
        let i_total = i_ab
            + params.gamma.integral_abs(0.0, f64::INFINITY)?
            + params.xi.integral_abs(0.0, f64::INFINITY)?;
        Ok(Self {
            i_ab,
            i_total,
            params: params.clone(),
        })
    }

    /// Bundle with identically zero schedules.
    pub fn zero() -> Self {
        Self {
            i_ab: 0.0,
            i_total: 0.0,
            params: HksParams::constant(0.0, 0.0, 0.0, 0.0),
        }
    }

    pub fn i_ab(&self) -> f64 {
        self.i_ab
    }

    pub fn i_total(&self) -> f64 {
        self.i_total
    }

    pub fn partial(&self, t: f64) -> Result<f64> {
        self.params.weight_integral(0.0, t)
    }

    pub fn params(&self) -> &HksParams {
        &self.params
    }
}

/// One evaluated condition, with both sides and their ratio.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub condition: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub satisfied: bool,
    pub constant_c: f64,
}

fn json_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "\"nan\"".into()
    } else if v > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

impl OracleReport {
    /// JSON object with sorted keys.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"C\":{},\"condition\":\"{}\",\"lhs\":{},\"ratio\":{},\"rhs\":{},\"satisfied\":{}}}",
            json_num(self.constant_c),
            self.condition,
            json_num(self.lhs),
            json_num(self.ratio),
            json_num(self.rhs),
            self.satisfied
        )
    }
}

/// The growth function
/// `h(x) = exp(4C³x² I_ab) · (x + 8C³x³ I_total)`,
/// increasing and continuous with `h(0) = 0` and `h(x) >= x`.
/// Overflow saturates to +∞.
pub fn h_function(x: f64, bundle: &IntegralBundle, cfg: &TheoryConfig) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(HksError::Domain(format!(
            "h is defined for x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let c3 = cfg.c3();
    let expo = 4.0 * c3 * x * x * bundle.i_ab;
    Ok(expo.exp() * (x + 8.0 * c3 * x.powi(3) * bundle.i_total))
}

/// Global-existence smallness condition:
/// `I_total <= ln 2 / (12 C³ h²(1 + ||u0||))`.
/// The same condition serves the critical and non-critical spaces; which
/// Besov index measures `||u0||` is the caller's choice.
pub fn global_threshold_ok(
    u0_norm: f64,
    bundle: &IntegralBundle,
    cfg: &TheoryConfig,
) -> Result<OracleReport> {
    if !(u0_norm >= 0.0) {
        return Err(HksError::Domain(format!(
            "norm must be >= 0, got {u0_norm}"
        )));
    }
    let h = h_function(1.0 + u0_norm, bundle, cfg)?;
    let lhs = bundle.i_total;
    let rhs = LN_2 / (12.0 * cfg.c3() * h * h);
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(OracleReport {
        condition: "global_threshold".into(),
        lhs,
        rhs,
        ratio,
        satisfied: lhs <= rhs,
        constant_c: cfg.constant_c,
    })
}

/// Damping-rate sufficiency condition:
/// `exp(16C³/λ (1+||u0||)²) (1+||u0|| + 28C³/λ (1+||u0||)³)² <= λ ln2 / (42C³)`.
pub fn lambda_sufficiency_ok(
    u0_norm: f64,
    lambda: f64,
    cfg: &TheoryConfig,
) -> Result<OracleReport> {
    if !(lambda > 0.0) {
        return Err(HksError::Domain(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    if !(u0_norm >= 0.0) {
        return Err(HksError::Domain(format!(
            "norm must be >= 0, got {u0_norm}"
        )));
    }
    let c3 = cfg.c3();
    let x = 1.0 + u0_norm;
    let lhs = (16.0 * c3 / lambda * x * x).exp() * (x + 28.0 * c3 / lambda * x.powi(3)).powi(2);
    let rhs = lambda * LN_2 / (42.0 * c3);
    Ok(OracleReport {
        condition: "lambda_sufficiency".into(),
        lhs,
        rhs,
        ratio: lhs / rhs,
        satisfied: lhs <= rhs,
        constant_c: cfg.constant_c,
    })
}

/// A damping rate that always satisfies [`lambda_sufficiency_ok`]:
/// `λ* = 120 C³ / ln2 · (1 + ||u0||)²`.
pub fn sufficient_lambda(u0_norm: f64, cfg: &TheoryConfig) -> f64 {
    120.0 * cfg.c3() / LN_2 * (1.0 + u0_norm).powi(2)
}

/// Ceiling on the iterate and solution norms under the smallness condition:
/// `2C · h(1 + ||u0||)`.
pub fn uniform_bound_value(
    u0_norm: f64,
    bundle: &IntegralBundle,
    cfg: &TheoryConfig,
) -> Result<f64> {
    Ok(2.0 * cfg.constant_c * h_function(1.0 + u0_norm, bundle, cfg)?)
}

/// Smallest C whose uniform bound covers an observed sup norm; the bound is
/// strictly increasing in C so bisection applies. Returns 0 for a
/// non-positive observation.
pub fn minimal_c_for_uniform_bound(
    u0_norm: f64,
    params: &HksParams,
    observed_sup: f64,
) -> Result<f64> {
    if observed_sup <= 0.0 {
        return Ok(0.0);
    }
    let bound = |c: f64| -> Result<f64> {
        let cfg = TheoryConfig::new(c, BesovIndex::critical(1))?;
        let bundle = IntegralBundle::from_params(params)?;
        uniform_bound_value(u0_norm, &bundle, &cfg)
    };
    let mut hi = 1.0_f64;
    let mut iter = 0;
    while bound(hi)? < observed_sup {
        hi *= 2.0;
        iter += 1;
        if iter > 200 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0_f64;
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if bound(mid)? < observed_sup {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Invert the running schedule integral: first time `t` with
/// `∫₀^t (|α|+|β|+|γ|+|ξ|) = target`, by bisection to 1e-10 relative.
/// Exposed separately so closed-form inversions can be cross-checked.
pub fn invert_weight_integral_bisect(params: &HksParams, target: f64) -> Result<f64> {
    let total = params.weight_integral(0.0, f64::INFINITY)?;
    if total <= target {
        return Ok(f64::INFINITY);
    }
    let mut hi = 1.0_f64;
    let mut guard = 0;
    while params.weight_integral(0.0, hi)? < target {
        hi *= 2.0;
        guard += 1;
        if guard > 300 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0_f64;
    while hi - lo > 1e-10 * hi.max(1e-30) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if params.weight_integral(0.0, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form inversion when all four schedules share an invertible shape;
/// falls back to bisection otherwise.
fn invert_weight_integral(params: &HksParams, target: f64) -> Result<f64> {
    let total = params.weight_integral(0.0, f64::INFINITY)?;
    if total <= target {
        return Ok(f64::INFINITY);
    }
    let schedules = [&params.alpha, &params.beta, &params.gamma, &params.xi];

    // all constant: the running integral is linear in t
    let mut w = 0.0;
    let mut all_const = true;
    for s in schedules {
        match s.kind() {
            ScheduleKind::Constant(c) => w += (c * s.scale()).abs(),
            _ => {
                all_const = false;
                break;
            }
        }
    }
    if all_const {
        // total > target guarantees w > 0
        return Ok(target / w);
    }

    // all exponential with one shared rate: A/λ (1 - e^{-λt}) = target
    let mut shared_rate: Option<f64> = None;
    let mut amp_sum = 0.0;
    let mut all_exp = true;
    for s in schedules {
        match s.kind() {
            ScheduleKind::ExpDecay { amplitude, rate } if *rate > 0.0 => {
                let a = (amplitude * s.scale()).abs();
                if a == 0.0 {
                    continue;
                }
                match shared_rate {
                    None => shared_rate = Some(*rate),
                    Some(r) if r == *rate => {}
                    _ => {
                        all_exp = false;
                        break;
                    }
                }
                amp_sum += a;
            }
            ScheduleKind::Constant(c) if (c * s.scale()).abs() == 0.0 => {}
            _ => {
                all_exp = false;
                break;
            }
        }
    }
    if all_exp {
        if let Some(rate) = shared_rate {
            let arg = 1.0 - rate * target / amp_sum;
            if arg > 0.0 {
                return Ok(-arg.ln() / rate);
            }
        }
    }

    invert_weight_integral_bisect(params, target)
}

/// Lower bound on the blow-up time measured against the critical-space
/// threshold: largest `t` with `∫₀^t (|α|+|β|+|γ|+|ξ|) <= 1/(C(1+||u0||)²)`.
/// `u0_norm` is the critical-index Besov norm of the initial data.
/// Returns +∞ when the total integral never reaches the threshold.
pub fn blowup_lower_bound_critical(
    u0_norm: f64,
    schedules: &HksParams,
    cfg: &TheoryConfig,
) -> Result<f64> {
    if !(u0_norm >= 0.0) {
        return Err(HksError::Domain(format!(
            "norm must be >= 0, got {u0_norm}"
        )));
    }
    let threshold = 1.0 / (cfg.constant_c * (1.0 + u0_norm).powi(2));
    invert_weight_integral(schedules, threshold)
}

/// Lower bound on the blow-up time for the non-critical spaces, with
/// threshold `1/(C(e + ||u0||)⁶)`; `u0_norm` is measured in the configured
/// non-critical index.
pub fn blowup_lower_bound_noncritical(
    u0_norm: f64,
    schedules: &HksParams,
    cfg: &TheoryConfig,
) -> Result<f64> {
    if !(u0_norm >= 0.0) {
        return Err(HksError::Domain(format!(
            "norm must be >= 0, got {u0_norm}"
        )));
    }
    let threshold = 1.0 / (cfg.constant_c * (std::f64::consts::E + u0_norm).powi(6));
    invert_weight_integral(schedules, threshold)
}

/// Which homogeneous block norm feeds the criterion integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    /// ℓ¹ block sums (the critical-space criterion).
    Inf1,
    /// ℓ² block sums (the non-critical criterion).
    Inf2,
}

/// Trapezoid integral of `(|α|+|β|+|γ|+|ξ|)(t) · (||u||² + ||∇u||²)(t)` over
/// the recorded samples, with the norms taken in the homogeneous block space
/// selected by `kind`. Requires a record produced in-process (the schedule
/// weight series is not part of the CSV format).
pub fn criterion_integral(record: &RunRecord, kind: CriterionKind) -> Result<f64> {
    let w = record.series("weight")?;
    let (u, gu) = match kind {
        CriterionKind::Inf1 => (record.series("hb0_inf1_u")?, record.series("hb0_inf1_gu")?),
        CriterionKind::Inf2 => (record.series("hb0_inf2_u")?, record.series("hb0_inf2_gu")?),
    };
    let t = &record.times;
    let integrand = |i: usize| -> Result<f64> {
        let v = w[i] * (u[i] * u[i] + gu[i] * gu[i]);
        if v.is_nan() {
            return Err(HksError::MissingSeries("homogeneous block norms".into()));
        }
        Ok(v)
    };
    let mut acc = 0.0;
    for i in 1..t.len() {
        acc += 0.5 * (t[i] - t[i - 1]) * (integrand(i - 1)? + integrand(i)?);
    }
    Ok(acc)
}

/// Outcome of the iterative integral bound validator.
#[derive(Debug, Clone)]
pub struct IterativeBoundReport {
    /// `sup_t g_{n+1}(t)` from the worst-case numeric recursion.
    pub numeric_sup: f64,
    /// `Σ_{k=0}^n a_{n-k} ||μ||₁ᵏ / k!  +  g₀ ||μ||₁ⁿ⁺¹ / (n+1)!`.
    pub closed_form_bound: f64,
    /// `bound - sup`; nonnegative up to quadrature error.
    pub slack: f64,
}

/// Validate the sequence bound for `g_{k+1}(t) = a_k + ∫₀^t μ g_k` on a
/// fine trapezoid grid (10⁴ points over `[0, t]`), starting from the
/// constant `g₀`. A slack below -1e-8 is reported as an error since the
/// bound is a theorem; tripping it means the harness itself is wrong.
pub fn iterative_bound_check(
    a: &[f64],
    mu: &ParameterSchedule,
    g0: f64,
    n: usize,
    t: f64,
) -> Result<IterativeBoundReport> {
    if a.len() < n + 1 {
        return Err(HksError::Domain(format!(
            "need at least {} sequence entries, got {}",
            n + 1,
            a.len()
        )));
    }
    if a.iter().any(|&ak| !(ak > 0.0) || !ak.is_finite()) {
        return Err(HksError::Domain("sequence entries must be positive".into()));
    }
    if !(g0 >= 0.0) {
        return Err(HksError::Domain(format!("g0 must be >= 0, got {g0}")));
    }
    if !(t > 0.0) {
        return Err(HksError::Domain(format!("horizon must be > 0, got {t}")));
    }

    const POINTS: usize = 10_001;
    let dt = t / (POINTS - 1) as f64;
    let mut mu_vals = Vec::with_capacity(POINTS);
    for i in 0..POINTS {
        let v = mu.evaluate(i as f64 * dt)?;
        if v < 0.0 {
            return Err(HksError::Domain(format!(
                "mu must be nonnegative, found {v} at t = {}",
                i as f64 * dt
            )));
        }
        mu_vals.push(v);
    }

    let mut g = vec![g0; POINTS];
    for ak in a.iter().take(n + 1) {
        // g_{k+1}(t) = a_k + cumulative trapezoid of μ g_k
        let mut next = Vec::with_capacity(POINTS);
        let mut acc = 0.0;
        next.push(*ak);
        for i in 1..POINTS {
            acc += 0.5 * dt * (mu_vals[i - 1] * g[i - 1] + mu_vals[i] * g[i]);
            next.push(ak + acc);
        }
        g = next;
    }
    let numeric_sup = g.iter().fold(0.0_f64, |m, &v| m.max(v));

    let mu_l1 = mu.integral_abs(0.0, f64::INFINITY)?;
    let mut bound = 0.0;
    let mut factorial = 1.0;
    for k in 0..=n {
        if k > 0 {
            factorial *= k as f64;
        }
        bound += a[n - k] * mu_l1.powi(k as i32) / factorial;
    }
    factorial *= (n + 1) as f64;
    bound += g0 * mu_l1.powi(n as i32 + 1) / factorial;

    let slack = bound - numeric_sup;
    if slack < -1e-8 {
        return Err(HksError::BoundViolation(slack));
    }
    Ok(IterativeBoundReport {
        numeric_sup,
        closed_form_bound: bound,
        slack,
    })
}

/// Per-time smallest constants from the paired-run stability inequality.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// Smallest C making the inequality hold at each recorded time.
    pub c_series: Vec<f64>,
    /// Max over the recorded times.
    pub minimal_c: f64,
    /// `||u1(0) - u2(0)||` in the lowered index.
    pub initial_gap: f64,
}

/// Evaluate both sides of
/// `||u1(t)-u2(t)||_{B^{s-1}} <= ||u1(0)-u2(0)||_{B^{s-1}}
///   · exp(C ∫₀^t (|α|+|β|+|γ|+|ξ|)(1+||u1||_{B^s}+||u2||_{B^s})² dτ)`
/// on two paired trajectories recorded at identical times, reporting the
/// smallest admissible C per time and overall. Identical initial data gives
/// C = 0 (the uniqueness case). Requires `s != 2 + d/p` (the borderline
/// regularity has its own interpolated variant, see
/// [`stability_check_interpolated`]).
pub fn stability_check(
    traj1: &[RealField],
    traj2: &[RealField],
    times: &[f64],
    params: &HksParams,
    idx: BesovIndex,
    _cfg: &TheoryConfig,
) -> Result<StabilityReport> {
    validate_pair(traj1, traj2, times)?;
    let dim = traj1[0].grid().dim() as f64;
    if (idx.s - (2.0 + dim / idx.p)).abs() < 1e-12 {
        return Err(HksError::Domain(
            "s = 2 + d/p is the borderline case; use the interpolated variant".into(),
        ));
    }
    let gaps = gap_series(traj1, traj2, idx)?;
    let growth = growth_integral(traj1, traj2, times, params, idx)?;

    let initial_gap = gaps[0];
    let mut c_series = vec![0.0];
    let mut minimal_c = 0.0_f64;
    for i in 1..times.len() {
        let c = if initial_gap == 0.0 || gaps[i] <= initial_gap {
            0.0
        } else if growth[i] == 0.0 {
            f64::INFINITY
        } else {
            (gaps[i] / initial_gap).ln() / growth[i]
        };
        minimal_c = minimal_c.max(c);
        c_series.push(c);
    }
    Ok(StabilityReport {
        times: times.to_vec(),
        c_series,
        minimal_c,
        initial_gap,
    })
}

/// Borderline-regularity variant (`s = 2 + d/p`): the right-hand side is
/// `||ω(0)||^θ (||u1||+||u2||)^{1-θ} exp(Cθ ∫ ...)` with `θ = 1 - d/(2p)`,
/// admissible only when θ lands in (0, 1).
pub fn stability_check_interpolated(
    traj1: &[RealField],
    traj2: &[RealField],
    times: &[f64],
    params: &HksParams,
    idx: BesovIndex,
    _cfg: &TheoryConfig,
) -> Result<StabilityReport> {
    validate_pair(traj1, traj2, times)?;
    let dim = traj1[0].grid().dim() as f64;
    let theta = 1.0 - dim / (2.0 * idx.p);
    if !(theta > 0.0 && theta < 1.0) {
        return Err(HksError::Domain(format!(
            "theta = 1 - d/(2p) = {theta} is outside (0,1) for d = {dim}, p = {}",
            idx.p
        )));
    }
    let gaps = gap_series(traj1, traj2, idx)?;
    let growth = growth_integral(traj1, traj2, times, params, idx)?;

    let initial_gap = gaps[0];
    let mut c_series = vec![0.0];
    let mut minimal_c = 0.0_f64;
    for i in 1..times.len() {
        let n1 = besov_norm(&traj1[i], idx)?;
        let n2 = besov_norm(&traj2[i], idx)?;
        let prefactor = initial_gap.powf(theta) * (n1 + n2).powf(1.0 - theta);
        let c = if prefactor == 0.0 || gaps[i] <= prefactor {
            0.0
        } else if growth[i] == 0.0 {
            f64::INFINITY
        } else {
            (gaps[i] / prefactor).ln() / (theta * growth[i])
        };
        minimal_c = minimal_c.max(c);
        c_series.push(c);
    }
    Ok(StabilityReport {
        times: times.to_vec(),
        c_series,
        minimal_c,
        initial_gap,
    })
}

fn validate_pair(traj1: &[RealField], traj2: &[RealField], times: &[f64]) -> Result<()> {
    if traj1.len() != times.len() || traj2.len() != times.len() || times.is_empty() {
        return Err(HksError::Domain(
            "trajectories and times must be non-empty and of equal length".into(),
        ));
    }
    if traj1[0].grid() != traj2[0].grid() {
        return Err(HksError::GridMismatch);
    }
    Ok(())
}

fn gap_series(traj1: &[RealField], traj2: &[RealField], idx: BesovIndex) -> Result<Vec<f64>> {
    let lower = idx.lower();
    traj1
        .iter()
        .zip(traj2)
        .map(|(a, b)| besov_norm(&a.zip_with(b, |x, y| x - y)?, lower))
        .collect()
}

/// Cumulative trapezoid of `w(τ)(1 + ||u1||_{B^s} + ||u2||_{B^s})²`.
fn growth_integral(
    traj1: &[RealField],
    traj2: &[RealField],
    times: &[f64],
    params: &HksParams,
    idx: BesovIndex,
) -> Result<Vec<f64>> {
    let mut integrand = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        let w = params.weight(times[i])?;
        let n1 = besov_norm(&traj1[i], idx)?;
        let n2 = besov_norm(&traj2[i], idx)?;
        integrand.push(w * (1.0 + n1 + n2).powi(2));
    }
    let mut acc = vec![0.0];
    for i in 1..times.len() {
        let prev = acc[i - 1];
        acc.push(prev + 0.5 * (times[i] - times[i - 1]) * (integrand[i - 1] + integrand[i]));
    }
    Ok(acc)
}
