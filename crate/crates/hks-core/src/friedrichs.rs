//! Constructive linearized iteration for the unified equation.
//!
//! Starting from the low-frequency seed `u⁽¹⁾ = S₁u₀`, each sweep solves the
//! linear transport equation
//!
//! `∂_t u⁽ⁿ⁺¹⁾ + (α + β u⁽ⁿ⁾) ∇S⁽ⁿ⁾ · ∇u⁽ⁿ⁺¹⁾ = -(γ u⁽ⁿ⁾ + ξ (u⁽ⁿ⁾)²) ΔS⁽ⁿ⁾`
//!
//! with `S⁽ⁿ⁾ = (I-Δ)^{-1} u⁽ⁿ⁾` and initial data `S_{n+1} u₀`, i.e. the
//! coefficients are frozen from the previous iterate. Coefficient fields are
//! read from the stored trajectory of the previous sweep with linear
//! interpolation in time.

use crate::besov::{besov_norm, low_freq_cutoff, BesovIndex};
use crate::equation::{rhs_unified, HksParams};
use crate::error::{HksError, Result};
use crate::field::RealField;
use crate::integrator::rk4_step;
use crate::spectral::{
    bessel_potential_spec, dealias_spec, forward_transform, gradient_spec, laplacian_spec, to_real,
};

/// A solution sampled at every accepted step of a fixed-step solve.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<RealField>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[RealField] {
        &self.states
    }

    pub fn initial(&self) -> &RealField {
        &self.states[0]
    }

    pub fn terminal(&self) -> &RealField {
        self.states.last().expect("non-empty trajectory")
    }

    /// Linear interpolation between stored steps (clamped at the ends).
    pub fn sample(&self, t: f64) -> Result<RealField> {
        let times = &self.times;
        if t <= times[0] {
            return Ok(self.states[0].clone());
        }
        let last = times.len() - 1;
        if t >= times[last] {
            return Ok(self.states[last].clone());
        }
        let hi = times.partition_point(|&ti| ti <= t);
        let (t0, t1) = (times[hi - 1], times[hi]);
        let w = (t - t0) / (t1 - t0);
        self.states[hi - 1].scale(1.0 - w).axpy(w, &self.states[hi])
    }

    /// Constant-in-time trajectory.
    fn frozen(state: RealField, t_end: f64) -> Self {
        Self {
            times: vec![0.0, t_end],
            states: vec![state.clone(), state],
        }
    }
}

/// Fixed-step RK4 solve of the full nonlinear equation; the reference
/// solution the iterates converge to.
pub fn solve_direct(u0: &RealField, p: &HksParams, t_end: f64, dt: f64) -> Result<Trajectory> {
    let mut rhs = |u: &RealField, t: f64| rhs_unified(u, t, p);
    drive(u0.clone(), t_end, dt, &mut rhs)
}

fn drive(
    u0: RealField,
    t_end: f64,
    dt: f64,
    rhs: &mut impl FnMut(&RealField, f64) -> Result<RealField>,
) -> Result<Trajectory> {
    if !(t_end > 0.0 && dt > 0.0) {
        return Err(HksError::Domain(format!(
            "need positive horizon and step, got t_end = {t_end}, dt = {dt}"
        )));
    }
    let mut times = vec![0.0];
    let mut states = vec![u0];
    let mut t = 0.0_f64;
    let eps = 1e-12 * t_end.max(1.0);
    while t < t_end - eps {
        let step = dt.min(t_end - t);
        let next = rk4_step(states.last().unwrap(), t, step, rhs)?;
        t += step;
        times.push(t);
        states.push(next);
    }
    Ok(Trajectory { times, states })
}

/// Right-hand side of one linear sweep: coefficients interpolated from the
/// previous iterate's trajectory, advection applied to the current unknown.
fn linear_rhs(w: &RealField, t: f64, p: &HksParams, prev: &Trajectory) -> Result<RealField> {
    let alpha = p.alpha.evaluate(t)?;
    let beta = p.beta.evaluate(t)?;
    let gamma = p.gamma.evaluate(t)?;
    let xi = p.xi.evaluate(t)?;

    let coeff = prev.sample(t)?;
    let coeff_spec = dealias_spec(&forward_transform(&coeff)?);
    let coeff_f = to_real(&coeff_spec);
    let s_spec = bessel_potential_spec(&coeff_spec);
    let grad_s = gradient_spec(&s_spec);
    let delta_s = to_real(&laplacian_spec(&s_spec));

    let w_spec = dealias_spec(&forward_transform(w)?);
    let grad_w = gradient_spec(&w_spec);

    let grid = w.grid();
    let mut vals = vec![0.0; grid.len()];
    let cv = coeff_f.values();
    let ds = delta_s.values();
    for i in 0..vals.len() {
        let mut adv = 0.0;
        for axis in 0..grid.dim() {
            adv += grad_s[axis].values()[i] * grad_w[axis].values()[i];
        }
        let ci = cv[i];
        vals[i] = -(alpha + beta * ci) * adv - (gamma * ci + xi * ci * ci) * ds[i];
    }
    let rhs = RealField::new(grid, vals)?;
    if !rhs.is_finite() {
        return Err(HksError::Divergence {
            t,
            context: Some("linear sweep right-hand side".into()),
        });
    }
    Ok(to_real(&dealias_spec(&forward_transform(&rhs)?)))
}

/// Result of the iteration: one trajectory per iterate (the first entry is
/// the constant-in-time seed) and the sup over time of each iterate's Besov
/// norm, for comparison against the closed-form uniform bound.
#[derive(Debug)]
pub struct FriedrichsResult {
    pub trajectories: Vec<Trajectory>,
    pub sup_norms: Vec<f64>,
}

/// Run `n_iters` iterates on `[0, t_end]` with fixed step `dt`. The sup
/// norms are measured in the Besov index `norm_idx`.
pub fn friedrichs_iterate(
    u0: &RealField,
    p: &HksParams,
    t_end: f64,
    dt: f64,
    n_iters: usize,
    norm_idx: BesovIndex,
) -> Result<FriedrichsResult> {
    if n_iters < 1 {
        return Err(HksError::Domain("n_iters must be >= 1".into()));
    }
    u0.ensure_finite()?;

    let seed = low_freq_cutoff(u0, 1)?;
    let mut trajectories = vec![Trajectory::frozen(seed, t_end)];

    for n in 2..=n_iters {
        let init = low_freq_cutoff(u0, n as i32)?;
        let prev = trajectories
            .last()
            .expect("at least the seed trajectory exists");
        let mut rhs = |w: &RealField, t: f64| linear_rhs(w, t, p, prev);
        let traj = drive(init, t_end, dt, &mut rhs).map_err(|e| match e {
            HksError::Divergence { t, .. } => HksError::Divergence {
                t,
                context: Some(format!("iterate {n}")),
            },
            other => other,
        })?;
        trajectories.push(traj);
    }

    let mut sup_norms = Vec::with_capacity(trajectories.len());
    for traj in &trajectories {
        let mut sup: f64 = 0.0;
        for state in traj.states() {
            sup = sup.max(besov_norm(state, norm_idx)?);
        }
        sup_norms.push(sup);
    }

    Ok(FriedrichsResult {
        trajectories,
        sup_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::sensitivity_params;
    use crate::field::lp_norm;
    use crate::grid::TorusGrid;
    use crate::schedule::ParameterSchedule;
    use crate::spectral::forward_transform;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    #[test]
    fn rejects_zero_iterations() {
        let g = grid1(16);
        let u0 = RealField::zeros(g);
        assert!(friedrichs_iterate(
            &u0,
            &HksParams::constant(1.0, 1.0, 1.0, 1.0),
            0.1,
            0.01,
            0,
            BesovIndex::critical(1)
        )
        .is_err());
    }

    #[test]
    fn constants_are_fixed_points() {
        let g = grid1(32);
        let u0 = RealField::constant(g, 0.6);
        let res = friedrichs_iterate(
            &u0,
            &HksParams::constant(1.0, -2.0, 1.0, -1.0),
            0.2,
            0.02,
            4,
            BesovIndex::critical(1),
        )
        .unwrap();
        assert_eq!(res.trajectories.len(), 4);
        for traj in &res.trajectories {
            for state in traj.states() {
                let dev = state.zip_with(&u0, |a, b| a - b).unwrap().max_abs();
                assert!(dev < 1e-13);
            }
        }
    }

    #[test]
    fn initial_truncations_nest() {
        let g = grid1(64);
        // content in |k| <= 1 plus |k| = 3: the second iterate's initial data
        // S₂u₀ keeps strictly more frequencies than the seed S₁u₀
        let u0 = RealField::from_fn(g, |x, _| 0.2 + 0.1 * x.cos() + 0.05 * (3.0 * x).sin());
        let res = friedrichs_iterate(
            &u0,
            &HksParams::constant(0.1, -0.2, 0.1, -0.1),
            0.05,
            0.01,
            3,
            BesovIndex::critical(1),
        )
        .unwrap();
        let seed0 = res.trajectories[0].initial();
        let init2 = res.trajectories[1].initial();
        let spec0 = forward_transform(seed0).unwrap();
        let spec2 = forward_transform(init2).unwrap();
        // the seed has no |k| = 2,3 content, the next initial data does
        assert!(spec0.coeff_at(3, 0).norm() < 1e-13);
        assert!(spec2.coeff_at(3, 0).norm() > 1e-3);
        assert!(spec2.coeff_at(1, 0).norm() > 1e-3);
    }

    #[test]
    fn iterates_approach_direct_solve() {
        let g = grid1(64);
        let u0 = RealField::from_fn(g, |x, _| {
            0.1 + 0.05 * x.cos() + 0.02 * (2.0 * x).cos() + 0.01 * (3.0 * x).sin()
        });
        let rho = ParameterSchedule::constant(0.2);
        let p = sensitivity_params(&rho);
        let t_end = 0.4;
        let dt = 5e-3;
        let res = friedrichs_iterate(&u0, &p, t_end, dt, 5, BesovIndex::critical(1)).unwrap();
        let reference = solve_direct(&u0, &p, t_end, dt).unwrap();
        let errs: Vec<f64> = res.trajectories[1..]
            .iter()
            .map(|traj| {
                lp_norm(
                    &traj
                        .terminal()
                        .zip_with(reference.terminal(), |a, b| a - b)
                        .unwrap(),
                    2.0,
                )
                .unwrap()
            })
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "errors not decreasing: {errs:?}");
        }
        assert!(*errs.last().unwrap() < 1e-3, "{errs:?}");
    }

    #[test]
    fn iterates_respect_uniform_bound_under_smallness() {
        use crate::oracles::{
            global_threshold_ok, uniform_bound_value, IntegralBundle, TheoryConfig,
        };
        let g = grid1(64);
        let u0 = RealField::from_fn(g, |x, _| 0.1 + 0.03 * x.cos() + 0.01 * (2.0 * x).sin());
        let rho = ParameterSchedule::exp_decay(0.002, 1.0).unwrap();
        let p = sensitivity_params(&rho);
        let idx = BesovIndex::critical(1);
        let norm0 = crate::besov::besov_norm(&u0, idx).unwrap();

        let theory = TheoryConfig::default();
        let bundle = IntegralBundle::from_params(&p).unwrap();
        let rep = global_threshold_ok(norm0, &bundle, &theory).unwrap();
        assert!(rep.satisfied, "preset must sit inside the smallness regime");

        let bound = uniform_bound_value(norm0, &bundle, &theory).unwrap();
        let res = friedrichs_iterate(&u0, &p, 1.0, 1e-2, 6, idx).unwrap();
        for (n, sup) in res.sup_norms.iter().enumerate() {
            assert!(
                *sup <= bound,
                "iterate {} exceeds the ceiling: {sup} > {bound}",
                n + 1
            );
        }
    }

    #[test]
    fn trajectory_interpolation_is_linear() {
        let g = grid1(16);
        let a = RealField::constant(g, 1.0);
        let b = RealField::constant(g, 3.0);
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![a, b],
        };
        let mid = traj.sample(0.25).unwrap();
        assert!((mid.values()[0] - 1.5).abs() < 1e-14);
        // clamped outside the stored range
        assert_eq!(traj.sample(5.0).unwrap().values()[0], 3.0);
    }
}
