//! Right-hand sides for the hyperbolic Keller-Segel equation family.
//!
//! The unified transport form is
//!
//! `∂_t u + (α(t) + β(t) u) ∇S·∇u + (γ(t) u + ξ(t) u²) ΔS = 0`,
//! `S = (I - Δ)^{-1} u`,
//!
//! and the specializations below recover the classical equation, the
//! sensitivity-adjusted equation with coefficient ϱ(t), the weakly damped
//! equation with source `-λu`, and the exponentially rescaled version of the
//! damped equation.
//!
//! All quadratic and cubic products are evaluated pseudospectrally with
//! 2/3-rule truncation of the inputs and of the assembled result, so aliasing
//! cannot masquerade as blow-up in this inviscid setting.

use crate::error::{HksError, Result};
use crate::field::RealField;
use crate::schedule::ParameterSchedule;
use crate::spectral::{
    bessel_potential_spec, dealias_spec, forward_transform, gradient_spec, laplacian_spec, to_real,
};

/// The four coefficient schedules of the unified equation.
#[derive(Debug, Clone)]
pub struct HksParams {
    pub alpha: ParameterSchedule,
    pub beta: ParameterSchedule,
    pub gamma: ParameterSchedule,
    pub xi: ParameterSchedule,
}

impl HksParams {
    pub fn constant(alpha: f64, beta: f64, gamma: f64, xi: f64) -> Self {
        Self {
            alpha: ParameterSchedule::constant(alpha),
            beta: ParameterSchedule::constant(beta),
            gamma: ParameterSchedule::constant(gamma),
            xi: ParameterSchedule::constant(xi),
        }
    }

    /// `|α| + |β| + |γ| + |ξ|` at time `t`.
    pub fn weight(&self, t: f64) -> Result<f64> {
        Ok(self.alpha.evaluate(t)?.abs()
            + self.beta.evaluate(t)?.abs()
            + self.gamma.evaluate(t)?.abs()
            + self.xi.evaluate(t)?.abs())
    }

    /// `∫_{t0}^{t1} (|α| + |β| + |γ| + |ξ|) dτ`.
    pub fn weight_integral(&self, t0: f64, t1: f64) -> Result<f64> {
        Ok(self.alpha.integral_abs(t0, t1)?
            + self.beta.integral_abs(t0, t1)?
            + self.gamma.integral_abs(t0, t1)?
            + self.xi.integral_abs(t0, t1)?)
    }
}

/// Which member of the equation family to integrate.
#[derive(Debug, Clone)]
pub enum EquationVariant {
    /// The four-parameter unified transport form.
    Unified(HksParams),
    /// Sensitivity coefficient ≡ 1; transport form.
    Classical,
    /// Conservative form `∂_t u + ∇·(ϱ(t) u (1-u) ∇S) = 0`.
    SensitivityAdjusted(ParameterSchedule),
    /// Classical transport form plus the damping source `-λu`, `λ > 0`.
    Damped(f64),
    /// The damped equation rewritten for `e^{λt} u`, which trades the source
    /// term for exponentially decaying coefficients.
    Transformed(f64),
}

impl EquationVariant {
    pub fn validate(&self) -> Result<()> {
        match self {
            EquationVariant::Damped(lambda) | EquationVariant::Transformed(lambda)
                if !(lambda.is_finite() && *lambda > 0.0) =>
            {
                Err(HksError::Domain(format!(
                    "damping rate must be positive, got {lambda}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// The advection coefficient schedules `(α, β)` entering the velocity
    /// `(α + βu)∇S`; used for CFL control.
    pub fn advection_params(&self) -> (ParameterSchedule, ParameterSchedule) {
        match self {
            EquationVariant::Unified(p) => (p.alpha.clone(), p.beta.clone()),
            EquationVariant::Classical | EquationVariant::Damped(_) => (
                ParameterSchedule::constant(1.0),
                ParameterSchedule::constant(-2.0),
            ),
            EquationVariant::SensitivityAdjusted(rho) => (rho.clone(), rho.scaled(-2.0)),
            EquationVariant::Transformed(lambda) => {
                let p = transformed_params(*lambda);
                (p.alpha, p.beta)
            }
        }
    }

    /// Effective unified schedules used by monitors and criterion
    /// accumulators. The damped variant reports the schedules of its
    /// exponentially rescaled form, which is the four-parameter system its
    /// solution corresponds to.
    pub fn monitor_params(&self) -> HksParams {
        match self {
            EquationVariant::Unified(p) => p.clone(),
            EquationVariant::Classical => classical_params(),
            EquationVariant::SensitivityAdjusted(rho) => sensitivity_params(rho),
            EquationVariant::Damped(lambda) | EquationVariant::Transformed(lambda) => {
                transformed_params(*lambda)
            }
        }
    }
}

/// Coefficients of the classical equation in unified form. Expanding
/// `∇·(u(1-u)∇S)` gives `(1 - 2u)∇S·∇u + (u - u²)ΔS`, i.e.
/// `(α, β, γ, ξ) = (1, -2, 1, -1)`.
pub fn classical_params() -> HksParams {
    HksParams::constant(1.0, -2.0, 1.0, -1.0)
}

/// Coefficients of the sensitivity-adjusted equation: `(ϱ, -2ϱ, ϱ, -ϱ)`.
pub fn sensitivity_params(rho: &ParameterSchedule) -> HksParams {
    HksParams {
        alpha: rho.clone(),
        beta: rho.scaled(-2.0),
        gamma: rho.clone(),
        xi: rho.scaled(-1.0),
    }
}

/// Coefficients of the rescaled damped equation. Substituting
/// `ũ = e^{λt} u` into the damped transport form yields
/// `(α, β, γ, ξ) = (e^{-λt}, -2e^{-2λt}, e^{-λt}, -e^{-2λt})`.
pub fn transformed_params(lambda: f64) -> HksParams {
    transformed_params_with_xi_sign(lambda, false)
}

/// Same as [`transformed_params`], with an optional sign flip on ξ. The
/// substitution determines ξ = -e^{-2λt}; `positive_xi` selects the opposite
/// convention for side-by-side comparison (the rescaling identity only holds
/// with the negative sign, which the residual tests verify empirically).
pub fn transformed_params_with_xi_sign(lambda: f64, positive_xi: bool) -> HksParams {
    let xi_amp = if positive_xi { 1.0 } else { -1.0 };
    HksParams {
        alpha: ParameterSchedule::exp_decay(1.0, lambda).expect("valid rate"),
        beta: ParameterSchedule::exp_decay(-2.0, 2.0 * lambda).expect("valid rate"),
        gamma: ParameterSchedule::exp_decay(1.0, lambda).expect("valid rate"),
        xi: ParameterSchedule::exp_decay(xi_amp, 2.0 * lambda).expect("valid rate"),
    }
}

/// Map a non-unified variant to its unified coefficient schedules.
pub fn specialize_parameters(variant: &EquationVariant) -> Result<HksParams> {
    match variant {
        EquationVariant::Unified(_) => Err(HksError::Domain(
            "variant is already in unified form".into(),
        )),
        EquationVariant::Classical => Ok(classical_params()),
        EquationVariant::SensitivityAdjusted(rho) => Ok(sensitivity_params(rho)),
        EquationVariant::Transformed(lambda) => Ok(transformed_params(*lambda)),
        EquationVariant::Damped(_) => Err(HksError::Domain(
            "the damped equation carries a source term outside the unified form; \
             integrate it directly or use its rescaled variant"
                .into(),
        )),
    }
}

fn ensure_rhs_finite(rhs: RealField, t: f64) -> Result<RealField> {
    if rhs.is_finite() {
        Ok(rhs)
    } else {
        Err(HksError::Divergence {
            t,
            context: Some("right-hand side evaluation".into()),
        })
    }
}

/// `∂_t u = -(α + βu)∇S·∇u - (γu + ξu²)ΔS` with `S = (I-Δ)^{-1}u`,
/// evaluated pseudospectrally with dealiased products.
pub fn rhs_unified(u: &RealField, t: f64, p: &HksParams) -> Result<RealField> {
    let alpha = p.alpha.evaluate(t)?;
    let beta = p.beta.evaluate(t)?;
    let gamma = p.gamma.evaluate(t)?;
    let xi = p.xi.evaluate(t)?;

    let spec = dealias_spec(&forward_transform(u)?);
    let uf = to_real(&spec);
    let s_spec = bessel_potential_spec(&spec);
    let grad_s = gradient_spec(&s_spec);
    let grad_u = gradient_spec(&spec);
    let delta_s = to_real(&laplacian_spec(&s_spec));

    let mut rhs = vec![0.0; uf.grid().len()];
    let uv = uf.values();
    let ds = delta_s.values();
    for i in 0..rhs.len() {
        let mut adv = 0.0;
        for axis in 0..uf.grid().dim() {
            adv += grad_s[axis].values()[i] * grad_u[axis].values()[i];
        }
        let ui = uv[i];
        rhs[i] = -(alpha + beta * ui) * adv - (gamma * ui + xi * ui * ui) * ds[i];
    }
    let rhs = RealField::new(uf.grid(), rhs)?;
    let rhs = ensure_rhs_finite(rhs, t)?;
    let filtered = to_real(&dealias_spec(&forward_transform(&rhs)?));
    Ok(filtered)
}

/// Conservative form `∂_t u = -∇·(ϱ(t) u (1-u) ∇S)`, computed as the
/// spectral divergence of the pointwise flux. The zero-frequency multiplier
/// of the divergence vanishes, so the mean is conserved exactly.
pub fn rhs_divergence(u: &RealField, t: f64, rho: &ParameterSchedule) -> Result<RealField> {
    let r = rho.evaluate(t)?;

    let spec = dealias_spec(&forward_transform(u)?);
    let uf = to_real(&spec);
    let s_spec = bessel_potential_spec(&spec);
    let grad_s = gradient_spec(&s_spec);

    let grid = uf.grid();
    let ny = grid.nyquist();
    let mut div = RealField::zeros(grid);
    for (axis, gs) in grad_s.iter().enumerate() {
        let flux = uf.zip_with(gs, |ui, gsi| r * ui * (1.0 - ui) * gsi)?;
        let flux_spec = dealias_spec(&forward_transform(&flux)?);
        let dflux = flux_spec.apply_multiplier(|k| {
            if k[axis] == ny {
                num_complex::Complex64::new(0.0, 0.0)
            } else {
                num_complex::Complex64::new(0.0, k[axis] as f64)
            }
        });
        div = div.axpy(-1.0, &to_real(&dflux))?;
    }
    ensure_rhs_finite(div, t)
}

/// Damped transport form `∂_t u = -(1-2u)∇S·∇u - (u-u²)ΔS - λu`.
pub fn rhs_damped(u: &RealField, t: f64, lambda: f64) -> Result<RealField> {
    let transport = rhs_unified(u, t, &classical_params())?;
    // the damping term is linear; it needs no dealiasing of its own
    let rhs = transport.zip_with(u, |r, ui| r - lambda * ui)?;
    ensure_rhs_finite(rhs, t)
}
