//! Shared oracle evaluation for the run, sweep and check commands.

use crate::config::Resolved;
use crate::report::{num, oracle_value};
use hks_core::besov::{besov_norm, BesovIndex};
use hks_core::equation::EquationVariant;
use hks_core::oracles::{
    blowup_lower_bound_critical, blowup_lower_bound_noncritical, global_threshold_ok, h_function,
    lambda_sufficiency_ok, sufficient_lambda, uniform_bound_value, IntegralBundle, OracleReport,
};
use hks_core::Result;
use serde_json::{Map, Value};

/// Everything the oracles can say about a configuration before (or without)
/// simulating it.
pub struct TheorySummary {
    pub critical_norm: f64,
    pub configured_norm: f64,
    pub i_ab: f64,
    pub i_total: f64,
    pub threshold_critical: OracleReport,
    pub threshold_configured: OracleReport,
    /// Damping-rate condition, for the variants that carry a rate.
    pub lambda_sufficiency: Option<OracleReport>,
    pub lambda_star: f64,
    pub t_lower_critical: f64,
    pub t_lower_noncritical: f64,
    pub uniform_bound: f64,
    pub h_h0: f64,
}

pub fn theory_summary(r: &Resolved) -> Result<TheorySummary> {
    let critical_idx = BesovIndex::critical(r.grid.dim());
    let critical_norm = besov_norm(&r.u0, critical_idx)?;
    let configured_norm = besov_norm(&r.u0, r.theory.besov_index)?;

    let params = r.variant.monitor_params();
    let bundle = IntegralBundle::from_params(&params)?;

    let threshold_critical = global_threshold_ok(critical_norm, &bundle, &r.theory)?;
    let threshold_configured = global_threshold_ok(configured_norm, &bundle, &r.theory)?;

    let lambda_sufficiency = match &r.variant {
        EquationVariant::Damped(lambda) | EquationVariant::Transformed(lambda) => {
            Some(lambda_sufficiency_ok(configured_norm, *lambda, &r.theory)?)
        }
        _ => None,
    };

    Ok(TheorySummary {
        critical_norm,
        configured_norm,
        i_ab: bundle.i_ab(),
        i_total: bundle.i_total(),
        t_lower_critical: blowup_lower_bound_critical(critical_norm, &params, &r.theory)?,
        t_lower_noncritical: blowup_lower_bound_noncritical(configured_norm, &params, &r.theory)?,
        uniform_bound: uniform_bound_value(configured_norm, &bundle, &r.theory)?,
        h_h0: h_function(1.0 + configured_norm, &bundle, &r.theory)?,
        lambda_star: sufficient_lambda(configured_norm, &r.theory),
        threshold_critical,
        threshold_configured,
        lambda_sufficiency,
    })
}

impl TheorySummary {
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("besov_norm_configured".into(), num(self.configured_norm));
        m.insert("besov_norm_critical".into(), num(self.critical_norm));
        m.insert(
            "conditions".into(),
            Value::Array(
                [
                    Some(&self.threshold_critical),
                    Some(&self.threshold_configured),
                    self.lambda_sufficiency.as_ref(),
                ]
                .into_iter()
                .flatten()
                .map(oracle_value)
                .collect(),
            ),
        );
        m.insert("h_of_one_plus_norm".into(), num(self.h_h0));
        m.insert("integral_ab".into(), num(self.i_ab));
        m.insert("integral_total".into(), num(self.i_total));
        m.insert("lambda_star".into(), num(self.lambda_star));
        m.insert("t_lower_critical".into(), num(self.t_lower_critical));
        m.insert("t_lower_noncritical".into(), num(self.t_lower_noncritical));
        m.insert("uniform_bound".into(), num(self.uniform_bound));
        Value::Object(m)
    }
}
