//! Time-dependent coefficient schedules with exact absolute integrals.

use crate::error::{HksError, Result};

/// Functional form of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// Constant value `c`.
    Constant(f64),
    /// `amplitude * exp(-rate * t)` with `rate >= 0`.
    ExpDecay { amplitude: f64, rate: f64 },
    /// `1 / (a + b t²)` with `a, b > 0`.
    Rational { a: f64, b: f64 },
    /// Piecewise-linear interpolation of sorted `(t, value)` samples,
    /// constant beyond the table ends (linear extrapolation could silently
    /// flip sign).
    Tabulated(Vec<(f64, f64)>),
}

/// One time-dependent coefficient. `scale` multiplies the base kind, so a
/// schedule family like `-2ϱ(t)` stays in closed form for every kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSchedule {
    kind: ScheduleKind,
    scale: f64,
}

impl ParameterSchedule {
    pub fn new(kind: ScheduleKind) -> Result<Self> {
        match &kind {
            ScheduleKind::Constant(c) => {
                if !c.is_finite() {
                    return Err(HksError::InvalidSchedule("constant must be finite".into()));
                }
            }
            ScheduleKind::ExpDecay { amplitude, rate } => {
                if !amplitude.is_finite() || !rate.is_finite() || *rate < 0.0 {
                    return Err(HksError::InvalidSchedule(
                        "exp-decay requires finite amplitude and rate >= 0".into(),
                    ));
                }
            }
            ScheduleKind::Rational { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(HksError::InvalidSchedule(
                        "rational requires a > 0 and b > 0".into(),
                    ));
                }
            }
            ScheduleKind::Tabulated(points) => {
                if points.is_empty() {
                    return Err(HksError::InvalidSchedule("empty table".into()));
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(HksError::InvalidSchedule(
                            "table times must be strictly increasing".into(),
                        ));
                    }
                }
                if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(HksError::InvalidSchedule(
                        "table entries must be finite".into(),
                    ));
                }
            }
        }
        Ok(Self { kind, scale: 1.0 })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(ScheduleKind::Constant(c)).expect("finite constant")
    }

    pub fn exp_decay(amplitude: f64, rate: f64) -> Result<Self> {
        Self::new(ScheduleKind::ExpDecay { amplitude, rate })
    }

    pub fn rational(a: f64, b: f64) -> Result<Self> {
        Self::new(ScheduleKind::Rational { a, b })
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(ScheduleKind::Tabulated(points))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same schedule multiplied by a constant factor.
    pub fn scaled(&self, factor: f64) -> ParameterSchedule {
        ParameterSchedule {
            kind: self.kind.clone(),
            scale: self.scale * factor,
        }
    }

    /// Pointwise evaluation at `t >= 0`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(HksError::Domain(format!(
                "schedule time must be >= 0, got {t}"
            )));
        }
        Ok(self.scale * self.base_value(t))
    }

    fn base_value(&self, t: f64) -> f64 {
        match &self.kind {
            ScheduleKind::Constant(c) => *c,
            ScheduleKind::ExpDecay { amplitude, rate } => amplitude * (-rate * t).exp(),
            ScheduleKind::Rational { a, b } => 1.0 / (a + b * t * t),
            ScheduleKind::Tabulated(points) => {
                if t <= points[0].0 {
                    return points[0].1;
                }
                let last = points.len() - 1;
                if t >= points[last].0 {
                    return points[last].1;
                }
                let idx = points.partition_point(|(ti, _)| *ti <= t);
                let (t0, v0) = points[idx - 1];
                let (t1, v1) = points[idx];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// `∫_{t0}^{t1} |s(τ)| dτ`. Closed form for the analytic kinds, adaptive
    /// Simpson quadrature (1e-10 absolute) for tables. `t1` may be infinite.
    pub fn integral_abs(&self, t0: f64, t1: f64) -> Result<f64> {
        if !(t0 >= 0.0) {
            return Err(HksError::Domain(format!("t0 must be >= 0, got {t0}")));
        }
        if t1 < t0 {
            return Err(HksError::Domain(format!("t1 = {t1} < t0 = {t0}")));
        }
        let s = self.scale.abs();
        if s == 0.0 || t1 == t0 {
            return Ok(0.0);
        }
        let v = match &self.kind {
            ScheduleKind::Constant(c) => {
                if *c == 0.0 {
                    0.0
                } else if t1.is_infinite() {
                    f64::INFINITY
                } else {
                    c.abs() * (t1 - t0)
                }
            }
            ScheduleKind::ExpDecay { amplitude, rate } => {
                if *amplitude == 0.0 {
                    0.0
                } else if *rate == 0.0 {
                    if t1.is_infinite() {
                        f64::INFINITY
                    } else {
                        amplitude.abs() * (t1 - t0)
                    }
                } else {
                    let upper = if t1.is_infinite() {
                        0.0
                    } else {
                        (-rate * t1).exp()
                    };
                    amplitude.abs() * ((-rate * t0).exp() - upper) / rate
                }
            }
            ScheduleKind::Rational { a, b } => {
                // ∫ dt/(a + b t²) = arctan(t √(b/a)) / √(ab)
                let root = (b / a).sqrt();
                let upper = if t1.is_infinite() {
                    std::f64::consts::FRAC_PI_2
                } else {
                    (t1 * root).atan()
                };
                (upper - (t0 * root).atan()) / (a * b).sqrt()
            }
            ScheduleKind::Tabulated(points) => {
                let t_last = points[points.len() - 1].0;
                let v_last = points[points.len() - 1].1;
                if t1.is_infinite() {
                    if v_last.abs() > 0.0 {
                        f64::INFINITY
                    } else {
                        self.tabulated_abs_integral(points, t0, t_last.max(t0))
                    }
                } else {
                    self.tabulated_abs_integral(points, t0, t1)
                }
            }
        };
        Ok(s * v)
    }

    fn tabulated_abs_integral(&self, points: &[(f64, f64)], t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return 0.0;
        }
        // Split at interior knots so each panel is smooth, then run adaptive
        // Simpson per panel.
        let mut cuts = vec![t0];
        for &(t, _) in points {
            if t > t0 && t < t1 {
                cuts.push(t);
            }
        }
        cuts.push(t1);
        let f = |t: f64| self.base_value(t).abs();
        let tol = 1e-10;
        cuts.windows(2)
            .map(|w| adaptive_simpson(&f, w[0], w[1], tol / (cuts.len() - 1) as f64))
            .sum()
    }
}

fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    adaptive_simpson_rec(f, a, fa, b, fb, m, fm, simpson(a, fa, b, fb, fm), tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, fa, m, fm, flm);
    let right = simpson(m, fm, b, fb, frm);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
        + adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn pointwise_examples() {
        assert_eq!(
            ParameterSchedule::exp_decay(1.0, 2.0)
                .unwrap()
                .evaluate(0.0)
                .unwrap(),
            1.0
        );
        assert_eq!(
            ParameterSchedule::rational(1.0, 1.0)
                .unwrap()
                .evaluate(1.0)
                .unwrap(),
            0.5
        );
        assert_eq!(
            ParameterSchedule::constant(3.0).evaluate(17.3).unwrap(),
            3.0
        );
    }

    #[test]
    fn negative_time_rejected() {
        let s = ParameterSchedule::constant(1.0);
        assert!(s.evaluate(-0.1).is_err());
        assert!(s.integral_abs(1.0, 0.5).is_err());
    }

    #[test]
    fn closed_form_integrals() {
        let e = ParameterSchedule::exp_decay(1.0, 2.0).unwrap();
        assert!((e.integral_abs(0.0, f64::INFINITY).unwrap() - 0.5).abs() < 1e-14);

        let r = ParameterSchedule::rational(1.0, 1.0).unwrap();
        assert!((r.integral_abs(0.0, f64::INFINITY).unwrap() - FRAC_PI_2).abs() < 1e-14);

        let c = ParameterSchedule::constant(-2.0);
        assert!((c.integral_abs(1.0, 3.0).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(c.integral_abs(0.0, f64::INFINITY).unwrap(), f64::INFINITY);

        // rate = 0 degenerates to a constant
        let flat = ParameterSchedule::exp_decay(-1.5, 0.0).unwrap();
        assert!((flat.integral_abs(0.0, 2.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_schedules() {
        let r = ParameterSchedule::rational(1.0, 1.0).unwrap().scaled(-2.0);
        assert_eq!(r.evaluate(1.0).unwrap(), -1.0);
        assert!((r.integral_abs(0.0, f64::INFINITY).unwrap() - 2.0 * FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn tabulated_matches_exponential() {
        let points: Vec<(f64, f64)> = (0..=5000)
            .map(|i| {
                let t = i as f64 * 1e-3;
                (t, (-t).exp())
            })
            .collect();
        let s = ParameterSchedule::tabulated(points).unwrap();
        let got = s.integral_abs(0.0, 5.0).unwrap();
        let want = 1.0 - (-5.0_f64).exp();
        assert!((got - want).abs() < 1e-5, "{got} vs {want}");
    }

    #[test]
    fn tabulated_constant_extrapolation() {
        let s = ParameterSchedule::tabulated(vec![(1.0, 2.0), (2.0, 4.0)]).unwrap();
        assert_eq!(s.evaluate(0.0).unwrap(), 2.0);
        assert_eq!(s.evaluate(10.0).unwrap(), 4.0);
        assert_eq!(s.evaluate(1.5).unwrap(), 3.0);
        // nonzero tail makes the infinite integral diverge
        assert_eq!(s.integral_abs(0.0, f64::INFINITY).unwrap(), f64::INFINITY);
    }

    #[test]
    fn tabulated_sign_change_integral() {
        // |v| has a kink inside a segment; adaptive Simpson must still nail it
        let s = ParameterSchedule::tabulated(vec![(0.0, -1.0), (2.0, 1.0)]).unwrap();
        // |v(t)| = |t - 1| on [0,2]: integral = 1
        assert!((s.integral_abs(0.0, 2.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_forms_match_numeric_quadrature() {
        // independent dense-trapezoid route over a finite window
        let quad = |s: &ParameterSchedule, t0: f64, t1: f64| -> f64 {
            let n = 200_000;
            let h = (t1 - t0) / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                acc += w * s.evaluate(t0 + h * i as f64).unwrap().abs();
            }
            acc * h
        };
        let cases = [
            ParameterSchedule::exp_decay(-1.3, 2.2).unwrap(),
            ParameterSchedule::rational(0.7, 1.9).unwrap().scaled(3.0),
            ParameterSchedule::constant(-0.4),
        ];
        for s in cases {
            let got = s.integral_abs(0.3, 2.7).unwrap();
            let want = quad(&s, 0.3, 2.7);
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn rejects_invalid_kinds() {
        assert!(ParameterSchedule::exp_decay(1.0, -0.5).is_err());
        assert!(ParameterSchedule::rational(0.0, 1.0).is_err());
        assert!(ParameterSchedule::rational(1.0, -1.0).is_err());
        assert!(ParameterSchedule::tabulated(vec![]).is_err());
        assert!(ParameterSchedule::tabulated(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
    }

    proptest! {
        #[test]
        fn integral_abs_nondecreasing(
            c in -3.0f64..3.0,
            rate in 0.0f64..4.0,
            cut in 0.1f64..5.0,
        ) {
            let schedules = [
                ParameterSchedule::constant(c),
                ParameterSchedule::exp_decay(c, rate).unwrap(),
                ParameterSchedule::rational(0.5 + c.abs(), 0.1 + rate).unwrap(),
            ];
            for s in schedules {
                let a = s.integral_abs(0.0, cut).unwrap();
                let b = s.integral_abs(0.0, cut * 1.5).unwrap();
                prop_assert!(b >= a - 1e-12);
            }
        }

        #[test]
        fn evaluate_finite_for_nonnegative_times(t in 0.0f64..100.0) {
            let s = ParameterSchedule::rational(0.3, 2.0).unwrap().scaled(-7.0);
            prop_assert!(s.evaluate(t).unwrap().is_finite());
        }
    }
}
