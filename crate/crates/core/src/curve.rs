//! The reparametrized hyperbolastic type-I growth curve
//!
//! ```text
//! x(t) = x0 (eta + xi(t0)) / (eta + xi(t)),   xi(t) = lambda^t * mu^asinh(t)
//! ```
//!
//! Only the increasing regime is representable: `0 < lambda < 1` and
//! `mu < lambda^(-sqrt(1 + t0^2))` (with `t0` replaced by 0 when negative).

use serde::{Deserialize, Serialize};

use crate::error::{H1Error, Result};

/// Default number of scan points used by [`CurveParams::inflection_times`].
pub const DEFAULT_SCAN_POINTS: usize = 2000;

const BISECTION_TOL: f64 = 1e-10;

/// Plain, unvalidated form of [`CurveParams`] used for (de)serialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub eta: f64,
    pub lambda: f64,
    pub mu: f64,
    #[serde(default)]
    pub t0: f64,
    pub x0: f64,
}

/// Validated curve parameters with cached logarithms of `lambda` and `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveSpec", into = "CurveSpec")]
pub struct CurveParams {
    eta: f64,
    lambda: f64,
    mu: f64,
    t0: f64,
    x0: f64,
    ln_lambda: f64,
    ln_mu: f64,
}

impl TryFrom<CurveSpec> for CurveParams {
    type Error = H1Error;

    fn try_from(s: CurveSpec) -> Result<Self> {
        CurveParams::new(s.eta, s.lambda, s.mu, s.t0, s.x0)
    }
}

impl From<CurveParams> for CurveSpec {
    fn from(p: CurveParams) -> Self {
        CurveSpec {
            eta: p.eta,
            lambda: p.lambda,
            mu: p.mu,
            t0: p.t0,
            x0: p.x0,
        }
    }
}

/// `c_lambda(t) = lambda^(-sqrt(1+t^2))`.
pub fn c_lambda(lambda: f64, t: f64) -> f64 {
    (-(1.0 + t * t).sqrt() * lambda.ln()).exp()
}

/// Ceiling on `mu` keeping the curve increasing on `[t0, inf)`:
/// `min_{t >= t0} c_lambda(t)`, which is `c_lambda(t0)` for `t0 >= 0` and
/// `c_lambda(0) = 1/lambda` otherwise.
pub fn mu_ceiling(lambda: f64, t0: f64) -> f64 {
    c_lambda(lambda, t0.max(0.0))
}

impl CurveParams {
    pub fn new(eta: f64, lambda: f64, mu: f64, t0: f64, x0: f64) -> Result<Self> {
        let all_finite = [eta, lambda, mu, t0, x0].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(H1Error::InvalidParams("non-finite curve parameter".into()));
        }
        if eta <= 0.0 {
            return Err(H1Error::InvalidParams(format!("eta must be positive, got {eta}")));
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(H1Error::InvalidParams(format!(
                "lambda must lie in (0, 1) for an increasing curve, got {lambda}"
            )));
        }
        if mu <= 0.0 {
            return Err(H1Error::InvalidParams(format!("mu must be positive, got {mu}")));
        }
        if x0 <= 0.0 {
            return Err(H1Error::InvalidParams(format!("x0 must be positive, got {x0}")));
        }
        let ln_lambda = lambda.ln();
        let ln_mu = mu.ln();
        // mu < c_lambda(max(t0, 0)), compared in log space
        let tc = t0.max(0.0);
        if ln_mu >= -(1.0 + tc * tc).sqrt() * ln_lambda {
            return Err(H1Error::InvalidParams(format!(
                "mu = {mu} violates the increasing-curve condition mu < {}",
                mu_ceiling(lambda, t0)
            )));
        }
        Ok(Self {
            eta,
            lambda,
            mu,
            t0,
            x0,
            ln_lambda,
            ln_mu,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn ln_lambda(&self) -> f64 {
        self.ln_lambda
    }

    pub fn ln_mu(&self) -> f64 {
        self.ln_mu
    }

    /// Same curve with a different initial value.
    pub fn with_x0(&self, x0: f64) -> Result<Self> {
        Self::new(self.eta, self.lambda, self.mu, self.t0, x0)
    }

    /// `xi(t) = lambda^t mu^asinh(t)`, evaluated as `exp(t ln lambda + asinh(t) ln mu)`.
    #[inline]
    pub fn xi(&self, t: f64) -> f64 {
        xi_from_logs(t, self.ln_lambda, self.ln_mu)
    }

    /// `(eta + xi(s)) / (eta + xi(t))`, the deterministic growth factor from `s` to `t`.
    #[inline]
    pub fn growth_ratio(&self, s: f64, t: f64) -> f64 {
        (self.eta + self.xi(s)) / (self.eta + self.xi(t))
    }

    /// Logarithm of [`growth_ratio`](Self::growth_ratio).
    #[inline]
    pub fn ln_growth_ratio(&self, s: f64, t: f64) -> f64 {
        (self.eta + self.xi(s)).ln() - (self.eta + self.xi(t)).ln()
    }

    pub fn curve_value(&self, t: f64) -> Result<f64> {
        if t < self.t0 || t.is_nan() {
            return Err(H1Error::Domain(format!(
                "curve evaluated at t = {t} before the time origin t0 = {}",
                self.t0
            )));
        }
        Ok(self.x0 * self.growth_ratio(self.t0, t))
    }

    /// Upper asymptote `k = x0 (1 + xi(t0) / eta)`.
    pub fn asymptote(&self) -> f64 {
        self.x0 * (1.0 + self.xi(self.t0) / self.eta)
    }

    pub fn to_classical(&self) -> ClassicalParams {
        ClassicalParams {
            m: self.asymptote(),
            rho: -self.ln_lambda,
            theta: -self.ln_mu,
            t0: self.t0,
            x0: self.x0,
        }
    }

    pub fn from_classical(c: &ClassicalParams) -> Result<Self> {
        c.validate()?;
        if c.rho <= 0.0 {
            return Err(H1Error::InvalidParams(format!(
                "rho = {} implies lambda >= 1 (decay profile)",
                c.rho
            )));
        }
        CurveParams::new(1.0 / c.a(), (-c.rho).exp(), (-c.theta).exp(), c.t0, c.x0)
    }

    /// Left-hand minus right-hand side of the inflection equation.
    ///
    /// Returns `None` where `ln lambda + ln mu / sqrt(1+t^2)` vanishes.
    pub fn inflection_residual(&self, t: f64) -> Option<f64> {
        let p = self.log_xi_slope(t);
        if p == 0.0 {
            return None;
        }
        let q = 1.0 + t * t;
        let rhs = t * self.ln_mu / (q * q.sqrt()) / (p * p);
        Some(2.0 * self.eta / (self.eta + self.xi(t)) - 1.0 - rhs)
    }

    /// `d/dt ln xi(t)`.
    fn log_xi_slope(&self, t: f64) -> f64 {
        self.ln_lambda + self.ln_mu / (1.0 + t * t).sqrt()
    }

    /// Inflection times in `[t_lo, t_hi]` using the default scan density.
    pub fn inflection_times(&self, t_lo: f64, t_hi: f64) -> Result<Vec<f64>> {
        self.inflection_times_with(t_lo, t_hi, DEFAULT_SCAN_POINTS)
    }

    /// All sign changes of the inflection residual on a uniform scan grid,
    /// refined by bisection. No uniqueness is assumed.
    pub fn inflection_times_with(&self, t_lo: f64, t_hi: f64, scan_points: usize) -> Result<Vec<f64>> {
        if t_lo < self.t0 {
            return Err(H1Error::Domain(format!(
                "search window starts at {t_lo}, before t0 = {}",
                self.t0
            )));
        }
        if !(t_hi > t_lo) || scan_points < 2 {
            return Err(H1Error::Domain(format!(
                "empty search window [{t_lo}, {t_hi}] or fewer than 2 scan points"
            )));
        }
        let step = (t_hi - t_lo) / (scan_points - 1) as f64;
        let grid: Vec<f64> = (0..scan_points)
            .map(|k| if k + 1 == scan_points { t_hi } else { t_lo + k as f64 * step })
            .collect();

        let mut roots = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for &t in &grid {
            let g = self
                .inflection_residual(t)
                .ok_or(H1Error::Singular { t })?;
            if let Some((ta, ga)) = prev {
                if self.log_xi_slope(ta).signum() != self.log_xi_slope(t).signum() {
                    return Err(H1Error::Singular { t: 0.5 * (ta + t) });
                }
                if g == 0.0 {
                    roots.push(t);
                } else if ga != 0.0 && ga.signum() != g.signum() {
                    roots.push(self.bisect(ta, ga, t));
                }
            } else if g == 0.0 {
                roots.push(t);
            }
            prev = Some((t, g));
        }
        Ok(roots)
    }

    fn bisect(&self, mut a: f64, mut ga: f64, mut b: f64) -> f64 {
        while b - a > BISECTION_TOL {
            let m = 0.5 * (a + b);
            // bracket contains no singularity, so the residual is defined
            let gm = self.inflection_residual(m).unwrap_or(0.0);
            if gm == 0.0 {
                return m;
            }
            if gm.signum() == ga.signum() {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

#[inline]
pub(crate) fn xi_from_logs(t: f64, ln_lambda: f64, ln_mu: f64) -> f64 {
    (t * ln_lambda + t.asinh() * ln_mu).exp()
}

/// Classical parametrization: carrying capacity `M` and growth rates `rho`, `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalParams {
    pub m: f64,
    pub rho: f64,
    pub theta: f64,
    pub t0: f64,
    pub x0: f64,
}

impl ClassicalParams {
    fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0 && self.m > self.x0) {
            return Err(H1Error::InvalidParams(format!(
                "classical parameters need M > x0 > 0, got M = {}, x0 = {}",
                self.m, self.x0
            )));
        }
        Ok(())
    }

    /// `a = x0^-1 (M - x0) exp(rho t0 + theta asinh(t0))`.
    pub fn a(&self) -> f64 {
        (self.m - self.x0) / self.x0 * (self.rho * self.t0 + self.theta * self.t0.asinh()).exp()
    }

    /// Solution of the Bernoulli equation, `M / (1 + a exp(-rho t - theta asinh t))`.
    pub fn value(&self, t: f64) -> f64 {
        self.m / (1.0 + self.a() * (-self.rho * t - self.theta * t.asinh()).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn study1() -> CurveParams {
        CurveParams::new(0.5, 0.8, 0.8, 0.0, 0.1).unwrap()
    }

    #[test]
    fn xi_at_zero_is_one() {
        assert_eq!(study1().xi(0.0), 1.0);
    }

    #[test]
    fn xi_matches_direct_powers() {
        let p = study1();
        let asinh1 = (1.0 + 2f64.sqrt()).ln();
        let direct = 0.8f64.powf(1.0) * 0.8f64.powf(asinh1);
        assert!((p.xi(1.0) - direct).abs() < 1e-15);
        assert!((p.xi(1.0) - 0.6571674754923036).abs() < 1e-14);
    }

    #[test]
    fn xi_decreasing_for_sub_unit_rates() {
        let p = study1();
        let mut prev = p.xi(0.0);
        for k in 1..=1000 {
            let x = p.xi(k as f64 * 0.01);
            assert!(x < prev);
            prev = x;
        }
        assert!(p.xi(10.0) < p.xi(1.0));
    }

    #[test]
    fn xi_does_not_underflow_to_nan() {
        let p = CurveParams::new(0.5, 0.01, 0.8, 0.0, 0.1).unwrap();
        let v = p.xi(1e4);
        assert!(v >= 0.0 && v.is_finite());
        assert!((p.curve_value(1e4).unwrap() - p.asymptote()).abs() < 1e-15);
    }

    #[test]
    fn curve_at_origin_and_limit() {
        let p = study1();
        assert_eq!(p.curve_value(0.0).unwrap(), 0.1);
        assert!((p.curve_value(200.0).unwrap() - 0.3).abs() < 1e-12);
        assert!(p.curve_value(-0.1).is_err());
    }

    #[test]
    fn unit_mu_reduces_to_logistic() {
        let p = CurveParams::new(0.5, 0.8, 1.0, 1.0, 0.2).unwrap();
        for k in 0..50 {
            let t = 1.0 + k as f64 * 0.7;
            let logistic = 0.2 * (0.5 + 0.8f64.powf(1.0)) / (0.5 + 0.8f64.powf(t));
            let v = p.curve_value(t).unwrap();
            assert!((v - logistic).abs() < 1e-14 * logistic);
        }
    }

    #[test]
    fn asymptote_values() {
        assert!((study1().asymptote() - 0.3).abs() < 1e-15);
        let p2 = CurveParams::new(0.0003, 0.6, 0.8, 0.0, 0.000125).unwrap();
        assert!((p2.asymptote() - 0.41679166666666667).abs() < 1e-12);
        // xi(t0)/eta -> 0
        let p3 = CurveParams::new(1e12, 0.6, 0.8, 0.0, 0.5).unwrap();
        assert!((p3.asymptote() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invariant_violations_are_rejected() {
        assert!(CurveParams::new(0.5, 1.0, 0.8, 0.0, 0.1).is_err());
        assert!(CurveParams::new(0.5, 0.8, 1.25, 0.0, 0.1).is_err());
        assert!(CurveParams::new(0.5, 0.8, 1.2499, 0.0, 0.1).is_ok());
        assert!(CurveParams::new(-0.5, 0.8, 0.8, 0.0, 0.1).is_err());
        assert!(CurveParams::new(0.5, 0.8, 0.8, 0.0, 0.0).is_err());
        assert!(CurveParams::new(0.5, 0.8, -0.8, 0.0, 0.1).is_err());
    }

    #[test]
    fn classical_conversion() {
        let p = study1();
        let c = p.to_classical();
        assert!((c.m - 0.3).abs() < 1e-15);
        assert!((c.rho + 0.8f64.ln()).abs() < 1e-15);
        assert!((c.theta + 0.8f64.ln()).abs() < 1e-15);
        assert!((c.a() - 2.0).abs() < 1e-12);
        for k in 0..20 {
            let t = k as f64 * 2.5;
            assert!((c.value(t) - p.curve_value(t).unwrap()).abs() < 1e-14);
        }
        let c1 = ClassicalParams { m: 2.0, rho: 1.0, theta: 0.0, t0: 0.0, x0: 1.0 };
        let p1 = CurveParams::from_classical(&c1).unwrap();
        assert!((p1.lambda() - (-1f64).exp()).abs() < 1e-15);
        let decay = ClassicalParams { rho: -0.1, ..c1 };
        assert!(CurveParams::from_classical(&decay).is_err());
    }

    #[test]
    fn logistic_inflection_closed_form() {
        let p = CurveParams::new(0.5, 0.8, 1.0, 0.0, 0.1).unwrap();
        let roots = p.inflection_times(0.0, 50.0).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 3.1062837195053903).abs() < 1e-8);
    }

    fn second_difference(p: &CurveParams, t: f64, h: f64) -> f64 {
        p.curve_value(t + h).unwrap() - 2.0 * p.curve_value(t).unwrap() + p.curve_value(t - h).unwrap()
    }

    #[test]
    fn study1_has_one_inflection() {
        let p = study1();
        let roots = p.inflection_times(0.0, 50.0).unwrap();
        assert_eq!(roots.len(), 1);
        let r = roots[0];
        // second difference of the curve changes sign across the root
        let before = second_difference(&p, r - 1e-2, 1e-4);
        let after = second_difference(&p, r + 1e-2, 1e-4);
        assert!(before > 0.0 && after < 0.0, "{before} {after}");
        // independent check: maximum of the discrete slope sits at the root
        let mut best = (0.0, f64::MIN);
        for k in 1..50_000 {
            let t = k as f64 * 1e-3;
            let slope = p.curve_value(t + 1e-4).unwrap() - p.curve_value(t).unwrap();
            if slope > best.1 {
                best = (t, slope);
            }
        }
        assert!((best.0 - r).abs() < 5e-3, "{} vs {r}", best.0);
    }

    #[test]
    fn plateau_window_has_no_inflection() {
        assert!(study1().inflection_times(30.0, 50.0).unwrap().is_empty());
    }

    #[test]
    fn window_before_origin_rejected() {
        let p = CurveParams::new(0.5, 0.8, 0.8, 1.0, 0.1).unwrap();
        assert!(p.inflection_times(0.0, 5.0).is_err());
    }

    #[test]
    fn negative_origin_uses_the_tighter_ceiling() {
        // c_lambda(-5) admits mu = lambda^-2, but the curve would then decrease near t = 0
        assert!(c_lambda(0.9, -5.0) > 0.9f64.powi(-2));
        assert!(CurveParams::new(0.5, 0.9, 0.9f64.powi(-2), -5.0, 0.1).is_err());
        assert!(CurveParams::new(0.5, 0.9, 1.11, -5.0, 0.1).is_ok());
    }

    #[test]
    fn singular_bracket_reported() {
        // ln(lambda) + ln(mu)/sqrt(1+t^2) vanishes at t = sqrt(3); the
        // parameters bypass validation to expose the singular window
        let lambda = 0.9f64;
        let ln_mu = -2.0 * lambda.ln();
        let p = CurveParams { eta: 0.5, lambda, mu: ln_mu.exp(), t0: 0.0, x0: 0.1, ln_lambda: lambda.ln(), ln_mu };
        match p.inflection_times(0.0, 3.0) {
            Err(H1Error::Singular { t }) => assert!((t - 3f64.sqrt()).abs() < 0.01),
            other => panic!("expected singularity, got {other:?}"),
        }
        assert!(p.inflection_times(0.0, 1.0).is_ok());
    }

    fn valid_params() -> impl Strategy<Value = CurveParams> {
        (0.01f64..5.0, 0.05f64..0.95, 0.05f64..1.0, -3.0f64..3.0, 0.01f64..2.0).prop_filter_map(
            "increasing regime",
            |(eta, lambda, frac, t0, x0)| {
                let mu = frac * mu_ceiling(lambda, t0).min(1e6);
                CurveParams::new(eta, lambda, mu, t0, x0).ok()
            },
        )
    }

    proptest! {
        #[test]
        fn curve_starts_at_x0(p in valid_params()) {
            prop_assert_eq!(p.curve_value(p.t0()).unwrap(), p.x0());
        }

        #[test]
        fn curve_is_increasing_and_bounded(p in valid_params(), a in 0.0f64..20.0, b in 0.001f64..20.0) {
            let s = p.t0() + a;
            let t = s + b;
            let (vs, vt) = (p.curve_value(s).unwrap(), p.curve_value(t).unwrap());
            prop_assert!(vs <= vt);
            prop_assert!(vt >= p.x0() && vt <= p.asymptote() * (1.0 + 1e-14));
        }

        #[test]
        fn classical_round_trip(p in valid_params()) {
            let q = CurveParams::from_classical(&p.to_classical()).unwrap();
            prop_assert!((q.eta() - p.eta()).abs() <= 1e-12 * p.eta().max(1.0));
            prop_assert!((q.lambda() - p.lambda()).abs() <= 1e-12);
            prop_assert!((q.mu() - p.mu()).abs() <= 1e-12 * p.mu().max(1.0));
            prop_assert_eq!(q.x0(), p.x0());
        }
    }
}
