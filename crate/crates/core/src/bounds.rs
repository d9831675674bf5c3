//! Stagewise bounding of the parameter space used to seed and confine the
//! firefly search.
//!
//! `lambda` lives in `(0, 1)`. Given `lambda`, `mu` lives in
//! `(0, lambda^(-sqrt(1+t0^2)))`. `eta` is bracketed by the ratios between
//! each path's maximum and its initial value, scaled by `xi(t0)`, which depends
//! on the sampled `(lambda, mu)` unless `t0 = 0`. `sigma` lives in `(0, 0.5)`.

use serde::{Deserialize, Serialize};

use crate::curve::{mu_ceiling, xi_from_logs};
use crate::error::{H1Error, Result};
use crate::process::PathPanel;

/// Distance kept from open endpoints when sampling or clamping.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Relative half-width used to widen a degenerate `eta` interval.
pub const DEGENERATE_WIDENING: f64 = 0.10;

/// Upper bound of the `sigma` search interval.
pub const SIGMA_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_open(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// Closed sub-interval kept `eps` away from both endpoints.
    pub fn interior(&self, eps: f64) -> Interval {
        Interval::new(self.lo + eps, self.hi - eps)
    }

    pub fn union(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Point at fraction `u` of the way from `lo` to `hi`.
    pub fn lerp(&self, u: f64) -> f64 {
        self.lo + u * (self.hi - self.lo)
    }
}

/// `(0, 1)`: the increasing-curve range of `lambda`.
pub fn lambda_box() -> Interval {
    Interval::new(0.0, 1.0)
}

/// `(0, 0.5)`.
pub fn sigma_box() -> Interval {
    Interval::new(0.0, SIGMA_MAX)
}

/// `lambda^(-sqrt(1+t0^2))`.
pub fn mu_upper(lambda: f64, t0: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(H1Error::Domain(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    Ok(mu_ceiling(lambda, t0))
}

/// Interval for `eta` derived from the path maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaBox {
    /// Interval given directly by the extreme ratios.
    pub raw: Interval,
    /// Interval used for search; equals `raw` unless it had zero width.
    pub interval: Interval,
    pub widened: bool,
}

/// `xi(t0) [max_i (k_i / x_i1 - 1)]^-1 < eta < xi(t0) [min_i (k_i / x_i1 - 1)]^-1`,
/// with `k_i` the maximum of path `i` and `x_i1` its first value.
pub fn eta_box(panel: &PathPanel, xi_t0: f64) -> Result<EtaBox> {
    if !(xi_t0 > 0.0 && xi_t0.is_finite()) {
        return Err(H1Error::Domain(format!("xi(t0) must be positive, got {xi_t0}")));
    }
    let mut lo_ratio = f64::INFINITY;
    let mut hi_ratio = f64::NEG_INFINITY;
    for (i, p) in panel.paths().iter().enumerate() {
        let k = p.max_value();
        let x0 = p.first_value();
        if k <= x0 {
            return Err(H1Error::Panel(format!(
                "path {i} never exceeds its initial value {x0}; not a growth path"
            )));
        }
        let r = k / x0 - 1.0;
        lo_ratio = lo_ratio.min(r);
        hi_ratio = hi_ratio.max(r);
    }
    let raw = Interval::new(xi_t0 / hi_ratio, xi_t0 / lo_ratio);
    if raw.width() > 0.0 {
        Ok(EtaBox { raw, interval: raw, widened: false })
    } else {
        let c = 0.5 * (raw.lo + raw.hi);
        let h = DEGENERATE_WIDENING * c;
        Ok(EtaBox { raw, interval: Interval::new(c - h, c + h), widened: true })
    }
}

/// `xi(t0)` evaluated at a sampled `(lambda, mu)`.
pub fn xi_at(t0: f64, lambda: f64, mu: f64) -> f64 {
    xi_from_logs(t0, lambda.ln(), mu.ln())
}

/// Search region for `(lambda, mu, eta, sigma)`.
///
/// `mu` is bounded per point: its interval is `(0, mu_upper(lambda, t0))` for
/// the point's own `lambda`. `eta` is the union of the per-sample intervals
/// when `t0 != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub t0: f64,
    pub lambda: Interval,
    pub eta: Interval,
    pub sigma: Interval,
    /// `eta` interval before any union over sampled `(lambda, mu)`; equals
    /// `eta` when `t0 = 0`.
    pub eta_unit: EtaBox,
    pub mu_depends_on_lambda: bool,
    pub eta_depends_on_sample: bool,
}

impl ParamBox {
    /// Box with the `eta` interval scaled by `xi(t0) = 1`; callers replace it
    /// with [`ParamBox::set_eta_union`] when `t0 != 0`.
    pub fn for_panel(panel: &PathPanel) -> Result<Self> {
        let t0 = panel.t1();
        let unit = eta_box(panel, 1.0)?;
        Ok(Self {
            t0,
            lambda: lambda_box().interior(BOUNDARY_EPS),
            eta: unit.interval,
            sigma: Interval::new(BOUNDARY_EPS, SIGMA_MAX),
            eta_unit: unit,
            mu_depends_on_lambda: true,
            eta_depends_on_sample: t0 != 0.0,
        })
    }

    /// `eta` interval for a sampled `(lambda, mu)`.
    pub fn eta_for(&self, lambda: f64, mu: f64) -> Interval {
        if self.t0 == 0.0 {
            return self.eta_unit.interval;
        }
        let s = xi_at(self.t0, lambda, mu);
        Interval::new(self.eta_unit.interval.lo * s, self.eta_unit.interval.hi * s)
    }

    /// `mu` interval for a given `lambda`, kept off both endpoints.
    pub fn mu_for(&self, lambda: f64) -> Result<Interval> {
        let hi = mu_upper(lambda, self.t0)?;
        Ok(Interval::new(BOUNDARY_EPS * hi, (1.0 - BOUNDARY_EPS) * hi))
    }

    /// Set the `eta` search interval to the union of per-sample intervals.
    pub fn set_eta_union<I: IntoIterator<Item = Interval>>(&mut self, intervals: I) {
        if let Some(u) = intervals.into_iter().reduce(|a, b| a.union(&b)) {
            self.eta = u;
        }
    }

    /// Whether `(lambda, mu, eta, sigma)` satisfies every bound.
    pub fn contains(&self, lambda: f64, mu: f64, eta: f64, sigma: f64) -> bool {
        self.lambda.contains(lambda)
            && self.sigma.contains(sigma)
            && self.eta.contains(eta)
            && self.mu_for(lambda).map(|m| m.contains(mu)).unwrap_or(false)
    }
}
