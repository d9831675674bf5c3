//! Log-likelihood of a panel of discretely observed H1 paths.
//!
//! Transitions that share the same pair of observation times are pooled into
//! groups holding their count, mean log-increment and centred sum of squares.
//! Every quantity below is a sum over groups, so paths observed on a common
//! grid cost one term per grid step instead of one per observation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::xi_from_logs;
use crate::error::{H1Error, Result};
use crate::numeric::{csum, CompensatedSum};
use crate::process::PathPanel;

/// Free parameters of the reduced objective, ordered `(lambda, mu, eta, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector {
    pub lambda: f64,
    pub mu: f64,
    pub eta: f64,
    pub sigma_sq: f64,
}

impl ThetaVector {
    pub fn new(lambda: f64, mu: f64, eta: f64, sigma_sq: f64) -> Self {
        Self { lambda, mu, eta, sigma_sq }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.lambda, self.mu, self.eta, self.sigma_sq]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }

    fn check_interior(&self) -> Result<()> {
        let ok = self.lambda > 0.0
            && self.lambda < 1.0
            && self.mu > 0.0
            && self.eta > 0.0
            && self.sigma_sq > 0.0
            && self.as_array().iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(H1Error::Domain(format!("parameter vector {:?} outside the admissible region", self)))
        }
    }
}

#[derive(Debug, Clone)]
struct TransitionGroup {
    from: usize,
    to: usize,
    dt: f64,
    count: f64,
    mean_l: f64,
    centred_ss: f64,
}

/// Per-panel data summaries shared read-only by every objective evaluation.
#[derive(Debug, Clone)]
pub struct SufficientStats {
    times: Vec<f64>,
    groups: Vec<TransitionGroup>,
    n_obs: usize,
    n_paths: usize,
    total_span: f64,
    first_logs: Vec<f64>,
    sum_ln_rest: f64,
    sum_ln_dt: f64,
}

/// Quantities of the stationarity system in `(eta, lambda, mu, sigma^2)`.
///
/// For `J` in `{W, V, Z}`:
/// `Lambda_J = sum (l - T) J / (dt S)` and `Psi_J = sum J / S`, where
/// `W`, `V`, `Z` are the derivatives of `T` with respect to `eta`, `lambda`,
/// `mu`, each multiplied by `S = (eta + xi(t_prev)) (eta + xi(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSystem {
    pub lambda_w: f64,
    pub lambda_v: f64,
    pub lambda_z: f64,
    pub psi_w: f64,
    pub psi_v: f64,
    pub psi_z: f64,
    /// `Gamma = sum (l - T)^2 / dt`.
    pub gamma: f64,
    /// Sum of the path spans `t_{i n_i} - t_{i1}`.
    pub total_span: f64,
    /// `N - d`, the number of transitions.
    pub n_transitions: f64,
}

impl ScoreSystem {
    /// Left-hand sides of the four likelihood equations, in the order
    /// `(eta, lambda, mu, sigma^2)`. These equal `sigma^2` times the partial
    /// derivatives of `f_o` for the first three, and `-8 sigma^4` times the
    /// partial derivative for the last.
    pub fn equations(&self, sigma_sq: f64) -> [f64; 4] {
        let h = 0.5 * sigma_sq;
        [
            self.lambda_w + h * self.psi_w,
            self.lambda_v + h * self.psi_v,
            self.lambda_z + h * self.psi_z,
            sigma_sq * sigma_sq * self.total_span + 4.0 * sigma_sq * self.n_transitions - 4.0 * self.gamma,
        ]
    }
}

/// Profiled diffusion variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaProfile {
    pub sigma_sq: f64,
    /// Set when `Gamma = 0`, where the maximizer sits on the boundary `sigma^2 = 0`.
    pub at_boundary: bool,
}

/// Closed-form MLE `(mu1, sigma1^2)` of the lognormal law of the first observations.
pub fn initial_mle(panel: &PathPanel) -> (f64, f64) {
    let logs: Vec<f64> = panel.paths().iter().map(|p| p.first_value().ln()).collect();
    let d = logs.len() as f64;
    let mu1 = csum(logs.iter().copied()) / d;
    let var = csum(logs.iter().map(|l| (l - mu1) * (l - mu1))) / d;
    (mu1, var)
}

impl SufficientStats {
    pub fn new(panel: &PathPanel) -> Self {
        let mut all: Vec<f64> = panel.paths().iter().flat_map(|p| p.times.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        let index = |t: f64| all.binary_search_by(|x| x.total_cmp(&t)).expect("time present");

        let mut buckets: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        let mut rest = CompensatedSum::new();
        let mut ln_dt = CompensatedSum::new();
        let mut span = CompensatedSum::new();
        for path in panel.paths() {
            span.add(path.times[path.len() - 1] - path.times[0]);
            for j in 1..path.len() {
                let (ta, tb) = (path.times[j - 1], path.times[j]);
                let l = (path.values[j] / path.values[j - 1]).ln();
                buckets.entry((index(ta), index(tb))).or_default().push(l);
                rest.add(path.values[j].ln());
                ln_dt.add((tb - ta).ln());
            }
        }

        let groups = buckets
            .into_iter()
            .map(|((from, to), ls)| {
                let count = ls.len() as f64;
                let mean_l = csum(ls.iter().copied()) / count;
                let centred_ss = csum(ls.iter().map(|l| (l - mean_l) * (l - mean_l)));
                TransitionGroup {
                    from,
                    to,
                    dt: all[to] - all[from],
                    count,
                    mean_l,
                    centred_ss,
                }
            })
            .collect();

        Self {
            times: all,
            groups,
            n_obs: panel.n_obs(),
            n_paths: panel.n_paths(),
            total_span: span.value(),
            first_logs: panel.paths().iter().map(|p| p.first_value().ln()).collect(),
            sum_ln_rest: rest.value(),
            sum_ln_dt: ln_dt.value(),
        }
    }

    /// `N`.
    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    /// `d`.
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    /// `N - d`.
    pub fn n_transitions(&self) -> usize {
        self.n_obs - self.n_paths
    }

    pub fn total_span(&self) -> f64 {
        self.total_span
    }

    /// `ln(eta + xi(t))` at every distinct observation time.
    fn log_denominators(&self, lambda: f64, mu: f64, eta: f64) -> (Vec<f64>, Vec<f64>) {
        let (ll, lm) = (lambda.ln(), mu.ln());
        let xi: Vec<f64> = self.times.iter().map(|&t| xi_from_logs(t, ll, lm)).collect();
        let ln_den = xi.iter().map(|x| (eta + x).ln()).collect();
        (xi, ln_den)
    }

    fn t_terms<'a>(&'a self, ln_den: &'a [f64]) -> impl Iterator<Item = (&'a TransitionGroup, f64)> + 'a {
        self.groups
            .iter()
            .map(move |g| (g, ln_den[g.from] - ln_den[g.to]))
    }

    /// `sum (l - T + sigma^2 dt / 2)^2 / dt`.
    fn weighted_residuals(&self, theta: &ThetaVector) -> Result<f64> {
        let (_, ln_den) = self.log_denominators(theta.lambda, theta.mu, theta.eta);
        let half = 0.5 * theta.sigma_sq;
        let mut acc = CompensatedSum::new();
        for (g, t) in self.t_terms(&ln_den) {
            let m = g.mean_l - t + half * g.dt;
            let term = (g.centred_ss + g.count * m * m) / g.dt;
            if !term.is_finite() {
                return Err(self.nonfinite(g));
            }
            acc.add(term);
        }
        Ok(acc.value())
    }

    fn nonfinite(&self, g: &TransitionGroup) -> H1Error {
        H1Error::Numerical(format!(
            "non-finite likelihood term for the transition {} -> {}",
            self.times[g.from], self.times[g.to]
        ))
    }

    /// Reduced objective
    /// `f_o = -(N - d)/2 ln sigma^2 - 1/(2 sigma^2) sum (l - T + sigma^2 dt/2)^2 / dt`.
    pub fn objective_fo(&self, theta: &ThetaVector) -> Result<f64> {
        theta.check_interior()?;
        let q = self.weighted_residuals(theta)?;
        let v = -0.5 * self.n_transitions() as f64 * theta.sigma_sq.ln() - q / (2.0 * theta.sigma_sq);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(H1Error::Numerical(format!("objective is not finite at {theta:?}")))
        }
    }

    /// Full log-likelihood with initial law `(mu1, sigma1^2)`.
    ///
    /// With `sigma1^2 = 0` the first observations carry no information and the
    /// likelihood is conditional on them.
    pub fn log_likelihood(&self, theta: &ThetaVector, mu1: f64, sigma1_sq: f64) -> Result<f64> {
        theta.check_interior()?;
        if !(sigma1_sq >= 0.0) {
            return Err(H1Error::Domain(format!("sigma1^2 must be non-negative, got {sigma1_sq}")));
        }
        let n_tr = self.n_transitions() as f64;
        let q = self.weighted_residuals(theta)?;
        let transitions = -0.5 * n_tr * (2.0 * PI).ln()
            - 0.5 * n_tr * theta.sigma_sq.ln()
            - self.sum_ln_rest
            - 0.5 * self.sum_ln_dt
            - q / (2.0 * theta.sigma_sq);
        let initial = if sigma1_sq > 0.0 {
            let d = self.n_paths as f64;
            -0.5 * d * (2.0 * PI).ln() - 0.5 * d * sigma1_sq.ln() - csum(self.first_logs.iter().copied())
                - csum(self.first_logs.iter().map(|l| (l - mu1) * (l - mu1))) / (2.0 * sigma1_sq)
        } else {
            0.0
        };
        let v = initial + transitions;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(H1Error::Numerical(format!("log-likelihood is not finite at {theta:?}")))
        }
    }

    /// `Gamma = sum (l - T)^2 / dt` for the given curve parameters.
    pub fn gamma(&self, lambda: f64, mu: f64, eta: f64) -> Result<f64> {
        let (_, ln_den) = self.log_denominators(lambda, mu, eta);
        let mut acc = CompensatedSum::new();
        for (g, t) in self.t_terms(&ln_den) {
            let m = g.mean_l - t;
            let term = (g.centred_ss + g.count * m * m) / g.dt;
            if !term.is_finite() {
                return Err(self.nonfinite(g));
            }
            acc.add(term);
        }
        Ok(acc.value())
    }

    /// Maximizer of `f_o` in `sigma^2` for fixed `(lambda, mu, eta)`: the
    /// positive root of `D s^2 + 4 (N - d) s - 4 Gamma = 0`, `D` the summed spans.
    pub fn profile_sigma_sq(&self, lambda: f64, mu: f64, eta: f64) -> Result<SigmaProfile> {
        ThetaVector::new(lambda, mu, eta, 1.0).check_interior()?;
        let gamma = self.gamma(lambda, mu, eta)?;
        if gamma == 0.0 {
            return Ok(SigmaProfile { sigma_sq: 0.0, at_boundary: true });
        }
        let m = self.n_transitions() as f64;
        // rationalized root, free of cancellation when D * Gamma << (N - d)^2
        let s = 2.0 * gamma / (m + (m * m + self.total_span * gamma).sqrt());
        Ok(SigmaProfile { sigma_sq: s, at_boundary: false })
    }

    pub fn score_system(&self, theta: &ThetaVector) -> Result<ScoreSystem> {
        theta.check_interior()?;
        let ThetaVector { lambda, mu, eta, .. } = *theta;
        let (xi, ln_den) = self.log_denominators(lambda, mu, eta);
        let mut acc = [CompensatedSum::new(); 7];
        for (g, t) in self.t_terms(&ln_den) {
            let (ta, tb) = (self.times[g.from], self.times[g.to]);
            let (xa, xb) = (xi[g.from], xi[g.to]);
            let (da, db) = (eta + xa, eta + xb);
            let s = da * db;
            let w = xb - xa;
            let v = (ta * xa * db - tb * xb * da) / lambda;
            let z = (ta.asinh() * xa * db - tb.asinh() * xb * da) / mu;
            let r = g.count * (g.mean_l - t) / (g.dt * s);
            let terms = [
                r * w,
                r * v,
                r * z,
                g.count * w / s,
                g.count * v / s,
                g.count * z / s,
                (g.centred_ss + g.count * (g.mean_l - t).powi(2)) / g.dt,
            ];
            if terms.iter().any(|x| !x.is_finite()) {
                return Err(self.nonfinite(g));
            }
            for (a, x) in acc.iter_mut().zip(terms) {
                a.add(x);
            }
        }
        Ok(ScoreSystem {
            lambda_w: acc[0].value(),
            lambda_v: acc[1].value(),
            lambda_z: acc[2].value(),
            psi_w: acc[3].value(),
            psi_v: acc[4].value(),
            psi_z: acc[5].value(),
            gamma: acc[6].value(),
            total_span: self.total_span,
            n_transitions: self.n_transitions() as f64,
        })
    }

    /// Gradient of `f_o` in `(lambda, mu, eta, sigma^2)`.
    ///
    /// The first three components are the `V`, `Z`, `W` equations of
    /// [`ScoreSystem::equations`] divided by `sigma^2`; the last is the
    /// quadratic equation divided by `-8 sigma^4`.
    pub fn score(&self, theta: &ThetaVector) -> Result<[f64; 4]> {
        let sys = self.score_system(theta)?;
        let s = theta.sigma_sq;
        let [eq_w, eq_v, eq_z, eq_s] = sys.equations(s);
        Ok([eq_v / s, eq_z / s, eq_w / s, -eq_s / (8.0 * s * s)])
    }
}
