//! The H1 diffusion process `dX = h(t) X dt + sigma X dW`, with
//! `h(t) = -xi'(t) / (eta + xi(t))`.
//!
//! Everything here is derived from the closed-form solution
//!
//! ```text
//! X(t) = X0 (eta + xi(t0)) / (eta + xi(t)) * exp(-sigma^2/2 (t - t0) + sigma (W(t) - W(t0)))
//! ```
//!
//! so paths are simulated exactly on any grid and every transition is lognormal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::CurveParams;
use crate::error::{H1Error, Result};

/// Curve parameters plus the diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "H1ParamsSpec", into = "H1ParamsSpec")]
pub struct H1Params {
    curve: CurveParams,
    sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H1ParamsSpec {
    pub eta: f64,
    pub lambda: f64,
    pub mu: f64,
    pub sigma: f64,
    #[serde(default)]
    pub t0: f64,
    pub x0: f64,
}

impl TryFrom<H1ParamsSpec> for H1Params {
    type Error = H1Error;

    fn try_from(s: H1ParamsSpec) -> Result<Self> {
        H1Params::new(CurveParams::new(s.eta, s.lambda, s.mu, s.t0, s.x0)?, s.sigma)
    }
}

impl From<H1Params> for H1ParamsSpec {
    fn from(p: H1Params) -> Self {
        let c = p.curve;
        H1ParamsSpec {
            eta: c.eta(),
            lambda: c.lambda(),
            mu: c.mu(),
            sigma: p.sigma,
            t0: c.t0(),
            x0: c.x0(),
        }
    }
}

impl H1Params {
    pub fn new(curve: CurveParams, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(H1Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { curve, sigma })
    }

    pub fn curve(&self) -> &CurveParams {
        &self.curve
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn t0(&self) -> f64 {
        self.curve.t0()
    }

    /// Drift rate `h(t)`.
    pub fn drift_rate(&self, t: f64) -> f64 {
        let c = &self.curve;
        let slope = c.ln_lambda() + c.ln_mu() / (1.0 + t * t).sqrt();
        let xi = c.xi(t);
        -slope * xi / (c.eta() + xi)
    }

    /// Parameters of `X(t) | X(s) = y`.
    pub fn transition_law(&self, y: f64, s: f64, t: f64) -> Result<Lognormal> {
        if !(t > s) {
            return Err(H1Error::Domain(format!("transition needs t > s, got s = {s}, t = {t}")));
        }
        if s < self.t0() {
            return Err(H1Error::Domain(format!("s = {s} precedes t0 = {}", self.t0())));
        }
        if !(y > 0.0) {
            return Err(H1Error::Domain(format!("conditioning value must be positive, got {y}")));
        }
        let var = self.sigma * self.sigma * (t - s);
        Ok(Lognormal {
            log_mean: y.ln() + self.curve.ln_growth_ratio(s, t) - 0.5 * var,
            log_var: var,
        })
    }

    /// `f(x, t | y, s)`.
    pub fn transition_density(&self, x: f64, t: f64, y: f64, s: f64) -> Result<f64> {
        Ok(self.transition_law(y, s, t)?.pdf(x))
    }

    /// `G_n(t | z, tau)`, the n-th moment of `X(t)` given `X(tau) = z`.
    pub fn moment(&self, n: u32, z: f64, tau: f64, t: f64) -> Result<f64> {
        if t < tau {
            return Err(H1Error::Domain(format!("moment needs t >= tau, got tau = {tau}, t = {t}")));
        }
        if tau < self.t0() {
            return Err(H1Error::Domain(format!("tau = {tau} precedes t0 = {}", self.t0())));
        }
        if n == 0 {
            return Ok(1.0);
        }
        let n = f64::from(n);
        let log = n * (z.ln() + self.curve.ln_growth_ratio(tau, t))
            + 0.5 * n * (n - 1.0) * self.sigma * self.sigma * (t - tau);
        Ok(log.exp())
    }

    /// `E[X(t)]` under the given initial law.
    pub fn mean_fn(&self, init: &InitialLaw, t: f64) -> Result<f64> {
        self.cond_mean_fn(init.mean(), t)
    }

    /// `E[X(t) | X(t0) = x0]`.
    pub fn cond_mean_fn(&self, x0: f64, t: f64) -> Result<f64> {
        if t < self.t0() {
            return Err(H1Error::Domain(format!("t = {t} precedes t0 = {}", self.t0())));
        }
        Ok(x0 * self.curve.growth_ratio(self.t0(), t))
    }

    /// Parameters of the lognormal law of `(X(t_1), ..., X(t_n))`.
    pub fn finite_dim_law(&self, init: &InitialLaw, times: &[f64]) -> Result<FiniteDimLaw> {
        check_increasing(times)?;
        let t0 = self.t0();
        if times.first().is_some_and(|&t| t < t0) {
            return Err(H1Error::Domain(format!("times must not precede t0 = {t0}")));
        }
        let (mu0, var0) = init.log_params();
        let s2 = self.sigma * self.sigma;
        let delta = times
            .iter()
            .map(|&t| mu0 + self.curve.ln_growth_ratio(t0, t) - 0.5 * s2 * (t - t0))
            .collect();
        let cov = times
            .iter()
            .map(|&ti| times.iter().map(|&tj| var0 + s2 * (ti.min(tj) - t0)).collect())
            .collect();
        Ok(FiniteDimLaw { delta, cov })
    }

    /// Exact simulation of `n_paths` independent paths on `times`.
    ///
    /// Path `i` draws from its own ChaCha8 stream `(seed, i)`, so the output
    /// does not depend on how the work is scheduled.
    pub fn simulate(&self, init: &InitialLaw, times: &[f64], n_paths: usize, seed: u64) -> Result<PathPanel> {
        if n_paths == 0 {
            return Err(H1Error::Domain("at least one path is required".into()));
        }
        if times.len() < 2 {
            return Err(H1Error::Domain("a path needs at least two time points".into()));
        }
        check_increasing(times)?;
        if times[0] != self.t0() {
            return Err(H1Error::Domain(format!(
                "grid starts at {}, expected t0 = {}",
                times[0],
                self.t0()
            )));
        }
        init.validate()?;

        let t0 = self.t0();
        let sigma = self.sigma;
        let log_trend: Vec<f64> = times
            .iter()
            .map(|&t| self.curve.ln_growth_ratio(t0, t) - 0.5 * sigma * sigma * (t - t0))
            .collect();

        let paths = (0..n_paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let x0 = init.sample(&mut rng);
                let ln_x0 = x0.ln();
                let mut w = 0.0;
                let mut values = Vec::with_capacity(times.len());
                values.push(x0);
                for j in 1..times.len() {
                    let z: f64 = rng.sample(StandardNormal);
                    w += z * (times[j] - times[j - 1]).sqrt();
                    values.push((ln_x0 + log_trend[j] + sigma * w).exp());
                }
                SamplePath {
                    times: times.to_vec(),
                    values,
                }
            })
            .collect();
        PathPanel::new(paths)
    }
}

fn check_increasing(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(H1Error::Domain("non-finite time".into()));
    }
    if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(H1Error::Domain(format!(
            "times must be strictly increasing (t[{}] = {} >= t[{}] = {})",
            k,
            times[k],
            k + 1,
            times[k + 1]
        )));
    }
    Ok(())
}

/// A univariate lognormal law `Lambda_1[log_mean; log_var]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lognormal {
    pub log_mean: f64,
    pub log_var: f64,
}

impl Lognormal {
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        let lx = x.ln();
        let d = lx - self.log_mean;
        -lx - 0.5 * (2.0 * std::f64::consts::PI * self.log_var).ln() - d * d / (2.0 * self.log_var)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        self.ln_pdf(x).exp()
    }

    pub fn mean(&self) -> f64 {
        (self.log_mean + 0.5 * self.log_var).exp()
    }

    pub fn mode(&self) -> f64 {
        (self.log_mean - self.log_var).exp()
    }
}

/// Distribution of `X(t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialLaw {
    Degenerate { x0: f64 },
    Lognormal { mu1: f64, sigma1_sq: f64 },
}

impl InitialLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialLaw::Degenerate { x0 } if !(x0 > 0.0 && x0.is_finite()) => Err(
                H1Error::InvalidParams(format!("degenerate initial value must be positive, got {x0}")),
            ),
            InitialLaw::Lognormal { mu1, sigma1_sq } if !(sigma1_sq >= 0.0 && mu1.is_finite()) => {
                Err(H1Error::InvalidParams(format!(
                    "lognormal initial law needs finite mu1 and sigma1_sq >= 0, got ({mu1}, {sigma1_sq})"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `(mu0, sigma0^2)` of `ln X(t0)`; a degenerate law has zero variance.
    pub fn log_params(&self) -> (f64, f64) {
        match *self {
            InitialLaw::Degenerate { x0 } => (x0.ln(), 0.0),
            InitialLaw::Lognormal { mu1, sigma1_sq } => (mu1, sigma1_sq),
        }
    }

    /// `E[X(t0)]`.
    pub fn mean(&self) -> f64 {
        match *self {
            InitialLaw::Degenerate { x0 } => x0,
            InitialLaw::Lognormal { mu1, sigma1_sq } => (mu1 + 0.5 * sigma1_sq).exp(),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            InitialLaw::Degenerate { x0 } => x0,
            InitialLaw::Lognormal { mu1, sigma1_sq } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu1 + sigma1_sq.sqrt() * z).exp()
            }
        }
    }
}

/// `Lambda_n[delta, Sigma]` for a fixed set of observation times.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDimLaw {
    pub delta: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// Equally spaced observation times `start, start + step, ..., end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl std::str::FromStr for TimeGrid {
    type Err = H1Error;

    /// Parses `start:end:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(H1Error::Config(format!("time grid must be start:end:step, got {s:?}")));
        }
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| H1Error::Config(format!("bad number {x:?} in time grid {s:?}")))
        };
        let g = TimeGrid { start: num(parts[0])?, end: num(parts[1])?, step: num(parts[2])? };
        g.points()?;
        Ok(g)
    }
}

impl TimeGrid {
    /// Grid points; `end` must be reachable in a whole number of steps.
    pub fn points(&self) -> Result<Vec<f64>> {
        let TimeGrid { start, end, step } = *self;
        if !(start.is_finite() && end.is_finite() && step.is_finite()) || step <= 0.0 || end <= start {
            return Err(H1Error::Config(format!(
                "time grid needs finite start < end and step > 0, got {start}:{end}:{step}"
            )));
        }
        let span = (end - start) / step;
        let n = span.round();
        if (span - n).abs() > 1e-9 * n.max(1.0) {
            return Err(H1Error::Config(format!(
                "step {step} does not divide the interval [{start}, {end}]"
            )));
        }
        let n = n as usize;
        Ok((0..=n)
            .map(|j| if j == n { end } else { start + j as f64 * step })
            .collect())
    }
}

/// One observed trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `d` discretely observed sample paths sharing their first observation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SamplePath>", into = "Vec<SamplePath>")]
pub struct PathPanel {
    paths: Vec<SamplePath>,
}

impl TryFrom<Vec<SamplePath>> for PathPanel {
    type Error = H1Error;

    fn try_from(paths: Vec<SamplePath>) -> Result<Self> {
        PathPanel::new(paths)
    }
}

impl From<PathPanel> for Vec<SamplePath> {
    fn from(p: PathPanel) -> Self {
        p.paths
    }
}

impl PathPanel {
    pub fn new(paths: Vec<SamplePath>) -> Result<Self> {
        if paths.is_empty() {
            return Err(H1Error::Panel("a panel needs at least one path".into()));
        }
        let t1 = paths[0].times.first().copied();
        for (i, p) in paths.iter().enumerate() {
            if p.times.len() != p.values.len() {
                return Err(H1Error::Panel(format!(
                    "path {i}: {} times but {} values",
                    p.times.len(),
                    p.values.len()
                )));
            }
            if p.len() < 2 {
                return Err(H1Error::Panel(format!("path {i} has fewer than two observations")));
            }
            check_increasing(&p.times).map_err(|e| H1Error::Panel(format!("path {i}: {e}")))?;
            if let Some(j) = p.values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(H1Error::Panel(format!(
                    "path {i}, observation {j}: value {} is not strictly positive",
                    p.values[j]
                )));
            }
            if p.times.first().copied() != t1 {
                return Err(H1Error::Panel(format!(
                    "path {i} starts at {}, other paths at {}",
                    p.times[0],
                    t1.unwrap_or(f64::NAN)
                )));
            }
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[SamplePath] {
        &self.paths
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    /// `N`, total number of observations.
    pub fn n_obs(&self) -> usize {
        self.paths.iter().map(SamplePath::len).sum()
    }

    /// Common first observation time.
    pub fn t1(&self) -> f64 {
        self.paths[0].times[0]
    }

    /// Shared grid, if all paths are observed at the same times.
    pub fn shared_grid(&self) -> Option<&[f64]> {
        let first = &self.paths[0].times;
        self.paths
            .iter()
            .all(|p| &p.times == first)
            .then_some(first.as_slice())
    }

    /// Mean of the paths' first observations.
    pub fn mean_initial_value(&self) -> f64 {
        crate::numeric::csum(self.paths.iter().map(SamplePath::first_value)) / self.n_paths() as f64
    }
}
