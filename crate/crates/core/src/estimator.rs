//! Maximum likelihood fitting and replication studies.
//!
//! A fit estimates the initial law in closed form, bounds the parameter space
//! from the panel, seeds the swarm stagewise (`lambda`, then `mu` below its
//! `lambda`-dependent ceiling, then `eta`, then `sigma`) and maximizes `f_o`
//! with the firefly optimizer.
//!
//! The swarm searches `(lambda, nu, eta, sigma)` with `mu = nu * mu_upper(lambda, t0)`
//! and `nu` in `(0, 1)`, so every candidate satisfies the increasing-curve
//! condition and the search region stays a fixed box.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{mu_upper, Interval, ParamBox, BOUNDARY_EPS};
use crate::curve::CurveParams;
use crate::error::{H1Error, Result};
use crate::firefly::{optimize_from, FireflyConfig, GenerationRecord, SearchBox};
use crate::likelihood::{initial_mle, SufficientStats, ThetaVector};
use crate::numeric::{csum, derive_seed};
use crate::process::{H1Params, InitialLaw, PathPanel, TimeGrid};

const SEEDING_STREAM: u64 = 2;
const PANEL_KEY: u64 = 0x5041_4e45;
const FIT_KEY: u64 = 0x4649_5400;

/// Outcome of one maximum likelihood fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub lambda: f64,
    pub mu: f64,
    pub eta: f64,
    pub sigma: f64,
    pub sigma_sq: f64,
    pub mu1_hat: f64,
    pub sigma1_sq_hat: f64,
    /// Mean of the first observations, used as the degenerate initial value
    /// of the fitted mean function.
    pub x0_hat: f64,
    pub t0: f64,
    pub fo_value: f64,
    pub param_box: ParamBox,
    pub config: FireflyConfig,
    pub evaluations: usize,
    /// Degenerate cases met during the fit.
    pub notes: Vec<String>,
    /// Per-generation swarm states in `(lambda, mu, eta, sigma)` coordinates.
    #[serde(skip)]
    pub trace: Vec<GenerationRecord>,
    #[serde(skip)]
    pub duration: Duration,
}

impl FitResult {
    pub fn theta(&self) -> ThetaVector {
        ThetaVector::new(self.lambda, self.mu, self.eta, self.sigma_sq)
    }

    /// Fitted process, started from the mean initial value.
    pub fn params(&self) -> Result<H1Params> {
        H1Params::new(
            CurveParams::new(self.eta, self.lambda, self.mu, self.t0, self.x0_hat)?,
            self.sigma,
        )
    }

    /// Estimated mean function on the given times.
    pub fn mean_curve(&self, times: &[f64]) -> Result<Vec<f64>> {
        let p = self.params()?;
        let init = InitialLaw::Degenerate { x0: self.x0_hat };
        times.iter().map(|&t| p.mean_fn(&init, t)).collect()
    }
}

fn to_model_coords(x: &[f64], t0: f64) -> [f64; 4] {
    let mu = x[1] * mu_upper(x[0], t0).unwrap_or(f64::NAN);
    [x[0], mu, x[2], x[3]]
}

/// Maximum likelihood fit of the H1 process to `panel`.
pub fn fit(panel: &PathPanel, cfg: &FireflyConfig) -> Result<FitResult> {
    cfg.validate()?;
    let start = Instant::now();
    let stats = SufficientStats::new(panel);
    let (mu1_hat, sigma1_sq_hat) = initial_mle(panel);
    let mut pbox = ParamBox::for_panel(panel)?;
    let t0 = pbox.t0;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SEEDING_STREAM);
    let mut seeds = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let lambda = pbox.lambda.lerp(rng.random());
        let mu_iv = pbox.mu_for(lambda)?;
        let mu = mu_iv.lerp(rng.random());
        let eta_iv = pbox.eta_for(lambda, mu);
        seeds.push((lambda, mu / mu_upper(lambda, t0)?, eta_iv));
    }
    if pbox.eta_depends_on_sample {
        pbox.set_eta_union(seeds.iter().map(|s| s.2));
    }
    let initial: Vec<Vec<f64>> = seeds
        .iter()
        .map(|&(lambda, nu, eta_iv)| {
            let eta = eta_iv.lerp(rng.random());
            let sigma = pbox.sigma.lerp(rng.random());
            vec![lambda, nu.clamp(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS), pbox.eta.clamp(eta), sigma]
        })
        .collect();

    let search = SearchBox::new(vec![
        pbox.lambda,
        Interval::new(BOUNDARY_EPS, 1.0 - BOUNDARY_EPS),
        pbox.eta,
        pbox.sigma,
    ])?;
    let objective = |x: &[f64]| {
        let [lambda, mu, eta, sigma] = to_model_coords(x, t0);
        stats
            .objective_fo(&ThetaVector::new(lambda, mu, eta, sigma * sigma))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let opt = optimize_from(objective, &search, cfg, initial)?;
    if !opt.best_value.is_finite() {
        return Err(H1Error::Numerical("objective was not finite anywhere in the search box".into()));
    }

    let [lambda, mu, eta, sigma] = to_model_coords(&opt.best_position, t0);
    let mut notes = Vec::new();
    if sigma1_sq_hat == 0.0 {
        notes.push("initial variance estimate is zero; initial law treated as degenerate".to_string());
    }
    if pbox.eta_unit.widened {
        notes.push(format!(
            "eta interval had zero width and was widened by {}%",
            crate::bounds::DEGENERATE_WIDENING * 100.0
        ));
    }
    let trace = opt
        .trace
        .into_iter()
        .map(|mut rec| {
            for p in rec.positions.iter_mut() {
                *p = to_model_coords(p, t0).to_vec();
            }
            rec.best_so_far_position = to_model_coords(&rec.best_so_far_position, t0).to_vec();
            rec
        })
        .collect();

    Ok(FitResult {
        lambda,
        mu,
        eta,
        sigma,
        sigma_sq: sigma * sigma,
        mu1_hat,
        sigma1_sq_hat,
        x0_hat: panel.mean_initial_value(),
        t0,
        fo_value: opt.best_value,
        param_box: pbox,
        config: *cfg,
        evaluations: opt.evaluations,
        notes,
        trace,
        duration: start.elapsed(),
    })
}

/// Cross-path sample mean at every distinct observation time.
pub fn cross_path_mean(panel: &PathPanel) -> Vec<(f64, f64)> {
    let mut by_time: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for p in panel.paths() {
        for (&t, &x) in p.times.iter().zip(&p.values) {
            // order-preserving key for finite floats
            let bits = t.to_bits();
            let key = if t >= 0.0 { bits ^ (1 << 63) } else { !bits };
            by_time.entry(key).or_insert_with(|| (t, Vec::new())).1.push(x);
        }
    }
    by_time
        .into_values()
        .map(|(t, xs)| (t, csum(xs.iter().copied()) / xs.len() as f64))
        .collect()
}

/// Mean of `|observed - model| / observed`.
pub fn mean_abs_relative_error(observed: &[f64], model: &[f64]) -> Result<f64> {
    if observed.len() != model.len() || observed.is_empty() {
        return Err(H1Error::Domain("observed and model series differ in length".into()));
    }
    if let Some(k) = observed.iter().position(|&x| x == 0.0 || !x.is_finite()) {
        return Err(H1Error::Domain(format!("observed mean at index {k} is zero or not finite")));
    }
    let total = csum(observed.iter().zip(model).map(|(o, m)| ((o - m) / o).abs()));
    Ok(total / observed.len() as f64)
}

/// Mean absolute relative error between the cross-path sample mean and the
/// fitted mean function, over every observation time.
pub fn fitted_mean_error(panel: &PathPanel, fit: &FitResult) -> Result<f64> {
    let (times, observed): (Vec<f64>, Vec<f64>) = cross_path_mean(panel).into_iter().unzip();
    let model = fit.mean_curve(&times)?;
    mean_abs_relative_error(&observed, &model)
}

/// Lists of firefly settings whose cartesian product forms the study grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaGrid {
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub n: Vec<usize>,
    pub generations: usize,
    #[serde(default = "one")]
    pub beta0: f64,
}

fn one() -> f64 {
    1.0
}

/// One point of an [`FaGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub n: usize,
}

impl Cell {
    fn key(&self) -> [u64; 4] {
        [self.alpha.to_bits(), self.gamma.to_bits(), self.delta.to_bits(), self.n as u64]
    }

    pub fn config(&self, grid: &FaGrid, seed: u64) -> FireflyConfig {
        FireflyConfig {
            n: self.n,
            generations: grid.generations,
            alpha: self.alpha,
            beta0: grid.beta0,
            gamma: self.gamma,
            delta: self.delta,
            seed,
        }
    }

    fn value(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Alpha => self.alpha,
            Axis::Gamma => self.gamma,
            Axis::Delta => self.delta,
            Axis::N => self.n as f64,
        }
    }
}

impl FaGrid {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() || self.gamma.is_empty() || self.delta.is_empty() || self.n.is_empty() {
            return Err(H1Error::Config("every firefly grid axis needs at least one value".into()));
        }
        for c in self.cells() {
            c.config(self, 0).validate()?;
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &alpha in &self.alpha {
            for &gamma in &self.gamma {
                for &delta in &self.delta {
                    for &n in &self.n {
                        out.push(Cell { alpha, gamma, delta, n });
                    }
                }
            }
        }
        out
    }

    fn axis_values(&self, axis: Axis) -> Vec<f64> {
        match axis {
            Axis::Alpha => self.alpha.clone(),
            Axis::Gamma => self.gamma.clone(),
            Axis::Delta => self.delta.clone(),
            Axis::N => self.n.iter().map(|&n| n as f64).collect(),
        }
    }

    /// Seed of the fit for `cell` on replication `rep`; depends only on the
    /// cell's own settings, so any cell can be rerun alone.
    pub fn fit_seed(base: u64, cell: &Cell, rep: usize) -> u64 {
        let k = cell.key();
        derive_seed(base, &[FIT_KEY, k[0], k[1], k[2], k[3], rep as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Alpha,
    Gamma,
    Delta,
    N,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Alpha => "alpha",
            Axis::Gamma => "gamma",
            Axis::Delta => "delta",
            Axis::N => "n",
        }
    }
}

/// Axis pairs reported as error tables, in output order.
pub const TABLE_PAIRS: [(Axis, Axis); 6] = [
    (Axis::Alpha, Axis::Gamma),
    (Axis::Alpha, Axis::Delta),
    (Axis::Gamma, Axis::Delta),
    (Axis::Alpha, Axis::N),
    (Axis::Gamma, Axis::N),
    (Axis::Delta, Axis::N),
];

/// Simulation-and-refit protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    /// True parameters; `x0` is the degenerate initial value unless `initial` is given.
    pub params: H1Params,
    #[serde(default)]
    pub initial: Option<InitialLaw>,
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub replications: usize,
    pub fa: FaGrid,
    #[serde(default)]
    pub seed: u64,
}

impl StudySpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(H1Error::Config("at least one replication is required".into()));
        }
        if self.n_paths < 1 {
            return Err(H1Error::Config("at least one path is required".into()));
        }
        self.fa.validate()?;
        self.grid.points()?;
        Ok(())
    }

    pub fn initial_law(&self) -> InitialLaw {
        self.initial
            .unwrap_or(InitialLaw::Degenerate { x0: self.params.curve().x0() })
    }

    pub fn true_theta(&self) -> ThetaVector {
        let c = self.params.curve();
        let s = self.params.sigma();
        ThetaVector::new(c.lambda(), c.mu(), c.eta(), s * s)
    }

    /// Panel of replication `rep`. It is shared by every grid cell.
    pub fn panel(&self, rep: usize) -> Result<PathPanel> {
        let times = self.grid.points()?;
        let seed = derive_seed(self.seed, &[PANEL_KEY, rep as u64]);
        self.params.simulate(&self.initial_law(), &times, self.n_paths, seed)
    }
}

/// Absolute relative error `|estimate - truth| / |truth|`.
pub fn abs_rel_error(estimate: f64, truth: f64) -> f64 {
    ((estimate - truth) / truth).abs()
}

/// One fit inside a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub cell: Cell,
    pub replication: usize,
    /// `(lambda, mu, eta, sigma)`.
    pub estimate: [f64; 4],
    pub fo_hat: f64,
    pub fo_true: f64,
    pub fo_error: f64,
    /// Absolute relative errors of `(lambda, mu, eta, sigma)`.
    pub param_errors: [f64; 4],
    pub truth_in_eta_box: bool,
}

/// Replication averages for one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: Cell,
    pub replications: usize,
    pub mean_estimate: [f64; 4],
    pub mean_param_errors: [f64; 4],
    pub mean_fo_hat: f64,
    pub mean_fo_true: f64,
    pub mean_fo_error: f64,
}

/// Mean `f_o` error for every pair of values of two axes, averaged over the
/// remaining axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    pub rows: Axis,
    pub cols: Axis,
    pub row_values: Vec<f64>,
    pub col_values: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub truth: [f64; 4],
    pub cells: Vec<CellSummary>,
    pub tables: Vec<PairTable>,
    pub records: Vec<ReplicationRecord>,
}

impl StudyReport {
    pub fn table(&self, rows: Axis, cols: Axis) -> Option<&PairTable> {
        self.tables.iter().find(|t| t.rows == rows && t.cols == cols)
    }
}

fn record_for(
    spec: &StudySpec,
    cell: Cell,
    rep: usize,
    panel: &PathPanel,
    fo_true: f64,
) -> Result<ReplicationRecord> {
    let cfg = cell.config(&spec.fa, FaGrid::fit_seed(spec.seed, &cell, rep));
    let f = fit(panel, &cfg)?;
    let truth = spec.true_theta();
    let estimate = [f.lambda, f.mu, f.eta, f.sigma];
    let true_vals = [truth.lambda, truth.mu, truth.eta, truth.sigma()];
    let mut param_errors = [0.0; 4];
    for k in 0..4 {
        param_errors[k] = abs_rel_error(estimate[k], true_vals[k]);
    }
    Ok(ReplicationRecord {
        cell,
        replication: rep,
        estimate,
        fo_hat: f.fo_value,
        fo_true,
        fo_error: abs_rel_error(f.fo_value, fo_true),
        param_errors,
        truth_in_eta_box: f.param_box.eta.contains(truth.eta),
    })
}

/// Run every `(cell, replication)` fit and aggregate the errors.
pub fn replicate_study(spec: &StudySpec) -> Result<StudyReport> {
    spec.validate()?;
    let truth = spec.true_theta();
    let panels: Vec<(PathPanel, f64)> = (0..spec.replications)
        .into_par_iter()
        .map(|r| {
            let panel = spec.panel(r)?;
            let fo_true = SufficientStats::new(&panel).objective_fo(&truth)?;
            Ok((panel, fo_true))
        })
        .collect::<Result<_>>()?;

    let cells = spec.fa.cells();
    let jobs: Vec<(Cell, usize)> = cells
        .iter()
        .flat_map(|&c| (0..spec.replications).map(move |r| (c, r)))
        .collect();
    let records = jobs
        .into_par_iter()
        .map(|(c, r)| record_for(spec, c, r, &panels[r].0, panels[r].1))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(spec, records))
}

fn mean_of<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    csum(v.iter().copied()) / v.len() as f64
}

/// Deterministic reduction of replication records into summaries and tables.
pub fn aggregate(spec: &StudySpec, mut records: Vec<ReplicationRecord>) -> StudyReport {
    let cells = spec.fa.cells();
    let cell_index = |c: &Cell| cells.iter().position(|x| x == c).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (cell_index(&r.cell), r.replication));

    let summaries: Vec<CellSummary> = cells
        .iter()
        .filter_map(|c| {
            let rs: Vec<&ReplicationRecord> = records.iter().filter(|r| r.cell == *c).collect();
            if rs.is_empty() {
                return None;
            }
            let mut mean_estimate = [0.0; 4];
            let mut mean_param_errors = [0.0; 4];
            for k in 0..4 {
                mean_estimate[k] = mean_of(rs.iter().map(|r| r.estimate[k]));
                mean_param_errors[k] = mean_of(rs.iter().map(|r| r.param_errors[k]));
            }
            Some(CellSummary {
                cell: *c,
                replications: rs.len(),
                mean_estimate,
                mean_param_errors,
                mean_fo_hat: mean_of(rs.iter().map(|r| r.fo_hat)),
                mean_fo_true: mean_of(rs.iter().map(|r| r.fo_true)),
                mean_fo_error: mean_of(rs.iter().map(|r| r.fo_error)),
            })
        })
        .collect();

    let tables = TABLE_PAIRS
        .iter()
        .map(|&(rows, cols)| {
            let row_values = spec.fa.axis_values(rows);
            let col_values = spec.fa.axis_values(cols);
            let values = row_values
                .iter()
                .map(|&rv| {
                    col_values
                        .iter()
                        .map(|&cv| {
                            let matching: Vec<f64> = summaries
                                .iter()
                                .filter(|s| s.cell.value(rows) == rv && s.cell.value(cols) == cv)
                                .map(|s| s.mean_fo_error)
                                .collect();
                            if matching.is_empty() {
                                f64::NAN
                            } else {
                                mean_of(matching)
                            }
                        })
                        .collect()
                })
                .collect();
            PairTable { rows, cols, row_values, col_values, values }
        })
        .collect();

    let t = spec.true_theta();
    StudyReport {
        truth: [t.lambda, t.mu, t.eta, t.sigma()],
        cells: summaries,
        tables,
        records,
    }
}

/// One cell of a grid of fits on a fixed panel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFit {
    pub cell: Cell,
    pub fit: FitResult,
    pub mean_error: f64,
}

/// Fits on a fixed panel over a grid of firefly settings, followed by a refit
/// with a larger swarm at the best cell's `(alpha, gamma, delta)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFitReport {
    pub grid: Vec<GridFit>,
    pub best: usize,
    pub refit: Option<GridFit>,
}

impl GridFitReport {
    /// Refit when one was requested, otherwise the best grid cell.
    pub fn final_fit(&self) -> &GridFit {
        self.refit.as_ref().unwrap_or(&self.grid[self.best])
    }
}

/// Grid search on one panel, ranked by fitted-mean error.
pub fn fit_grid(panel: &PathPanel, grid: &FaGrid, seed: u64, refit_n: Option<usize>) -> Result<GridFitReport> {
    grid.validate()?;
    let fits = grid
        .cells()
        .into_par_iter()
        .map(|cell| {
            let f = fit(panel, &cell.config(grid, FaGrid::fit_seed(seed, &cell, 0)))?;
            let mean_error = fitted_mean_error(panel, &f)?;
            Ok(GridFit { cell, fit: f, mean_error })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = fits
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.mean_error.total_cmp(&b.1.mean_error))
        .map(|(k, _)| k)
        .ok_or_else(|| H1Error::Config("empty firefly grid".into()))?;
    let refit = match refit_n {
        Some(n) => {
            let cell = Cell { n, ..fits[best].cell };
            let f = fit(panel, &cell.config(grid, FaGrid::fit_seed(seed, &cell, 1)))?;
            let mean_error = fitted_mean_error(panel, &f)?;
            Some(GridFit { cell, fit: f, mean_error })
        }
        None => None,
    };
    Ok(GridFitReport { grid: fits, best, refit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::SamplePath;

    fn study1() -> H1Params {
        H1Params::new(CurveParams::new(0.5, 0.8, 0.8, 0.0, 0.1).unwrap(), 0.015).unwrap()
    }

    fn small_spec() -> StudySpec {
        StudySpec {
            params: study1(),
            initial: None,
            grid: TimeGrid { start: 0.0, end: 30.0, step: 0.25 },
            n_paths: 6,
            replications: 2,
            fa: FaGrid { alpha: vec![0.2], gamma: vec![1.0], delta: vec![0.97], n: vec![10], generations: 15, beta0: 1.0 },
            seed: 3,
        }
    }

    #[test]
    fn mean_error_edge_cases() {
        let obs = [0.1, 0.2, 0.4];
        assert_eq!(mean_abs_relative_error(&obs, &obs).unwrap(), 0.0);
        let doubled: Vec<f64> = obs.iter().map(|x| 2.0 * x).collect();
        assert!((mean_abs_relative_error(&obs, &doubled).unwrap() - 1.0).abs() < 1e-15);
        assert!(mean_abs_relative_error(&[0.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(mean_abs_relative_error(&[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn cross_path_mean_groups_by_time() {
        let a = SamplePath { times: vec![-1.0, 0.5, 2.0], values: vec![1.0, 2.0, 3.0] };
        let b = SamplePath { times: vec![-1.0, 2.0], values: vec![3.0, 5.0] };
        let panel = PathPanel::new(vec![a, b]).unwrap();
        assert_eq!(cross_path_mean(&panel), vec![(-1.0, 2.0), (0.5, 2.0), (2.0, 4.0)]);
    }

    #[test]
    fn fit_respects_boxes_and_archive() {
        let spec = small_spec();
        let panel = spec.panel(0).unwrap();
        let cfg = FireflyConfig { n: 12, generations: 20, seed: 5, ..FireflyConfig::default() };
        let f = fit(&panel, &cfg).unwrap();
        assert!(f.param_box.contains(f.lambda, f.mu, f.eta, f.sigma));
        let stats = SufficientStats::new(&panel);
        assert_eq!(stats.objective_fo(&f.theta()).unwrap(), f.fo_value);
        assert_eq!(f.trace.last().unwrap().best_so_far, f.fo_value);
        assert_eq!(f.trace.len(), cfg.generations + 1);
        for rec in &f.trace {
            for p in &rec.positions {
                assert!(f.param_box.contains(p[0], p[1], p[2], p[3]), "{p:?}");
            }
        }
        let again = fit(&panel, &cfg).unwrap();
        assert_eq!(again.trace, f.trace);
        assert_eq!(again.fo_value, f.fo_value);
    }

    #[test]
    fn near_noiseless_panel_recovers_truth() {
        let p = H1Params::new(*study1().curve(), 1e-4).unwrap();
        let ts: Vec<f64> = (0..201).map(|j| j as f64 * 0.25).collect();
        let panel = p.simulate(&InitialLaw::Degenerate { x0: 0.1 }, &ts, 5, 1).unwrap();
        let cfg = FireflyConfig { n: 40, generations: 120, delta: 0.95, seed: 2, ..FireflyConfig::default() };
        let f = fit(&panel, &cfg).unwrap();
        assert!(abs_rel_error(f.lambda, 0.8) < 0.02, "{f:?}");
        assert!(abs_rel_error(f.mu, 0.8) < 0.03, "{f:?}");
        assert!(abs_rel_error(f.eta, 0.5) < 0.02, "{f:?}");
    }

    #[test]
    fn single_short_path_is_a_legal_fit() {
        let panel = PathPanel::new(vec![SamplePath { times: vec![0.0, 1.0], values: vec![0.1, 0.15] }]).unwrap();
        let f = fit(&panel, &FireflyConfig { n: 4, generations: 3, ..FireflyConfig::default() }).unwrap();
        assert_eq!(f.sigma1_sq_hat, 0.0);
        assert!(f.param_box.eta_unit.widened);
        assert!(f.fo_value.is_finite());
    }

    #[test]
    fn study_tables_shape_and_permutation_invariance() {
        let spec = small_spec();
        let report = replicate_study(&spec).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.records.len(), 2);
        for t in &report.tables {
            assert_eq!(t.values.len(), 1);
            assert_eq!(t.values[0].len(), 1);
            assert!((t.values[0][0] - report.cells[0].mean_fo_error).abs() < 1e-18);
        }
        let mut shuffled = report.records.clone();
        shuffled.reverse();
        assert_eq!(aggregate(&spec, shuffled), report);
        assert_eq!(replicate_study(&spec).unwrap(), report);
    }

    #[test]
    fn cells_share_panels_but_not_fit_seeds() {
        let spec = small_spec();
        assert_eq!(spec.panel(1).unwrap(), spec.panel(1).unwrap());
        assert_ne!(spec.panel(0).unwrap(), spec.panel(1).unwrap());
        let a = Cell { alpha: 0.2, gamma: 1.0, delta: 0.97, n: 10 };
        let b = Cell { gamma: 5.0, ..a };
        assert_ne!(FaGrid::fit_seed(1, &a, 0), FaGrid::fit_seed(1, &b, 0));
        assert_ne!(FaGrid::fit_seed(1, &a, 0), FaGrid::fit_seed(1, &a, 1));
    }

    #[test]
    fn grid_fit_picks_lowest_error() {
        let spec = small_spec();
        let panel = spec.panel(0).unwrap();
        let grid = FaGrid { alpha: vec![0.2, 0.4], gamma: vec![1.0], delta: vec![0.9, 0.99], n: vec![8], generations: 10, beta0: 1.0 };
        let r = fit_grid(&panel, &grid, 4, Some(12)).unwrap();
        assert_eq!(r.grid.len(), 4);
        let min = r.grid.iter().map(|g| g.mean_error).fold(f64::INFINITY, f64::min);
        assert_eq!(r.grid[r.best].mean_error, min);
        let refit = r.refit.as_ref().unwrap();
        assert_eq!(refit.cell.n, 12);
        assert_eq!(refit.cell.alpha, r.grid[r.best].cell.alpha);
    }
}
