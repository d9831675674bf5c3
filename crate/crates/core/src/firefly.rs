//! Box-constrained firefly algorithm (maximization).
//!
//! Each generation visits fireflies in rank order. Firefly `i` is compared with
//! every firefly `j <= i`; when `I_i < I_j` it moves towards `j`
//!
//! ```text
//! x_i <- x_i + beta0 exp(-gamma r_ij^2) (x_j - x_i) + alpha (u - 1/2)
//! ```
//!
//! and is re-evaluated immediately. The swarm is then ranked and
//! `alpha <- delta * alpha`. Distances and moves are computed in coordinates
//! normalized to `[0, 1]` per dimension and clamped to the box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::Interval;
use crate::error::{H1Error, Result};

const INIT_STREAM: u64 = 0;
const MOVE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FireflyConfig {
    /// Population size.
    pub n: usize,
    pub generations: usize,
    /// Initial randomization parameter.
    #[serde(alias = "alpha0")]
    pub alpha: f64,
    /// Attractiveness at zero distance.
    pub beta0: f64,
    /// Absorption coefficient.
    pub gamma: f64,
    /// Per-generation reduction factor for `alpha`.
    pub delta: f64,
    pub seed: u64,
}

impl Default for FireflyConfig {
    fn default() -> Self {
        Self {
            n: 40,
            generations: 80,
            alpha: 0.2,
            beta0: 1.0,
            gamma: 1.0,
            delta: 0.97,
            seed: 0,
        }
    }
}

impl FireflyConfig {
    pub fn validate(&self) -> Result<()> {
        let problems = [
            (self.n < 2, "population size must be at least 2"),
            (self.generations < 1, "at least one generation is required"),
            (!(self.alpha >= 0.0 && self.alpha.is_finite()), "alpha must be non-negative"),
            (!(self.beta0 > 0.0 && self.beta0.is_finite()), "beta0 must be positive"),
            (!(self.gamma >= 0.0), "gamma must be non-negative"),
            (!(self.delta > 0.0 && self.delta < 1.0), "delta must lie in (0, 1)"),
        ];
        match problems.iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(H1Error::Config(format!("firefly configuration: {msg}"))),
            None => Ok(()),
        }
    }

    /// `alpha` after `g` generations.
    pub fn alpha_at(&self, g: usize) -> f64 {
        self.alpha * self.delta.powi(g as i32)
    }
}

/// `beta0 exp(-gamma r^2)`.
pub fn attractiveness(r: f64, beta0: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return beta0;
    }
    beta0 * (-gamma * r * r).exp()
}

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    dims: Vec<Interval>,
}

impl SearchBox {
    pub fn new(dims: Vec<Interval>) -> Result<Self> {
        if dims.is_empty() {
            return Err(H1Error::Config("search box has no dimensions".into()));
        }
        if let Some(d) = dims.iter().find(|d| !(d.lo <= d.hi && d.lo.is_finite() && d.hi.is_finite())) {
            return Err(H1Error::Config(format!("invalid search interval [{}, {}]", d.lo, d.hi)));
        }
        Ok(Self { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[Interval] {
        &self.dims
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.dims.iter().zip(x).all(|(d, v)| d.contains(*v))
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        self.dims
            .iter()
            .zip(x)
            .map(|(d, v)| if d.width() > 0.0 { (v - d.lo) / d.width() } else { 0.0 })
            .collect()
    }

    pub fn denormalize(&self, u: &[f64]) -> Vec<f64> {
        self.dims.iter().zip(u).map(|(d, v)| d.clamp(d.lerp(*v))).collect()
    }

    fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.dims.iter().map(|_| rng.random::<f64>()).collect()
    }
}

/// One step of firefly `i` towards `j` in normalized coordinates.
fn step<R: Rng>(ui: &mut [f64], uj: &[f64], alpha: f64, beta0: f64, gamma: f64, rng: &mut R) {
    let r2: f64 = ui.iter().zip(uj).map(|(a, b)| (a - b) * (a - b)).sum();
    let beta = attractiveness(r2.sqrt(), beta0, gamma);
    for (a, b) in ui.iter_mut().zip(uj) {
        let eps = rng.random::<f64>() - 0.5;
        *a = (*a + beta * (b - *a) + alpha * eps).clamp(0.0, 1.0);
    }
}

/// Move a firefly at `from` towards `to` (both in box coordinates).
pub fn move_firefly<R: Rng>(
    from: &[f64],
    to: &[f64],
    alpha: f64,
    beta0: f64,
    gamma: f64,
    rng: &mut R,
    bounds: &SearchBox,
) -> Vec<f64> {
    let mut ui = bounds.normalize(from);
    let uj = bounds.normalize(to);
    step(&mut ui, &uj, alpha, beta0, gamma, rng);
    bounds.denormalize(&ui)
}

/// Swarm snapshot at the end of a generation. Fireflies are listed from
/// brightest to dimmest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// `alpha` after this generation's reduction.
    pub alpha: f64,
    pub positions: Vec<Vec<f64>>,
    pub intensities: Vec<f64>,
    /// Best value seen over every evaluation so far.
    pub best_so_far: f64,
    pub best_so_far_position: Vec<f64>,
    pub evaluations: usize,
}

impl GenerationRecord {
    pub fn current_best(&self) -> (&[f64], f64) {
        (&self.positions[0], self.intensities[0])
    }

    pub fn current_worst(&self) -> (&[f64], f64) {
        let k = self.positions.len() - 1;
        (&self.positions[k], self.intensities[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    /// Generation 0 is the initial population.
    pub trace: Vec<GenerationRecord>,
    pub evaluations: usize,
}

struct Firefly {
    u: Vec<f64>,
    intensity: f64,
}

struct Archive {
    position: Vec<f64>,
    value: f64,
}

impl Archive {
    fn offer(&mut self, u: &[f64], value: f64) {
        if value > self.value {
            self.value = value;
            self.position.clear();
            self.position.extend_from_slice(u);
        }
    }
}

fn light<F: Fn(&[f64]) -> f64>(objective: &F, bounds: &SearchBox, u: &[f64]) -> f64 {
    let v = objective(&bounds.denormalize(u));
    if v.is_finite() {
        v
    } else {
        f64::NEG_INFINITY
    }
}

/// Maximize `objective` over `bounds` from a uniformly drawn population.
pub fn optimize<F>(objective: F, bounds: &SearchBox, cfg: &FireflyConfig) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(INIT_STREAM);
    let initial = (0..cfg.n)
        .map(|_| bounds.denormalize(&bounds.sample_uniform(&mut rng)))
        .collect();
    optimize_from(objective, bounds, cfg, initial)
}

/// Maximize `objective` starting from the given population (box coordinates).
pub fn optimize_from<F>(
    objective: F,
    bounds: &SearchBox,
    cfg: &FireflyConfig,
    initial: Vec<Vec<f64>>,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate()?;
    if initial.len() != cfg.n {
        return Err(H1Error::Config(format!(
            "initial population has {} fireflies, configuration asks for {}",
            initial.len(),
            cfg.n
        )));
    }
    if let Some(p) = initial.iter().find(|p| !bounds.contains(p)) {
        return Err(H1Error::Config(format!("initial firefly {p:?} lies outside the search box")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(MOVE_STREAM);

    let mut evaluations = 0usize;
    let mut swarm: Vec<Firefly> = initial
        .iter()
        .map(|p| {
            let u = bounds.normalize(p);
            let intensity = light(&objective, bounds, &u);
            evaluations += 1;
            Firefly { u, intensity }
        })
        .collect();
    let mut archive = Archive {
        position: swarm[0].u.clone(),
        value: f64::NEG_INFINITY,
    };
    for f in &swarm {
        archive.offer(&f.u, f.intensity);
    }
    rank(&mut swarm);

    let mut trace = Vec::with_capacity(cfg.generations + 1);
    trace.push(snapshot(0, cfg.alpha, &swarm, &archive, bounds, evaluations));

    let n = swarm.len();
    for g in 1..=cfg.generations {
        let alpha = cfg.alpha_at(g - 1);
        for i in 0..n {
            for j in 0..=i {
                if swarm[i].intensity < swarm[j].intensity {
                    let target = swarm[j].u.clone();
                    step(&mut swarm[i].u, &target, alpha, cfg.beta0, cfg.gamma, &mut rng);
                    swarm[i].intensity = light(&objective, bounds, &swarm[i].u);
                    evaluations += 1;
                    archive.offer(&swarm[i].u, swarm[i].intensity);
                }
            }
        }
        rank(&mut swarm);
        trace.push(snapshot(g, cfg.alpha_at(g), &swarm, &archive, bounds, evaluations));
    }

    Ok(OptimizeResult {
        best_position: bounds.denormalize(&archive.position),
        best_value: archive.value,
        trace,
        evaluations,
    })
}

/// Brightest first; ties keep their previous order.
fn rank(swarm: &mut [Firefly]) {
    swarm.sort_by(|a, b| b.intensity.total_cmp(&a.intensity));
}

fn snapshot(
    generation: usize,
    alpha: f64,
    swarm: &[Firefly],
    archive: &Archive,
    bounds: &SearchBox,
    evaluations: usize,
) -> GenerationRecord {
    GenerationRecord {
        generation,
        alpha,
        positions: swarm.iter().map(|f| bounds.denormalize(&f.u)).collect(),
        intensities: swarm.iter().map(|f| f.intensity).collect(),
        best_so_far: archive.value,
        best_so_far_position: bounds.denormalize(&archive.position),
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> FireflyConfig {
        FireflyConfig { n: 20, generations: 60, alpha: 0.2, beta0: 1.0, gamma: 1.0, delta: 0.97, seed }
    }

    #[test]
    fn attractiveness_values() {
        assert_eq!(attractiveness(0.0, 0.7, 3.0), 0.7);
        assert_eq!(attractiveness(12.0, 0.7, 0.0), 0.7);
        assert!((attractiveness(1.0, 1.0, 1.0) - 0.36787944117144233).abs() < 1e-16);
    }

    #[test]
    fn full_attraction_without_noise_lands_on_target() {
        let b = SearchBox::new(vec![Interval::new(0.0, 10.0), Interval::new(-1.0, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let to = [7.5, -0.25];
        let x = move_firefly(&[1.0, 0.5], &to, 0.0, 1.0, 0.0, &mut rng, &b);
        assert!((x[0] - 7.5).abs() < 1e-12 && (x[1] + 0.25).abs() < 1e-12);
        let still = move_firefly(&[1.0, 0.5], &to, 0.0, 1.0, 1e12, &mut rng, &b);
        assert_eq!(still, vec![1.0, 0.5]);
    }

    #[test]
    fn moves_are_reproducible_and_clamped() {
        let b = SearchBox::new(vec![Interval::new(0.0, 1.0); 3]).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|k| move_firefly(&[0.01, 0.5, 0.99], &[0.0, 0.4 + k as f64 * 0.01, 1.0], 0.2, 1.0, 1.0, &mut rng, &b))
                .collect::<Vec<_>>()
        };
        let a = run(3);
        assert_eq!(a, run(3));
        assert!(a.iter().all(|x| b.contains(x)));
    }

    #[test]
    fn single_step_moves_only_the_dimmer_firefly() {
        let b = SearchBox::new(vec![Interval::new(0.0, 5.0)]).unwrap();
        let c = FireflyConfig { n: 2, generations: 1, alpha: 0.0, ..cfg(0) };
        let f = |x: &[f64]| -(x[0] - 2.0).powi(2);
        // dimmer firefly listed first
        let r = optimize_from(f, &b, &c, vec![vec![4.5], vec![2.5]]).unwrap();
        let gen1 = &r.trace[1];
        assert_eq!(gen1.positions[0], vec![2.5]);
        // beta = exp(-(0.4)^2) in normalized units
        let beta = (-(0.4f64 * 0.4)).exp();
        let expected = 4.5 + beta * (2.5 - 4.5);
        let moved = gen1.positions[1][0];
        assert!((moved - expected).abs() < 1e-12, "{moved} vs {expected}");
        assert_eq!(r.evaluations, 3);
    }

    #[test]
    fn converges_on_a_parabola() {
        let b = SearchBox::new(vec![Interval::new(0.0, 5.0)]).unwrap();
        for seed in 0..10 {
            let r = optimize(|x: &[f64]| -(x[0] - 2.0).powi(2), &b, &cfg(seed)).unwrap();
            assert!((r.best_position[0] - 2.0).abs() < 1e-3, "seed {seed}: {:?}", r.best_position);
        }
    }

    #[test]
    fn converges_on_a_sphere() {
        let b = SearchBox::new(vec![Interval::new(-3.0, 3.0), Interval::new(0.0, 10.0)]).unwrap();
        let c = [1.2, 7.1];
        let r = optimize(|x: &[f64]| -((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)), &b, &cfg(1)).unwrap();
        assert!((r.best_position[0] - c[0]).abs() < 1e-2);
        assert!((r.best_position[1] - c[1]).abs() < 1e-2);
    }

    #[test]
    fn trace_invariants() {
        let b = SearchBox::new(vec![Interval::new(-2.0, 2.0); 3]).unwrap();
        let c = cfg(9);
        let f = |x: &[f64]| -x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>() + (5.0 * x[0]).sin();
        let r = optimize(f, &b, &c).unwrap();
        assert_eq!(r.trace.len(), c.generations + 1);
        for (g, rec) in r.trace.iter().enumerate() {
            assert_eq!(rec.generation, g);
            assert_eq!(rec.alpha, c.alpha * c.delta.powi(g as i32));
            assert!(rec.positions.iter().all(|p| b.contains(p)));
            assert!(rec.intensities.windows(2).all(|w| w[0] >= w[1]));
            for (p, i) in rec.positions.iter().zip(&rec.intensities) {
                assert_eq!(f(p), *i);
            }
        }
        assert!(r.trace.windows(2).all(|w| w[1].best_so_far >= w[0].best_so_far));
        assert_eq!(r.trace.last().unwrap().best_so_far, r.best_value);
        assert_eq!(f(&r.best_position), r.best_value);
        assert_eq!(r, optimize(f, &b, &c).unwrap());
    }

    #[test]
    fn nonfinite_objective_is_never_best() {
        let b = SearchBox::new(vec![Interval::new(0.0, 1.0)]).unwrap();
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { x[0] };
        let r = optimize(f, &b, &cfg(2)).unwrap();
        assert!(r.best_value.is_finite());
        assert!(r.best_position[0] <= 0.5);
    }

    #[test]
    fn config_validation() {
        assert!(FireflyConfig { n: 1, ..cfg(0) }.validate().is_err());
        assert!(FireflyConfig { delta: 1.0, ..cfg(0) }.validate().is_err());
        assert!(FireflyConfig { beta0: 0.0, ..cfg(0) }.validate().is_err());
        assert!(FireflyConfig { generations: 0, ..cfg(0) }.validate().is_err());
        assert!(cfg(0).validate().is_ok());
    }

    #[test]
    fn pso_limit_contracts_the_swarm() {
        // gamma = 0, beta0 = 1: each move jumps onto a brighter firefly, up to noise
        let b = SearchBox::new(vec![Interval::new(0.0, 1.0); 2]).unwrap();
        let spread = |rec: &GenerationRecord| {
            let mut s = 0.0;
            let mut k = 0;
            for a in &rec.positions {
                for c in &rec.positions {
                    s += ((a[0] - c[0]).powi(2) + (a[1] - c[1]).powi(2)).sqrt();
                    k += 1;
                }
            }
            s / k as f64
        };
        let mut first = 0.0;
        let mut last = 0.0;
        for seed in 0..20 {
            let c = FireflyConfig { gamma: 0.0, generations: 10, ..cfg(seed) };
            let r = optimize(|x: &[f64]| -(x[0] - 0.7).abs() - (x[1] - 0.2).abs(), &b, &c).unwrap();
            first += spread(&r.trace[0]);
            last += spread(r.trace.last().unwrap());
        }
        assert!(last < first);
    }
}
