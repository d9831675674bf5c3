//! Simulate a panel at known parameters and recover them by maximum likelihood.
//!
//! cargo run --release --example fit_study1 [seed]

use h1flow::estimator::{abs_rel_error, fit, fitted_mean_error};
use h1flow::{CurveParams, FireflyConfig, H1Params, InitialLaw, SufficientStats, ThetaVector, TimeGrid};

fn main() -> h1flow::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let truth = [0.8, 0.8, 0.5, 0.015];
    let p = H1Params::new(CurveParams::new(truth[2], truth[0], truth[1], 0.0, 0.1)?, truth[3])?;
    let times = TimeGrid { start: 0.0, end: 50.0, step: 0.1 }.points()?;
    let panel = p.simulate(&InitialLaw::Degenerate { x0: 0.1 }, &times, 30, seed)?;

    let cfg = FireflyConfig { n: 40, generations: 80, alpha: 0.2, gamma: 1.0, delta: 0.97, beta0: 1.0, seed };
    let f = fit(&panel, &cfg)?;
    let est = [f.lambda, f.mu, f.eta, f.sigma];
    for (name, (e, t)) in ["lambda", "mu", "eta", "sigma"].iter().zip(est.iter().zip(&truth)) {
        println!("{name:>6}: estimate {e:.6}  truth {t}  rel err {:.2e}", abs_rel_error(*e, *t));
    }
    let fo_true = SufficientStats::new(&panel).objective_fo(&ThetaVector::new(0.8, 0.8, 0.5, 0.015f64.powi(2)))?;
    println!("f_o: fitted {:.3}  at truth {:.3}", f.fo_value, fo_true);
    println!("eta box: ({:.7}, {:.7})", f.param_box.eta.lo, f.param_box.eta.hi);
    println!("fitted mean error: {:.3e}", fitted_mean_error(&panel, &f)?);
    println!("took {:?} over {} evaluations", f.duration, f.evaluations);
    Ok(())
}
