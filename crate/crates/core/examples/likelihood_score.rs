//! Reduced objective, its gradient, and the profiled diffusion variance on a
//! simulated panel.
//!
//! cargo run --release --example likelihood_score

use h1flow::{CurveParams, H1Params, InitialLaw, SufficientStats, ThetaVector, TimeGrid};

fn main() -> h1flow::Result<()> {
    let p = H1Params::new(CurveParams::new(0.5, 0.8, 0.8, 0.0, 0.1)?, 0.015)?;
    let times = TimeGrid { start: 0.0, end: 50.0, step: 0.1 }.points()?;
    let panel = p.simulate(&InitialLaw::Degenerate { x0: 0.1 }, &times, 30, 1)?;
    let stats = SufficientStats::new(&panel);

    let truth = ThetaVector::new(0.8, 0.8, 0.5, 0.015f64.powi(2));
    println!("f_o(truth) = {:.4}", stats.objective_fo(&truth)?);
    let g = stats.score(&truth)?;
    println!("score (lambda, mu, eta, sigma^2) = {g:.4?}");

    let prof = stats.profile_sigma_sq(0.8, 0.8, 0.5)?;
    println!("profiled sigma^2 = {:.6e} (sigma = {:.6})", prof.sigma_sq, prof.sigma_sq.sqrt());
    let at_prof = ThetaVector::new(0.8, 0.8, 0.5, prof.sigma_sq);
    println!("d f_o / d sigma^2 at profile = {:.3e}", stats.score(&at_prof)?[3]);

    for lam in [0.78, 0.79, 0.8, 0.81, 0.82] {
        let s = stats.profile_sigma_sq(lam, 0.8, 0.5)?.sigma_sq;
        println!("lambda = {lam:.2}: profiled f_o = {:.4}", stats.objective_fo(&ThetaVector::new(lam, 0.8, 0.5, s))?);
    }
    Ok(())
}
