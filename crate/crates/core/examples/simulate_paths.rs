//! Simulate a panel of H1 paths and print the cross-path mean next to the
//! analytic mean function.
//!
//! cargo run --release --example simulate_paths

use h1flow::estimator::cross_path_mean;
use h1flow::{CurveParams, H1Params, InitialLaw, TimeGrid};

fn main() -> h1flow::Result<()> {
    let params = H1Params::new(CurveParams::new(0.5, 0.8, 0.8, 0.0, 0.1)?, 0.015)?;
    let init = InitialLaw::Degenerate { x0: 0.1 };
    let times = TimeGrid { start: 0.0, end: 50.0, step: 0.1 }.points()?;
    let panel = params.simulate(&init, &times, 2000, 42)?;

    println!("{:>6} {:>12} {:>12} {:>10}", "t", "sample mean", "mean_fn", "rel err");
    for (t, xbar) in cross_path_mean(&panel).into_iter().step_by(50) {
        let m = params.mean_fn(&init, t)?;
        println!("{t:>6.1} {xbar:>12.6} {m:>12.6} {:>10.2e}", (xbar - m).abs() / m);
    }
    println!("asymptote k = {:.6}", params.curve().asymptote());
    Ok(())
}
