//! Fluorescence-style workflow: grid search over firefly settings on one
//! panel, ranked by the fitted-mean error, then a refit with 60 fireflies.
//!
//! cargo run --release --example qpcr_fit [panel.csv]
//!
//! Without an argument a 20-curve, 45-cycle panel is simulated.

use std::path::PathBuf;

use h1flow::estimator::{fit_grid, FaGrid};
use h1flow::io::{read_panel, PanelFormat};
use h1flow::{CurveParams, H1Params, InitialLaw, TimeGrid};

fn main() -> h1flow::Result<()> {
    let panel = match std::env::args().nth(1) {
        Some(path) => read_panel(&PathBuf::from(path), PanelFormat::Wide)?,
        None => {
            let p = H1Params::new(CurveParams::new(0.0002902, 0.483548, 1.6539, 0.0, 0.000125)?, 0.025)?;
            let cycles = TimeGrid { start: 0.0, end: 44.0, step: 1.0 }.points()?;
            p.simulate(&InitialLaw::Degenerate { x0: 0.000125 }, &cycles, 20, 7)?
        }
    };
    let grid = FaGrid {
        alpha: vec![0.2, 0.4],
        gamma: vec![1.0, 5.0],
        delta: vec![0.9, 0.95, 0.97, 0.99],
        n: vec![20],
        generations: 110,
        beta0: 1.0,
    };
    let report = fit_grid(&panel, &grid, 1, Some(60))?;
    println!("{:>6} {:>6} {:>6} {:>10} {:>10} {:>10} {:>12} {:>10}", "alpha", "gamma", "delta", "error", "lambda", "mu", "eta", "sigma");
    for g in &report.grid {
        let f = &g.fit;
        println!(
            "{:>6} {:>6} {:>6} {:>10.5} {:>10.6} {:>10.5} {:>12.4e} {:>10.5}",
            g.cell.alpha, g.cell.gamma, g.cell.delta, g.mean_error, f.lambda, f.mu, f.eta, f.sigma
        );
    }
    let best = &report.grid[report.best];
    println!("best cell: {:?} (error {:.5})", best.cell, best.mean_error);
    let fin = report.final_fit();
    let f = &fin.fit;
    println!(
        "refit n={}: lambda={:.6} mu={:.5} eta={:.4e} sigma={:.5}, error {:.5}",
        fin.cell.n, f.lambda, f.mu, f.eta, f.sigma, fin.mean_error
    );
    Ok(())
}
