//! Small replication study over a grid of firefly settings, printing the
//! pairwise error tables.
//!
//! cargo run --release --example replicate_tables

use h1flow::estimator::{replicate_study, FaGrid, StudySpec};
use h1flow::{CurveParams, H1Params, TimeGrid};

fn main() -> h1flow::Result<()> {
    let spec = StudySpec {
        params: H1Params::new(CurveParams::new(0.0003, 0.6, 0.8, 0.0, 0.000125)?, 0.025)?,
        initial: None,
        grid: TimeGrid { start: 0.0, end: 40.0, step: 0.2 },
        n_paths: 30,
        replications: 4,
        fa: FaGrid {
            alpha: vec![0.2, 0.4],
            gamma: vec![1.0, 35.0],
            delta: vec![0.97],
            n: vec![10, 20],
            generations: 60,
            beta0: 1.0,
        },
        seed: 2024,
    };
    let report = replicate_study(&spec)?;
    for t in &report.tables {
        println!("\n{} \\ {}", t.rows.name(), t.cols.name());
        print!("{:>8}", "");
        for c in &t.col_values {
            print!("{c:>12}");
        }
        println!();
        for (r, vals) in t.row_values.iter().zip(&t.values) {
            print!("{r:>8}");
            for v in vals {
                print!("{v:>12.3e}");
            }
            println!();
        }
    }
    println!("\nper-cell parameter errors (lambda, mu, eta, sigma):");
    for c in &report.cells {
        let errs: Vec<String> = c.mean_param_errors.iter().map(|e| format!("{e:.3e}")).collect();
        println!("{:?}: {}", c.cell, errs.join(" "));
    }
    Ok(())
}
