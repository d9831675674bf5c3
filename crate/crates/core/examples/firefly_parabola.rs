//! Firefly optimizer on a one-dimensional parabola and a shifted sphere.
//!
//! cargo run --release --example firefly_parabola

use h1flow::bounds::Interval;
use h1flow::firefly::{optimize, SearchBox};
use h1flow::FireflyConfig;

fn main() -> h1flow::Result<()> {
    let bounds = SearchBox::new(vec![Interval::new(0.0, 5.0)])?;
    for seed in 0..5 {
        let cfg = FireflyConfig { n: 20, generations: 60, seed, ..FireflyConfig::default() };
        let r = optimize(|x: &[f64]| -(x[0] - 2.0).powi(2), &bounds, &cfg)?;
        println!("seed {seed}: x* = {:.8}, f = {:.3e}, evaluations = {}", r.best_position[0], r.best_value, r.evaluations);
    }

    let cube = SearchBox::new(vec![Interval::new(-5.0, 5.0); 4])?;
    let cfg = FireflyConfig { n: 30, generations: 100, seed: 9, ..FireflyConfig::default() };
    let r = optimize(|x: &[f64]| -x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>(), &cube, &cfg)?;
    println!("sphere: x* = {:.5?}, f = {:.3e}", r.best_position, r.best_value);
    for rec in r.trace.iter().step_by(20) {
        println!("  generation {:>3}: alpha = {:.4}, best so far = {:.3e}", rec.generation, rec.alpha, rec.best_so_far);
    }
    Ok(())
}
