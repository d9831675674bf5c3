//! Lognormal transition law of the process: parameters, density, and a
//! quadrature check that it integrates to one.
//!
//! cargo run --release --example transition_density

use h1flow::{CurveParams, H1Params};

fn main() -> h1flow::Result<()> {
    let p = H1Params::new(CurveParams::new(0.5, 0.8, 0.8, 0.0, 0.1)?, 0.015)?;
    let (y, s, t) = (0.1, 0.0, 10.0);
    let law = p.transition_law(y, s, t)?;
    println!("ln X(t) | X(s)=y ~ N({:.8}, {:.3e})", law.log_mean, law.log_var);
    println!("mean {:.8}  mode {:.8}", law.mean(), law.mode());

    // integrate in log space with the trapezoid rule over +-12 sd
    let sd = law.log_var.sqrt();
    let n = 20_000;
    let (lo, hi) = (law.log_mean - 12.0 * sd, law.log_mean + 12.0 * sd);
    let h = (hi - lo) / n as f64;
    let mut total = 0.0;
    for k in 0..=n {
        let u: f64 = lo + k as f64 * h;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        total += w * p.transition_density(u.exp(), t, y, s)? * u.exp();
    }
    println!("integral of density = {:.12}", total * h);

    for x in [0.2, 0.25, 0.3, 0.35] {
        println!("f({x} | {y}) = {:.6e}", p.transition_density(x, t, y, s)?);
    }
    Ok(())
}
