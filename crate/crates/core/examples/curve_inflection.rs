//! Evaluate the H1 growth curve, its classical parametrization and its
//! inflection times.
//!
//! cargo run --release --example curve_inflection

use h1flow::CurveParams;

fn main() -> h1flow::Result<()> {
    let curve = CurveParams::new(0.5, 0.8, 0.8, 0.0, 0.1)?;
    let classical = curve.to_classical();
    println!("reparametrized: eta={} lambda={} mu={}", curve.eta(), curve.lambda(), curve.mu());
    println!(
        "classical: M={:.6} rho={:.6} theta={:.6} a={:.6}",
        classical.m,
        classical.rho,
        classical.theta,
        classical.a()
    );
    println!("asymptote: {:.8}", curve.asymptote());

    for t in [0.0, 1.0, 5.0, 10.0, 20.0, 50.0] {
        println!("x({t:>4}) = {:.8}   xi = {:.6e}", curve.curve_value(t)?, curve.xi(t));
    }

    for t in curve.inflection_times(0.0, 50.0)? {
        println!("inflection at t = {t:.10}, x = {:.8}", curve.curve_value(t)?);
    }
    Ok(())
}
