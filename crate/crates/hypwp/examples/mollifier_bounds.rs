//! Mollify a Hoelder-rough coefficient at scale ε and check the two bounds
//! the energy estimate needs: |a_ε - a| ≤ C μ(ε) and |∂_t a_ε| ≤ C μ(ε)/ε.
//!
//! The test function |t - 1/2|^α has exactly Hoelder-α regularity, so the
//! ratios to the claimed bounds stay bounded as ε shrinks.  Declaring a
//! stronger modulus (Lipschitz) makes the derivative ratio blow up like
//! ε^{α-1}, and the audit's slope clause catches it.

use std::sync::Arc;

use hypwp::mollify::{verify_mollifier_bounds, Extension, MollifierKernel, TimeCoefficient};
use hypwp::Modulus;

fn kink(modulus: Modulus) -> hypwp::Result<TimeCoefficient> {
    let alpha = 0.5;
    TimeCoefficient::new(
        "1 + |t-1/2|^0.5",
        Arc::new(move |t: f64| 1.0 + (t - 0.5).abs().powf(alpha)),
        modulus,
        Extension::Reflect,
        1.0,
    )
}

fn main() -> hypwp::Result<()> {
    let kernel = MollifierKernel::standard();
    let eps: Vec<f64> = (0..10).map(|k| 0.25 * 0.5f64.powi(k)).collect();

    let rep = verify_mollifier_bounds(&kink(Modulus::hoelder(0.5)?)?, &kernel, &eps)?;
    println!("declared Hoelder(1/2) on a Hoelder(1/2) kink: pass = {}", rep.pass);
    println!("{:>12} {:>16} {:>16}", "eps", "dist/mu(eps)", "deriv*eps/mu(eps)");
    for row in &rep.rows {
        println!(
            "{:>12.4e} {:>16.6} {:>16.6}",
            row.eps, row.distance_ratio, row.derivative_ratio
        );
    }
    println!(
        "ratio slopes vs eps: distance {:+.3}, derivative {:+.3}\n",
        rep.distance_slope, rep.derivative_slope
    );

    let rep = verify_mollifier_bounds(&kink(Modulus::Lipschitz)?, &kernel, &eps)?;
    println!("declared Lipschitz on the same kink: pass = {}", rep.pass);
    println!(
        "derivative ratio drifts like eps^(alpha-1): slope {:+.3}",
        rep.derivative_slope
    );
    Ok(())
}
