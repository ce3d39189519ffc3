//! Tabulate the loss-of-derivatives weight for the reference degeneracy
//! λ(t) = t⁴ with s = 3, m = 2, Lipschitz coefficients.
//!
//! The combined weight splits as M(ξ) = W(Λ(t_ξ)) w(Λ(t_ξ))^{m-1} + φ(ξ);
//! for this configuration the closed form is 4 ξ^{1/3} + 1, and the table
//! shows the computed value landing on it.

use hypwp::{analysis, LeviWeight, ProblemSpec, ShapeFunction, WeightLaw};
use hypwp::{Modulus, WeightFunction, WeightSequence, ZoneParams};

fn main() -> hypwp::Result<()> {
    let shape = ShapeFunction::monomial(4.0, 1.0)?;
    let lw = LeviWeight::new(shape, 2, WeightLaw::Family { s: 3.0, m_tilde: 0, beta_tilde: 0.0 })?;
    let ps = ProblemSpec::new(
        lw,
        Modulus::Lipschitz,
        WeightSequence::gevrey(2.0, 1.0)?,
        WeightFunction::power(0.5)?,
        ZoneParams::default(),
        0.0,
    )?;

    println!(
        "{:>12} {:>14} {:>14} {:>14} {:>14} {:>10}",
        "xi", "levi", "phi", "M", "4 xi^(1/3)+1", "ratio"
    );
    for &xi in &hypwp::report::log_grid(1e3, 1e9, 13) {
        let levi = analysis::levi_component(&ps, xi)?;
        let phi = analysis::modulus_component(&ps, xi)?;
        let total = analysis::total_weight(&ps, xi)?;
        let closed = 4.0 * xi.powf(1.0 / 3.0) + 1.0;
        println!(
            "{xi:>12.3e} {levi:>14.6e} {phi:>14.6e} {total:>14.6e} {closed:>14.6e} {:>10.6}",
            total / closed
        );
    }

    // The drift of levi against xi^{1/3} quantifies "lands on it".
    let grid = hypwp::report::log_grid(1e4, 1e9, 15);
    let levi: Vec<f64> =
        grid.iter().map(|&x| analysis::levi_component(&ps, x)).collect::<hypwp::Result<_>>()?;
    let target: Vec<f64> = grid.iter().map(|&x| x.powf(1.0 / 3.0)).collect();
    let fit = analysis::asymptotic_fit(&grid, &levi, &target)?;
    println!(
        "\nlevi vs xi^(1/3): mean ratio {:.6}, log-log drift {:+.2e}",
        fit.ratio_mean, fit.ratio_drift_slope
    );
    Ok(())
}
