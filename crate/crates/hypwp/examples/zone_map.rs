//! Map the pseudodifferential/hyperbolic zone boundary t_ξ across
//! frequencies and verify the scaling Λ(t_ξ) ~ ξ^{-(s-1)/s}.
//!
//! The boundary solves N w(Λ(t))^m = ξ.  Below t_ξ the energy runs on the
//! symbol ρ, above it on ξλ(t); the blend occupies [t_ξ, t_{2ξ}] where the
//! doubled-constant boundary closes the transition.

use hypwp::{LeviWeight, ShapeFunction, WeightLaw, ZoneParams};

fn main() -> hypwp::Result<()> {
    let s = 3.0;
    let shape = ShapeFunction::monomial(4.0, 1.0)?;
    let lw = LeviWeight::new(shape, 2, WeightLaw::Family { s, m_tilde: 0, beta_tilde: 0.0 })?;
    let zones = ZoneParams::default();

    println!(
        "{:>12} {:>14} {:>14} {:>14} {:>16} {:>12}",
        "xi", "t_xi", "t_2xi", "Lambda(t_xi)", "Lam*xi^((s-1)/s)", "residual"
    );
    for &xi in &hypwp::report::log_grid(1e3, 1e12, 10) {
        let b = lw.t_xi(xi, &zones)?;
        let b2 = lw.t_xi_upper(xi, &zones)?;
        let scaling = b.lambda_primitive * xi.powf((s - 1.0) / s);
        println!(
            "{xi:>12.3e} {:>14.8e} {:>14.8e} {:>14.8e} {scaling:>16.12} {:>12.2e}",
            b.t, b2.t, b.lambda_primitive, b.residual
        );
    }

    // Low frequencies sit entirely in the hyperbolic zone: the boundary
    // clamps to T and says so.
    let low = lw.t_xi(2.5, &zones)?;
    println!("\nxi = 2.5: t_xi = {} (clamped: {})", low.t, low.clamped);

    // CSV form of the same table, as `hypwp weights` emits it.
    let grid = hypwp::report::log_grid(1e3, 1e6, 4);
    let mut out = Vec::new();
    hypwp::leviweight::write_zone_table(&lw, &zones, &grid, &mut out)?;
    println!("\n{}", String::from_utf8(out).expect("ascii"));
    Ok(())
}
