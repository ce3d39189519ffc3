//! Which part of the combined weight pays for the loss: the Levi part
//! W w^{m-1} from the degeneracy, or the modulus part φ(ξ) = ξ μ(1/ξ) from
//! coefficient roughness?  Scan the modulus catalog against the s = 3
//! degeneracy and report the verdict for each.

use hypwp::{analysis, LeviWeight, Modulus, ProblemSpec, ShapeFunction, WeightLaw};
use hypwp::{WeightFunction, WeightSequence, ZoneParams};

fn main() -> hypwp::Result<()> {
    let moduli = [
        Modulus::Lipschitz,
        Modulus::LogLip,
        Modulus::log_log_lip(1)?,
        Modulus::hoelder(2.0 / 3.0)?,
        Modulus::hoelder(0.9)?,
        Modulus::log_inverse(2.0)?,
    ];
    let grid = hypwp::report::log_grid(1e4, 1e10, 13);

    for modulus in moduli {
        let shape = ShapeFunction::monomial(4.0, 1.0)?;
        let lw =
            LeviWeight::new(shape, 2, WeightLaw::Family { s: 3.0, m_tilde: 0, beta_tilde: 0.0 })?;
        let ps = ProblemSpec::new(
            lw,
            modulus.clone(),
            WeightSequence::gevrey(2.0, 1.0)?,
            WeightFunction::power(0.5)?,
            ZoneParams::default(),
            0.0,
        )?;
        let rep = analysis::dominance(&ps, &grid)?;
        let last = rep.rows.last().expect("nonempty grid");
        println!(
            "{:<28} {:?}: levi/phi at xi=1e10 is {:.3e} (trend {:+.3} per ln xi)",
            modulus.name(),
            rep.verdict,
            last.levi / last.modulus,
            rep.slope,
        );
    }

    // Hoelder alpha = 1 - 1/s is the break-even regularity: both parts
    // scale as xi^{1/3} and neither can be dropped.
    println!("\nbreak-even alpha = 1 - 1/s = {}", 1.0 - 1.0 / 3.0);
    Ok(())
}
