//! Classify three problem setups: a globally well-posed Gevrey
//! configuration, the same with an η too close to the weight for a global
//! verdict, and a degeneracy too strong for the hypotheses.

use hypwp::{analysis, LeviWeight, ProblemSpec, ShapeFunction, WeightLaw};
use hypwp::{Modulus, WeightFunction, WeightSequence, ZoneParams};

fn spec(s: f64, eta: WeightFunction) -> hypwp::Result<ProblemSpec> {
    let shape = ShapeFunction::monomial(4.0, 1.0)?;
    let lw = LeviWeight::new(shape, 2, WeightLaw::Family { s, m_tilde: 0, beta_tilde: 0.0 })?;
    ProblemSpec::new(
        lw,
        Modulus::Lipschitz,
        WeightSequence::gevrey(2.0, 1.0)?,
        eta,
        ZoneParams::default(),
        0.0,
    )
}

fn show(label: &str, ps: &ProblemSpec) -> hypwp::Result<()> {
    let c = analysis::classify(ps)?;
    println!("{label}: {:?}", c.verdict);
    for chk in &c.checks {
        println!("  {:<22} {}", chk.name, if chk.pass { "pass" } else { "FAIL" });
    }
    if !c.reasons.is_empty() {
        println!("  not covered because: {}", c.reasons.join(", "));
    }
    println!();
    Ok(())
}

fn main() -> hypwp::Result<()> {
    // eta = xi^{1/2} = xi^{1/s*} with s* = 2 < s = 3: data-space weight
    // strictly heavier than the loss, global verdict.
    show("s = 3, eta = xi^(1/2)", &spec(3.0, WeightFunction::power(0.5)?)?)?;

    // eta = xi^{1/3} grows exactly like the loss weight: the comparison
    // holds only in the bounded sense, verdict drops to local.
    show("s = 3, eta = xi^(1/3)", &spec(3.0, WeightFunction::power(1.0 / 3.0)?)?)?;

    // s = 1.9 < m/(m-1) = 2: the degeneracy product grows toward t = 0
    // and the machinery does not apply.
    show("s = 1.9, eta = xi^(1/2)", &spec(1.9, WeightFunction::power(0.5)?)?)?;
    Ok(())
}
