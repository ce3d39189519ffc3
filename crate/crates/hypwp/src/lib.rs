//! Numerical laboratory for the energy weights of degenerate hyperbolic
//! Cauchy problems.
//!
//! The objects of study are operators of order m whose propagation speed
//! degenerates at t = 0 through a shape function λ(t), with lower-order
//! coefficients controlled by a Levi-type weight w built from λ and a
//! modulus of continuity.  The crate evaluates these weights, locates the
//! pseudodifferential/hyperbolic zone boundary in frequency, audits the
//! inequalities the well-posedness machinery rests on, and measures the
//! actual Fourier-mode amplification of x-independent model problems
//! against the predicted loss-of-derivatives weight.
//!
//! Everything is explicit and time-frequency pointwise: no symbol calculus,
//! no Sobolev machinery, just λ, Λ = ∫λ, w, W = ∫w, and the scalar ODE
//! systems they control.
//!
//! Entry points:
//! - [`shape`]: λ catalog and admissibility audit.
//! - [`leviweight`]: the weight family w, its primitive W, zone boundaries
//!   t_ξ, the energy symbol ρ, and the integral bounds behind the energy
//!   estimate.
//! - [`moduli`]: moduli of continuity, the induced weight φ(ξ) = ξ μ(1/ξ),
//!   and weight-sequence envelope checks.
//! - [`analysis`]: combined weight M(ξ), dominance classification, and the
//!   well-posedness verdict for a problem description.
//! - [`mollify`]: coefficient regularization at scale ε(ξ) and its error
//!   bounds in terms of the modulus.
//! - [`spectral`]: first-order systems for single Fourier modes and the
//!   amplification measurements.
//! - [`conjugator`]: the scalar exponent Φ(t0, ξ) that the energy
//!   conjugation spends, addend by addend.
//! - [`cli`]: the command-line front end (`analyze`, `weights`, `simulate`,
//!   `verify`, `fit`).

pub mod analysis;
pub mod cli;
pub mod conjugator;
pub mod cutoff;
pub mod error;
pub mod fitting;
pub mod leviweight;
pub mod moduli;
pub mod mollify;
pub mod ode;
pub mod problem;
pub mod quad;
pub mod report;
pub mod roots;
pub mod shape;
pub mod spectral;

pub use analysis::{Classification, ProblemSpec, Verdict, WeightFunction};
pub use error::{Error, Result};
pub use leviweight::{LeviWeight, WeightLaw, Zone, ZoneParams};
pub use moduli::{Modulus, WeightSequence};
pub use shape::{ShapeFunction, ShapeReport};
pub use conjugator::{ConjugatorConfig, PhiReport};
pub use problem::{LoadedProblem, ProblemDoc};
pub use spectral::{LossReport, ModeTrajectory, ModelProblem};
