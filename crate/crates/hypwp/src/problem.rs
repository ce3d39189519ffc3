//! Problem files: one JSON document describing a full experiment.
//!
//! The document carries the hypothesis data (shape, weight law, modulus,
//! weight sequence, data-space weight, zones) and optionally an explicit
//! model problem for the mode integrator.  Everything the library can check
//! flows from this one artifact, so a run is archivable as spec + outputs.
//!
//! Serialization lives with the owning modules (`ShapeDoc`, `ModulusDoc`,
//! ...); this module only assembles them and converts to the runtime types.
//! Custom (closure-backed) shapes, laws, and moduli have no document form by
//! design: a file that names them could not be replayed.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{ProblemSpec, WeightFunction, WeightFunctionDoc};
use crate::error::{Error, Result};
use crate::leviweight::{LeviWeight, WeightLaw, WeightLawDoc, ZoneParams};
use crate::moduli::{Modulus, ModulusDoc, WeightSequence, WeightSequenceDoc};
use crate::mollify::TimeCoefficient;
use crate::shape::{ShapeDoc, ShapeFunction};
use crate::spectral::{CoeffExpr, LowerTerm, ModelProblem, PrincipalTerm};

/// A complex scale; plain numbers are accepted for real values.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexDoc {
    Real(f64),
    Pair { re: f64, im: f64 },
}

impl From<ComplexDoc> for Complex64 {
    fn from(d: ComplexDoc) -> Self {
        match d {
            ComplexDoc::Real(re) => Complex64::new(re, 0.0),
            ComplexDoc::Pair { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoeffExprDoc {
    Constant { value: ComplexDoc },
    Power { scale: ComplexDoc, exponent: f64 },
    Poly { coeffs: Vec<ComplexDoc> },
    LeviSaturating { scale: ComplexDoc, lambda_pow: u32, w_pow: u32 },
}

impl CoeffExprDoc {
    fn build(&self) -> CoeffExpr {
        match self {
            CoeffExprDoc::Constant { value } => CoeffExpr::Constant((*value).into()),
            CoeffExprDoc::Power { scale, exponent } => {
                CoeffExpr::Power { scale: (*scale).into(), exponent: *exponent }
            }
            CoeffExprDoc::Poly { coeffs } => {
                CoeffExpr::Poly { coeffs: coeffs.iter().map(|c| (*c).into()).collect() }
            }
            CoeffExprDoc::LeviSaturating { scale, lambda_pow, w_pow } => CoeffExpr::LeviSaturating {
                scale: (*scale).into(),
                lambda_pow: *lambda_pow,
                w_pow: *w_pow,
            },
        }
    }
}

fn lipschitz() -> ModulusDoc {
    ModulusDoc::Lipschitz
}

/// Principal-part coefficients are real and carry a declared regularity so
/// the mollified route knows which modulus bound to apply.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrincipalCoeffDoc {
    Constant { value: f64 },
    Poly {
        coeffs: Vec<f64>,
        #[serde(default = "lipschitz")]
        modulus: ModulusDoc,
    },
}

impl PrincipalCoeffDoc {
    fn build(&self, t_end: f64) -> Result<TimeCoefficient> {
        match self {
            PrincipalCoeffDoc::Constant { value } => TimeCoefficient::constant(*value, t_end),
            PrincipalCoeffDoc::Poly { coeffs, modulus } => {
                if coeffs.is_empty() {
                    return Err(Error::Input("polynomial coefficient needs at least one term".into()));
                }
                for (i, c) in coeffs.iter().enumerate() {
                    if !c.is_finite() {
                        return Err(Error::Input(format!(
                            "polynomial coefficient {i} is not finite: {c}"
                        )));
                    }
                }
                let name = format!("poly{coeffs:?}");
                let cs = coeffs.clone();
                let f = Arc::new(move |t: f64| {
                    let mut acc = 0.0;
                    for c in cs.iter().rev() {
                        acc = acc * t + c;
                    }
                    acc
                });
                TimeCoefficient::new(
                    &name,
                    f,
                    Modulus::from_doc(modulus)?,
                    crate::mollify::Extension::Reflect,
                    t_end,
                )
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalTermDoc {
    pub dt_order: u32,
    pub coeff: PrincipalCoeffDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerTermDoc {
    pub dt_order: u32,
    pub dx_order: u32,
    pub coeff: CoeffExprDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub principal: Vec<PrincipalTermDoc>,
    #[serde(default)]
    pub lower: Vec<LowerTermDoc>,
}

/// The whole experiment file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub shape: ShapeDoc,
    /// Equation order m.
    pub m: u32,
    pub law: WeightLawDoc,
    pub modulus: ModulusDoc,
    pub weight_sequence: WeightSequenceDoc,
    pub eta: WeightFunctionDoc,
    #[serde(default)]
    pub zones: ZoneParams,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub p_max: Option<u32>,
    #[serde(default)]
    pub model: Option<ModelDoc>,
}

/// Runtime form of a parsed document.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub ps: ProblemSpec,
    pub model: Option<ModelProblem>,
}

pub fn from_doc(doc: &ProblemDoc) -> Result<LoadedProblem> {
    let shape = ShapeFunction::from_doc(&doc.shape)?;
    let t_end = shape.t_end();
    let WeightLawDoc::Family { s, m_tilde, beta_tilde } = doc.law;
    let lw = LeviWeight::new(shape, doc.m, WeightLaw::Family { s, m_tilde, beta_tilde })?;
    let modulus = Modulus::from_doc(&doc.modulus)?;
    let mut ps = ProblemSpec::new(
        lw.clone(),
        modulus.clone(),
        WeightSequence::from_doc(&doc.weight_sequence)?,
        WeightFunction::from_doc(&doc.eta)?,
        doc.zones,
        doc.nu,
    )?;
    if let Some(p_max) = doc.p_max {
        ps = ps.with_p_max(p_max);
    }
    let model = match &doc.model {
        None => None,
        Some(md) => {
            let principal = md
                .principal
                .iter()
                .map(|p| {
                    Ok(PrincipalTerm { dt_order: p.dt_order, coeff: p.coeff.build(t_end)? })
                })
                .collect::<Result<Vec<_>>>()?;
            let lower = md
                .lower
                .iter()
                .map(|l| LowerTerm {
                    dt_order: l.dt_order,
                    dx_order: l.dx_order,
                    coeff: l.coeff.build(),
                })
                .collect();
            Some(ModelProblem::new(doc.m, principal, lower, lw, doc.zones, modulus)?)
        }
    };
    Ok(LoadedProblem { ps, model })
}

/// Parse a document from JSON text.  Syntax errors keep serde's line/column
/// diagnostics; semantic errors come from the constructors and name the
/// offending field.
pub fn parse_problem(text: &str) -> Result<LoadedProblem> {
    let doc: ProblemDoc =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("problem file: {e}")))?;
    from_doc(&doc)
}

pub fn load_problem(path: &Path) -> Result<LoadedProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Input(format!("cannot read problem file {}: {e}", path.display()))
    })?;
    parse_problem(&text)
}
