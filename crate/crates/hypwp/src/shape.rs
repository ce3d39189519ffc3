//! Degeneracy shape functions λ(t) and their primitives.
//!
//! A shape function describes how the propagation speed collapses at t = 0:
//! λ(0) = λ'(0) = 0 with λ, λ' > 0 on (0, T].  Everything downstream (weights,
//! zone boundaries, energy symbols) is driven by the pair (λ, Λ) where
//! Λ(t) = ∫_0^t λ.  The admissibility conditions this module audits are
//!
//!   c0 · λ/Λ  <=  λ'/λ  <=  c · λ/Λ      with c0 above a threshold that
//!                                         depends on the weight index s and
//!                                         the operator order m, and
//!   |λ''|     <=  c · (λ'/λ) |λ'|         (second-order growth control).
//!
//! Only derivatives up to order 2 are audited; the report records that cap so
//! nobody mistakes a pass for a statement about all orders.
//!
//! Catalog: `monomial` λ = t^l (polynomial degeneracy, primitive in closed
//! form) and `exponential_flat` λ = exp(-t^-r) (vanishing to all orders,
//! primitive by quadrature in logarithmic time).  `custom` accepts arbitrary
//! callables and falls back to finite differences and quadrature for
//! whatever closed forms are missing.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Shared callable for custom shapes and weights.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default relative tolerance for the quadrature-backed primitives.
pub const QUAD_REL_TOL: f64 = 1e-12;

/// Relative step for the finite-difference fallbacks on custom shapes.
const FD_REL_STEP: f64 = 1e-6;

#[derive(Clone)]
pub enum ShapeKind {
    /// λ(t) = t^l.  Λ(t) = t^(l+1)/(l+1) exactly.
    Monomial { l: f64 },
    /// λ(t) = exp(-t^-r) for t > 0, λ(0) = 0.  Flat to all orders at 0.
    ExponentialFlat { r: f64 },
    /// User-supplied λ with optional closed forms for λ' and Λ.
    Custom {
        lambda: ScalarFn,
        lambda_prime: Option<ScalarFn>,
        primitive: Option<ScalarFn>,
        name: String,
    },
}

#[derive(Clone)]
pub struct ShapeFunction {
    kind: ShapeKind,
    t_end: f64,
}

impl fmt::Debug for ShapeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ShapeKind::Monomial { l } => write!(f, "ShapeFunction::monomial(l={l}, T={})", self.t_end),
            ShapeKind::ExponentialFlat { r } => {
                write!(f, "ShapeFunction::exponential_flat(r={r}, T={})", self.t_end)
            }
            ShapeKind::Custom { name, .. } => {
                write!(f, "ShapeFunction::custom({name}, T={})", self.t_end)
            }
        }
    }
}

/// Serialized form.  Custom shapes are a programmatic interface only and are
/// rejected here; problem files must use the named catalog.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeDoc {
    Monomial { l: f64, #[serde(rename = "T")] t_end: f64 },
    ExponentialFlat { r: f64, #[serde(rename = "T")] t_end: f64 },
}

impl ShapeFunction {
    pub fn monomial(l: f64, t_end: f64) -> Result<Self> {
        if !(l >= 1.0) || !l.is_finite() {
            return Err(Error::Input(format!("monomial degree must be >= 1, got {l}")));
        }
        Self::with_kind(ShapeKind::Monomial { l }, t_end)
    }

    pub fn exponential_flat(r: f64, t_end: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Input(format!("flatness exponent must be > 0, got {r}")));
        }
        Self::with_kind(ShapeKind::ExponentialFlat { r }, t_end)
    }

    pub fn custom(
        name: &str,
        lambda: ScalarFn,
        lambda_prime: Option<ScalarFn>,
        primitive: Option<ScalarFn>,
        t_end: f64,
    ) -> Result<Self> {
        Self::with_kind(
            ShapeKind::Custom { lambda, lambda_prime, primitive, name: name.to_string() },
            t_end,
        )
    }

    fn with_kind(kind: ShapeKind, t_end: f64) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::Input(format!("time horizon must be positive, got {t_end}")));
        }
        Ok(ShapeFunction { kind, t_end })
    }

    pub fn from_doc(doc: &ShapeDoc) -> Result<Self> {
        match *doc {
            ShapeDoc::Monomial { l, t_end } => Self::monomial(l, t_end),
            ShapeDoc::ExponentialFlat { r, t_end } => Self::exponential_flat(r, t_end),
        }
    }

    pub fn to_doc(&self) -> Result<ShapeDoc> {
        match &self.kind {
            ShapeKind::Monomial { l } => Ok(ShapeDoc::Monomial { l: *l, t_end: self.t_end }),
            ShapeKind::ExponentialFlat { r } => {
                Ok(ShapeDoc::ExponentialFlat { r: *r, t_end: self.t_end })
            }
            ShapeKind::Custom { name, .. } => Err(Error::Input(format!(
                "custom shape '{name}' has no serialized form"
            ))),
        }
    }

    pub fn kind(&self) -> &ShapeKind {
        &self.kind
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t_end).contains(&t) {
            return Err(Error::Domain(format!(
                "t = {t} outside [0, {}] for {self:?}",
                self.t_end
            )));
        }
        Ok(())
    }

    /// λ(t) on [0, T].
    pub fn lambda(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(match &self.kind {
            ShapeKind::Monomial { l } => t.powf(*l),
            ShapeKind::ExponentialFlat { r } => {
                if t == 0.0 {
                    0.0
                } else {
                    (-t.powf(-r)).exp()
                }
            }
            ShapeKind::Custom { lambda, .. } => lambda(t),
        })
    }

    /// λ'(t).  Closed form for the catalog, central difference for custom
    /// shapes without a supplied derivative (relative step 1e-6).
    pub fn lambda_prime(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        match &self.kind {
            ShapeKind::Monomial { l } => Ok(if t == 0.0 {
                if *l > 1.0 { 0.0 } else { 1.0 }
            } else {
                l * t.powf(l - 1.0)
            }),
            ShapeKind::ExponentialFlat { r } => Ok(if t == 0.0 {
                0.0
            } else {
                r * t.powf(-r - 1.0) * (-t.powf(-r)).exp()
            }),
            ShapeKind::Custom { lambda, lambda_prime, .. } => {
                if let Some(dp) = lambda_prime {
                    Ok(dp(t))
                } else {
                    let h = (t.abs().max(self.t_end * 1e-3)) * FD_REL_STEP;
                    let hi = (t + h).min(self.t_end);
                    let lo = (t - h).max(0.0);
                    Ok((lambda(hi) - lambda(lo)) / (hi - lo))
                }
            }
        }
    }

    /// λ''(t); used only by the second-order growth audit.
    pub fn lambda_second(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        match &self.kind {
            ShapeKind::Monomial { l } => Ok(if t == 0.0 {
                0.0
            } else {
                l * (l - 1.0) * t.powf(l - 2.0)
            }),
            ShapeKind::ExponentialFlat { r } => {
                if t == 0.0 {
                    return Ok(0.0);
                }
                let lam = (-t.powf(-r)).exp();
                Ok(lam * (r * r * t.powf(-2.0 * r - 2.0) - r * (r + 1.0) * t.powf(-r - 2.0)))
            }
            ShapeKind::Custom { .. } => {
                let h = (t.abs().max(self.t_end * 1e-3)) * FD_REL_STEP.sqrt();
                let hi = (t + h).min(self.t_end);
                let lo = (t - h).max(0.0);
                let mid = 0.5 * (hi + lo);
                let half = 0.5 * (hi - lo);
                let f = |x: f64| self.lambda(x);
                Ok((f(mid + half)? - 2.0 * f(mid)? + f(mid - half)?) / (half * half))
            }
        }
    }

    /// Λ(t) = ∫_0^t λ.  Monomial in closed form; otherwise adaptive
    /// quadrature in u = log τ, which resolves the flat endpoint at 0.
    pub fn primitive(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            ShapeKind::Monomial { l } => Ok(t.powf(l + 1.0) / (l + 1.0)),
            ShapeKind::Custom { primitive: Some(p), .. } => Ok(p(t)),
            _ => {
                // ∫_0^t λ(τ) dτ = ∫_{-inf}^{ln t} λ(e^u) e^u du.  For an
                // admissible shape λ is nondecreasing near 0, so the tail
                // below u_min = ln t - 45 is at most λ(t) t e^{-45}, which is
                // beyond the 1e-12 relative target.
                let u_hi = t.ln();
                let u_lo = u_hi - 45.0;
                let r = quad::integrate(
                    |u| {
                        let tau = u.exp();
                        self.lambda(tau).map(|v| v * tau).unwrap_or(f64::NAN)
                    },
                    u_lo,
                    u_hi,
                    QUAD_REL_TOL,
                    0.0,
                )?;
                Ok(r.value)
            }
        }
    }

    /// Inverse of the primitive: the t in [0, T] with Λ(t) = y.
    pub fn primitive_inverse(&self, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::Domain(format!("primitive is nonnegative; cannot invert at {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let top = self.primitive(self.t_end)?;
        if y > top {
            return Err(Error::Domain(format!(
                "primitive reaches only {top:e} at T = {}; cannot invert at {y:e}",
                self.t_end
            )));
        }
        if let ShapeKind::Monomial { l } = self.kind {
            return Ok(((l + 1.0) * y).powf(1.0 / (l + 1.0)));
        }
        let b = crate::roots::bisect(
            |t| Ok(self.primitive(t)? - y),
            0.0,
            self.t_end,
            1e-14 * self.t_end,
        )?;
        Ok(b.root)
    }
}

/// Outcome of the admissibility audit on a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct ShapeReport {
    /// Lower threshold that the empirical c0 must exceed: s(m-1)/((s-1)m).
    pub threshold: f64,
    /// min over the grid of (λ'/λ) / (λ/Λ).
    pub c0_hat: f64,
    /// max over the grid of the same ratio.
    pub c_hat: f64,
    /// max over the grid of |λ''| / ((λ'/λ)|λ'|).
    pub second_order_ratio: f64,
    /// Highest derivative order audited.  Always 2 here; growth conditions on
    /// higher derivatives are assumed, not checked.
    pub max_checked_derivative: u32,
    pub pass: bool,
    pub grid_len: usize,
}

/// Audit the shape conditions for order-m operators with weight index s on
/// the supplied grid (strictly inside (0, T]).
///
/// The ratio (λ'/λ)/(λ/Λ) is scale-free: for λ = t^l it is identically
/// l/(l+1), and the pass condition c0_hat > s(m-1)/((s-1)m) then reads
/// l/(l+1) > s(m-1)/((s-1)m).
pub fn check_shape_conditions(
    shape: &ShapeFunction,
    s: f64,
    m: u32,
    grid: &[f64],
) -> Result<ShapeReport> {
    if !(s > 1.0) {
        return Err(Error::Input(format!("weight index s must exceed 1, got {s}")));
    }
    if m < 2 {
        return Err(Error::Input(format!("operator order m must be >= 2, got {m}")));
    }
    let mf = m as f64;
    check_shape_conditions_at(shape, s * (mf - 1.0) / ((s - 1.0) * mf), grid)
}

/// Same audit against an explicit threshold; used when the weight law has no
/// index s, where the safe requirement is the s-independent limit (m-1)/m.
pub fn check_shape_conditions_at(
    shape: &ShapeFunction,
    threshold: f64,
    grid: &[f64],
) -> Result<ShapeReport> {
    if grid.is_empty() {
        return Err(Error::Input("shape condition grid is empty".into()));
    }
    let mut c0_hat = f64::INFINITY;
    let mut c_hat = f64::NEG_INFINITY;
    let mut second = 0.0f64;
    for &t in grid {
        if !(t > 0.0 && t <= shape.t_end()) {
            return Err(Error::Domain(format!(
                "shape condition grid point {t} outside (0, {}]",
                shape.t_end()
            )));
        }
        let lam = shape.lambda(t)?;
        if !(lam > 0.0) {
            return Err(Error::Domain(format!(
                "λ({t}) = {lam}; conditions require λ > 0 away from 0"
            )));
        }
        let lp = shape.lambda_prime(t)?;
        let big = shape.primitive(t)?;
        if !(big > 0.0) {
            return Err(Error::Domain(format!("Λ({t}) = {big} is not positive")));
        }
        let ratio = (lp / lam) / (lam / big);
        c0_hat = c0_hat.min(ratio);
        c_hat = c_hat.max(ratio);
        let lpp = shape.lambda_second(t)?;
        if lp != 0.0 {
            second = second.max(lpp.abs() / ((lp / lam).abs() * lp.abs()));
        }
    }
    Ok(ShapeReport {
        threshold,
        c0_hat,
        c_hat,
        second_order_ratio: second,
        max_checked_derivative: 2,
        pass: c0_hat > threshold,
        grid_len: grid.len(),
    })
}
