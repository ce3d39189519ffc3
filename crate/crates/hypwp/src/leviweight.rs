//! The Levi weight w, its primitive W, the zone boundary t_ξ, and the
//! energy symbol ρ.
//!
//! The weight family is
//!
//!   (w(Λ))^m = Λ^{-s/(s-1)} (log^[m̃](1/Λ))^β̃,
//!
//! evaluated throughout in log form so the Λ^{-…} blow-up near t = 0 never
//! overflows.  W(Λ) = ∫_0^Λ w; for β̃ = 0 this is the closed form
//! Λ^{1-a}/(1-a) with a = s/(m(s-1)), which requires a < 1, i.e.
//! s > m/(m-1), for integrability.  The constructor deliberately does not
//! enforce s > m/(m-1): sub-threshold parameters are needed to exhibit the
//! failure of the vanishing-degeneracy condition, and only W itself is
//! undefined there.
//!
//! The zone boundary t_ξ solves N w(Λ(t_ξ))^m = ξ; since t ↦ w(Λ(t)) is
//! decreasing, bisection converges unconditionally (Newton is unusable: w
//! has unbounded derivative near 0).  Frequencies too small for a root in
//! (0, T) clamp to T with an explicit flag.
//!
//! ρ^m = 1 + ξ λ^m (w(Λ))^{m(m-1)} is the pseudodifferential-zone symbol;
//! ρ(0) = 1 exactly when the degeneracy product λ^m w^{m(m-1)} vanishes at
//! 0, which the code probes empirically before answering.
//!
//! `verify_weight_bounds` and `verify_rho_bounds` audit the inequalities
//! the energy estimate consumes: the floor w^m Λ ≥ 1 for small Λ, the decay
//! identity
//!
//!   -∂_t w / w = (λ/(mΛ)) [s/(s-1) + β̃ / ∏_{j=1}^{m̃} log^[j](1/Λ)],
//!
//! the two zone integrals against W(Λ(t_ξ)) w^{m-1}, and the ρ
//! monotonicity/derivative bounds.  All constants are recorded;
//! unknowable theory constants are reported, not asserted.

use std::fmt;
use std::io::Write as IoWrite;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting;
use crate::moduli::iterated_log;
use crate::quad;
use crate::report;
use crate::roots;
use crate::shape::{ScalarFn, ShapeFunction};

#[derive(Clone)]
pub enum WeightLaw {
    /// (w^m)(y) = y^{-s/(s-1)} (log^[m̃](1/y))^β̃.
    Family { s: f64, m_tilde: u32, beta_tilde: f64 },
    /// User-supplied y ↦ (w^m)(y), optionally with its derivative.
    Custom { w_m: ScalarFn, w_m_prime: Option<ScalarFn>, name: String },
}

impl fmt::Debug for WeightLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightLaw::Family { s, m_tilde, beta_tilde } => {
                write!(f, "WeightLaw::Family(s={s}, m_tilde={m_tilde}, beta_tilde={beta_tilde})")
            }
            WeightLaw::Custom { name, .. } => write!(f, "WeightLaw::Custom({name})"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightLawDoc {
    Family { s: f64, m_tilde: u32, beta_tilde: f64 },
}

/// Zone configuration: the free constant N of the boundary equation and the
/// low-frequency cutoff below which no zone semantics apply.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneParams {
    #[serde(default = "default_n_zone")]
    pub n_zone: f64,
    #[serde(default = "default_m_cut")]
    pub m_cut: f64,
}

fn default_n_zone() -> f64 {
    1.0
}
fn default_m_cut() -> f64 {
    2.0
}

impl Default for ZoneParams {
    fn default() -> Self {
        ZoneParams { n_zone: 1.0, m_cut: 2.0 }
    }
}

impl ZoneParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_zone > 0.0) || !self.n_zone.is_finite() {
            return Err(Error::Input(format!("zone constant N must be > 0, got {}", self.n_zone)));
        }
        if !(self.m_cut >= 1.0) || !self.m_cut.is_finite() {
            return Err(Error::Input(format!("frequency cutoff must be >= 1, got {}", self.m_cut)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    BelowCutoff,
    Pseudodifferential,
    Overlap2N,
    Hyperbolic,
}

/// Result of solving N w(Λ(t))^m = ξ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZoneBoundary {
    pub t: f64,
    /// Λ(t) at the boundary.
    pub lambda_primitive: f64,
    /// True when ξ ≤ N w(Λ(T))^m, so the boundary sits beyond the horizon
    /// and t = T is returned instead of a root.
    pub clamped: bool,
    /// (N w(Λ(t))^m - ξ)/ξ at the returned t.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct LeviWeight {
    shape: ShapeFunction,
    m: u32,
    law: WeightLaw,
}

impl LeviWeight {
    pub fn new(shape: ShapeFunction, m: u32, law: WeightLaw) -> Result<Self> {
        if m < 2 {
            return Err(Error::Input(format!("equation order must be >= 2, got {m}")));
        }
        if let WeightLaw::Family { s, m_tilde, beta_tilde } = &law {
            if !(*s > 1.0) || !s.is_finite() {
                return Err(Error::Input(format!("weight index s must exceed 1, got {s}")));
            }
            if *beta_tilde != 0.0 && *m_tilde < 1 {
                return Err(Error::Input(
                    "a nonzero log exponent requires iterated-log depth >= 1".into(),
                ));
            }
        }
        Ok(LeviWeight { shape, m, law })
    }

    pub fn shape(&self) -> &ShapeFunction {
        &self.shape
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn law(&self) -> &WeightLaw {
        &self.law
    }

    pub fn t_end(&self) -> f64 {
        self.shape.t_end()
    }

    /// Integrability index a = s/(m(s-1)) of the family; None for custom laws.
    pub fn a_index(&self) -> Option<f64> {
        match &self.law {
            WeightLaw::Family { s, .. } => Some(s / (self.m as f64 * (s - 1.0))),
            WeightLaw::Custom { .. } => None,
        }
    }

    /// ln (w^m)(y).  y = 0 maps to +inf (the weight blows up at the origin).
    /// Public because coefficient envelopes need w to large powers without
    /// overflowing; callers combine logs and exponentiate once.
    pub fn ln_w_m(&self, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::Domain(format!("weight law evaluated at negative argument {y}")));
        }
        if y == 0.0 {
            return Ok(f64::INFINITY);
        }
        match &self.law {
            WeightLaw::Family { s, m_tilde, beta_tilde } => {
                let mut v = -(s / (s - 1.0)) * y.ln();
                if *beta_tilde != 0.0 {
                    let il = iterated_log(*m_tilde, 1.0 / y)?;
                    if !(il > 0.0) {
                        return Err(Error::Domain(format!(
                            "iterated logarithm level {m_tilde} of 1/{y:e} is {il}, not positive; \
                             weight law undefined there"
                        )));
                    }
                    v += beta_tilde * il.ln();
                }
                Ok(v)
            }
            WeightLaw::Custom { w_m, name, .. } => {
                let v = w_m(y);
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Domain(format!(
                        "custom weight law '{name}' returned {v} at {y:e}; need a positive finite value"
                    )));
                }
                Ok(v.ln())
            }
        }
    }

    /// (w(y))^m.
    pub fn w_m_of(&self, y: f64) -> Result<f64> {
        Ok(self.ln_w_m(y)?.exp())
    }

    /// w(y).
    pub fn w_of(&self, y: f64) -> Result<f64> {
        Ok((self.ln_w_m(y)? / self.m as f64).exp())
    }

    /// w(Λ(t)).
    pub fn w_at(&self, t: f64) -> Result<f64> {
        self.w_of(self.shape.primitive(t)?)
    }

    /// d/dy ln w.  Closed form for the family; for custom laws the supplied
    /// derivative or a central difference with relative step 1e-6.
    pub fn w_log_deriv(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("log-derivative of w needs y > 0, got {y}")));
        }
        let mf = self.m as f64;
        match &self.law {
            WeightLaw::Family { s, m_tilde, beta_tilde } => {
                let mut bracket = s / (s - 1.0);
                if *beta_tilde != 0.0 {
                    let mut prod = 1.0;
                    for j in 1..=*m_tilde {
                        let lj = iterated_log(j, 1.0 / y)?;
                        if !(lj > 0.0) {
                            return Err(Error::Domain(format!(
                                "iterated logarithm level {j} of 1/{y:e} is {lj}, not positive"
                            )));
                        }
                        prod *= lj;
                    }
                    bracket += beta_tilde / prod;
                }
                Ok(-bracket / (mf * y))
            }
            WeightLaw::Custom { w_m, w_m_prime, .. } => {
                if let Some(dp) = w_m_prime {
                    Ok(dp(y) / (mf * w_m(y)))
                } else {
                    let h = y * 1e-6;
                    Ok((self.ln_w_m(y + h)? - self.ln_w_m(y - h)?) / (2.0 * h * mf))
                }
            }
        }
    }

    /// W(y) = ∫_0^y w.  Closed form for β̃ = 0; otherwise quadrature in
    /// u = log(1/v), walked in chunks until the exponential tail is spent.
    pub fn w_primitive(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return if y == 0.0 {
                Ok(0.0)
            } else {
                Err(Error::Domain(format!("W evaluated at negative argument {y}")))
            };
        }
        let mf = self.m as f64;
        match &self.law {
            WeightLaw::Family { s, m_tilde, beta_tilde } => {
                let a = s / (mf * (s - 1.0));
                if !(a < 1.0) {
                    return Err(Error::Domain(format!(
                        "w is not integrable at 0 for s = {s}, m = {}: index a = {a} >= 1 \
                         (need s > m/(m-1))",
                        self.m
                    )));
                }
                if *beta_tilde == 0.0 {
                    return Ok(y.powf(1.0 - a) / (1.0 - a));
                }
                // ∫_0^y v^{-a} (log^[m̃](1/v))^{β̃/m} dv
                //   = ∫_{ln(1/y)}^∞ e^{-(1-a)u} (log^[m̃-1](u))^{β̃/m} du.
                let expo = beta_tilde / mf;
                let depth = *m_tilde - 1;
                let u0 = (1.0 / y).ln();
                let il0 = iterated_log(depth, u0)?;
                if !(il0 > 0.0) {
                    return Err(Error::Domain(format!(
                        "iterated logarithm level {m_tilde} of 1/{y:e} is not positive; \
                         W undefined there"
                    )));
                }
                let width = 40.0 / (1.0 - a);
                let mut total = 0.0;
                let mut lo = u0;
                for chunk in 0..12 {
                    let hi = lo + width;
                    let part = quad::integrate(
                        |u| match iterated_log(depth, u) {
                            Ok(il) => (-(1.0 - a) * u).exp() * il.powf(expo),
                            Err(_) => f64::NAN,
                        },
                        lo,
                        hi,
                        1e-12,
                        0.0,
                    )?;
                    total += part.value;
                    if part.value.abs() <= 1e-13 * total.abs() {
                        return Ok(total);
                    }
                    if chunk == 11 {
                        break;
                    }
                    lo = hi;
                }
                // Tail after 12 chunks is below e^{-440} of the head.
                Ok(total)
            }
            WeightLaw::Custom { name, .. } => {
                // ∫_0^y w(v) dv = ∫_{-∞}^{ln y} w(e^u) e^u du, in chunks of
                // width 40 descending until a chunk stops mattering.
                let mut total = 0.0;
                let mut hi = y.ln();
                let mut last = f64::INFINITY;
                for _ in 0..18 {
                    let lo = hi - 40.0;
                    let part = quad::integrate(
                        |u| {
                            let v = u.exp();
                            match self.w_of(v) {
                                Ok(w) => w * v,
                                Err(_) => f64::NAN,
                            }
                        },
                        lo,
                        hi,
                        1e-12,
                        0.0,
                    )?;
                    total += part.value;
                    if part.value.abs() <= 1e-13 * total.abs() {
                        return Ok(total);
                    }
                    if part.value > last {
                        return Err(Error::Numerical(format!(
                            "custom weight law '{name}' does not appear integrable at 0: \
                             chunk contributions grow toward the origin"
                        )));
                    }
                    last = part.value;
                    hi = lo;
                }
                Err(Error::Numerical(format!(
                    "custom weight law '{name}': primitive quadrature did not converge \
                     within 18 chunks"
                )))
            }
        }
    }

    /// W(Λ(t)).
    pub fn w_primitive_at(&self, t: f64) -> Result<f64> {
        self.w_primitive(self.shape.primitive(t)?)
    }

    /// Solve N w(Λ(t))^m = ξ by bisection on the decreasing map
    /// t ↦ ln(N w^m) - ln ξ.  Time tolerance 1e-14 T.
    pub fn t_xi(&self, xi: f64, zones: &ZoneParams) -> Result<ZoneBoundary> {
        self.boundary_at_level(xi, zones.n_zone)
    }

    /// Boundary of the doubled zone: 2N w(Λ(t))^m = ξ.  Lies above t_xi.
    pub fn t_xi_upper(&self, xi: f64, zones: &ZoneParams) -> Result<ZoneBoundary> {
        self.boundary_at_level(xi, 2.0 * zones.n_zone)
    }

    fn boundary_at_level(&self, xi: f64, level: f64) -> Result<ZoneBoundary> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::Input(format!("zone boundary needs a positive frequency, got {xi}")));
        }
        let t_end = self.t_end();
        let ln_level = level.ln();
        let ln_xi = xi.ln();
        let g = |t: f64| -> Result<f64> {
            Ok(ln_level + self.ln_w_m(self.shape.primitive(t)?)? - ln_xi)
        };
        let g_end = g(t_end)?;
        if g_end >= 0.0 {
            // Whole interval sits at or below the defining level.
            let y = self.shape.primitive(t_end)?;
            return Ok(ZoneBoundary {
                t: t_end,
                lambda_primitive: y,
                clamped: g_end > 0.0,
                residual: g_end.exp_m1(),
            });
        }
        let b = roots::bisect(g, 0.0, t_end, 1e-14 * t_end)?;
        let y = self.shape.primitive(b.root)?;
        Ok(ZoneBoundary {
            t: b.root,
            lambda_primitive: y,
            clamped: false,
            residual: b.residual.exp_m1(),
        })
    }

    /// Zone membership of (t, ξ).
    pub fn zone_of(&self, t: f64, xi: f64, zones: &ZoneParams) -> Result<Zone> {
        if xi <= zones.m_cut {
            return Ok(Zone::BelowCutoff);
        }
        let ln_level = self.ln_w_m(self.shape.primitive(t)?)? + zones.n_zone.ln();
        let ln_xi = xi.ln();
        Ok(if ln_xi <= ln_level {
            Zone::Pseudodifferential
        } else if ln_xi >= ln_level + std::f64::consts::LN_2 {
            Zone::Hyperbolic
        } else {
            Zone::Overlap2N
        })
    }

    /// λ(t)^m (w(Λ(t)))^{m(m-1)}, the product whose vanishing at 0 makes ρ
    /// continuous there.  Defined for t > 0; the t = 0 limit is probed by
    /// `degeneracy_limit_vanishes`.
    pub fn degeneracy_product(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!(
                "degeneracy product is a limit at t = 0; evaluate at t > 0, got {t}"
            )));
        }
        let mf = self.m as f64;
        let lam = self.shape.lambda(t)?;
        if !(lam > 0.0) {
            return Err(Error::Domain(format!("λ({t}) = {lam} is not positive")));
        }
        let y = self.shape.primitive(t)?;
        let ln_p = mf * lam.ln() + (mf - 1.0) * self.ln_w_m(y)?;
        Ok(ln_p.exp())
    }

    /// Empirical check that λ^m w^{m(m-1)} → 0 as t → 0: the product must be
    /// nonincreasing along t = T 10^{-k/4} and its log-log slope must be
    /// safely positive.  Slow decay (slope barely above 0) still passes; the
    /// slope floor guards against flat or growing products.
    ///
    /// Flat shapes drive λ below f64 range well before t does anything
    /// interesting; a product that underflows to 0 (or whose λ underflows
    /// first) counts as decayed, provided the representable prefix was
    /// already nonincreasing.
    pub fn degeneracy_limit_vanishes(&self) -> Result<bool> {
        let t_end = self.t_end();
        let mut ts = Vec::new();
        let mut ps = Vec::new();
        let mut hit_floor = false;
        for k in 8..=40 {
            let t = t_end * 10f64.powf(-(k as f64) / 4.0);
            match self.degeneracy_product(t) {
                Ok(p) if p == f64::INFINITY => return Ok(false),
                Ok(p) if p > 0.0 => {
                    ts.push(t);
                    ps.push(p);
                }
                // p = 0 or λ/Λ underflow: below representable range.
                _ => {
                    hit_floor = true;
                    break;
                }
            }
        }
        if ts.len() < 2 {
            return Err(Error::Numerical(format!(
                "degeneracy probe for {self:?} found fewer than 2 representable product values"
            )));
        }
        // ts is stored decreasing, so a product that shrinks toward t = 0
        // appears nonincreasing in storage order.
        let monotone = ps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
        if !monotone {
            return Ok(false);
        }
        if hit_floor {
            return Ok(true);
        }
        let line = fitting::log_log_fit(&ts, &ps)?;
        Ok(line.slope >= 1e-3)
    }

    /// ρ(t, ξ) = (1 + ξ λ^m (w(Λ))^{m(m-1)})^{1/m}.  At t = 0 the answer is
    /// 1 exactly when the degeneracy product vanishes in the limit; otherwise
    /// the symbol has no continuous extension and this errors.
    pub fn rho(&self, t: f64, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(Error::Input(format!("ρ needs a finite nonnegative frequency, got {xi}")));
        }
        if t == 0.0 {
            return if self.degeneracy_limit_vanishes()? {
                Ok(1.0)
            } else {
                Err(Error::Domain(format!(
                    "ρ(0, ξ) undefined for {self:?}: the degeneracy product λ^m w^{{m(m-1)}} \
                     does not vanish as t → 0"
                )))
            };
        }
        let mf = self.m as f64;
        let lam = self.shape.lambda(t)?;
        let y = self.shape.primitive(t)?;
        let ln_p = mf * lam.ln() + (mf - 1.0) * self.ln_w_m(y)?;
        let ln_arg = xi.ln() + ln_p;
        if ln_arg > 700.0 {
            return Ok((ln_arg / mf).exp());
        }
        Ok((1.0 + ln_arg.exp()).powf(1.0 / mf))
    }

    /// ∂_t ρ / ρ in closed form via the logarithmic derivatives of λ and w.
    pub fn rho_log_deriv(&self, t: f64, xi: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("ρ log-derivative needs t > 0, got {t}")));
        }
        let mf = self.m as f64;
        let lam = self.shape.lambda(t)?;
        let y = self.shape.primitive(t)?;
        let ln_p = mf * lam.ln() + (mf - 1.0) * self.ln_w_m(y)?;
        let ln_arg = xi.ln() + ln_p;
        // prefactor ξP/(1+ξP) computed stably from its log.
        let pref = if ln_arg > 700.0 { 1.0 } else { let e = ln_arg.exp(); e / (1.0 + e) };
        let bracket = mf * (self.shape.lambda_prime(t)? / lam)
            + mf * (mf - 1.0) * lam * self.w_log_deriv(y)?;
        Ok(pref * bracket / mf)
    }
}

/// Outcome of the floor/decay/integral audit of the weight family.
#[derive(Debug, Clone, Serialize)]
pub struct WeightBoundsRow {
    pub xi: f64,
    pub t_xi: f64,
    /// ξ^{1/m} ∫_0^{t_ξ} λ w^{m-1} dt over W(Λ(t_ξ)) w(Λ(t_ξ))^{m-1}.
    pub ratio_pd: f64,
    /// ∫_{t_ξ}^T λ w^m dt over the same denominator.
    pub ratio_hyp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightBoundsReport {
    /// min over the small-Λ grid of w^m(y) · y (claimed ≥ 1 for y ≤ 1e-2).
    pub floor_min: f64,
    pub floor_pass: bool,
    /// min over sampled t of -∂_t w (positivity of the decay).
    pub decay_min: f64,
    /// Worst relative disagreement between the finite-difference decay rate
    /// -∂_t w · mΛ/(λw) and its closed form; None for custom laws.
    pub decay_identity_mismatch: Option<f64>,
    pub decay_pass: bool,
    pub rows: Vec<WeightBoundsRow>,
    pub max_ratio_pd: f64,
    pub max_ratio_hyp: f64,
    /// Log-log trend of the two ratios across the ξ grid; bounded constants
    /// drift within the stated tolerance.
    pub ratio_pd_slope: f64,
    pub ratio_hyp_slope: f64,
    pub integrals_pass: bool,
    pub pass: bool,
}

/// Tolerance on the integral-ratio trend slopes.
pub const RATIO_SLOPE_TOL: f64 = 0.05;

/// Audit the weight inequalities on a log-spaced frequency grid.
///
/// The decay identity is checked for family laws only (custom laws have no
/// closed rate to compare against); positivity of -∂_t w is checked always.
pub fn verify_weight_bounds(
    lw: &LeviWeight,
    zones: &ZoneParams,
    xi_grid: &[f64],
) -> Result<WeightBoundsReport> {
    zones.validate()?;
    if xi_grid.len() < 4 {
        return Err(Error::Input("weight-bounds audit needs at least 4 frequencies".into()));
    }
    let mf = lw.m() as f64;

    // (floor) w^m(y) y >= 1 on y <= 1e-2.
    let mut floor_min = f64::INFINITY;
    for &y in &report::log_grid(1e-10, 1e-2, 50) {
        floor_min = floor_min.min((lw.ln_w_m(y)? + y.ln()).exp());
    }
    let floor_pass = floor_min >= 1.0 - 1e-12;

    // (decay) positivity of -∂_t w and the closed-form rate, sampled where
    // Λ(t) spans [1e-8, 1e-3].
    let mut decay_min = f64::INFINITY;
    let mut mismatch: Option<f64> = None;
    let t_lo = lw.shape().primitive_inverse(1e-8)?;
    let t_hi = lw.shape().primitive_inverse(1e-3)?;
    for &t in &report::log_grid(t_lo, t_hi, 20) {
        let h = t * 1e-5;
        let w_plus = lw.w_at(t + h)?;
        let w_minus = lw.w_at(t - h)?;
        let fd = -(w_plus - w_minus) / (2.0 * h);
        decay_min = decay_min.min(fd);
        if let WeightLaw::Family { .. } = lw.law() {
            let y = lw.shape().primitive(t)?;
            let lam = lw.shape().lambda(t)?;
            let w = lw.w_of(y)?;
            // closed rate: -∂_t w = -λ w (d/dy ln w).
            let closed = -lam * w * lw.w_log_deriv(y)?;
            let rel = (fd / closed - 1.0).abs();
            mismatch = Some(mismatch.unwrap_or(0.0).max(rel));
        }
    }
    let decay_pass = decay_min > 0.0 && mismatch.map_or(true, |v| v <= 1e-5);

    // (integrals) the two zone integrals against W(Λ(t_ξ)) w^{m-1}.
    let mut rows = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        if xi <= zones.m_cut {
            return Err(Error::Input(format!(
                "frequency {xi} at or below the cutoff {}",
                zones.m_cut
            )));
        }
        let b = lw.t_xi(xi, zones)?;
        let y_b = b.lambda_primitive;
        let denom = lw.w_primitive(y_b)? * ((mf - 1.0) * lw.ln_w_m(y_b)? / mf).exp();
        // ∫_0^{t_ξ} λ w^{m-1} dt in u = ln t; the integrand decays like a
        // positive power of t, so 45 log-units suffice.
        let u_hi = b.t.ln();
        let i_pd = quad::integrate(
            |u| {
                let t = u.exp();
                (|| -> Result<f64> {
                    let lam = lw.shape().lambda(t)?;
                    let y = lw.shape().primitive(t)?;
                    Ok(lam * ((mf - 1.0) * lw.ln_w_m(y)? / mf).exp() * t)
                })()
                .unwrap_or(f64::NAN)
            },
            u_hi - 45.0,
            u_hi,
            1e-11,
            0.0,
        )?;
        let i_hyp = if b.t < lw.t_end() {
            quad::integrate(
                |t| {
                    (|| -> Result<f64> {
                        let lam = lw.shape().lambda(t)?;
                        let y = lw.shape().primitive(t)?;
                        Ok(lam * lw.w_m_of(y)?)
                    })()
                    .unwrap_or(f64::NAN)
                },
                b.t,
                lw.t_end(),
                1e-11,
                0.0,
            )?
            .value
        } else {
            0.0
        };
        rows.push(WeightBoundsRow {
            xi,
            t_xi: b.t,
            ratio_pd: xi.powf(1.0 / mf) * i_pd.value / denom,
            ratio_hyp: i_hyp / denom,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.xi).collect();
    let pd: Vec<f64> = rows.iter().map(|r| r.ratio_pd).collect();
    let hyp: Vec<f64> = rows.iter().map(|r| r.ratio_hyp).collect();
    let pd_line = fitting::log_log_fit(&xs, &pd)?;
    let hyp_line = fitting::log_log_fit(&xs, &hyp)?;
    let max_ratio_pd = pd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_ratio_hyp = hyp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let integrals_pass = max_ratio_pd.is_finite()
        && max_ratio_hyp.is_finite()
        && pd_line.slope.abs() <= RATIO_SLOPE_TOL
        && hyp_line.slope.abs() <= RATIO_SLOPE_TOL;
    let pass = floor_pass && decay_pass && integrals_pass;
    Ok(WeightBoundsReport {
        floor_min,
        floor_pass,
        decay_min,
        decay_identity_mismatch: mismatch,
        decay_pass,
        rows,
        max_ratio_pd,
        max_ratio_hyp,
        ratio_pd_slope: pd_line.slope,
        ratio_hyp_slope: hyp_line.slope,
        integrals_pass,
        pass,
    })
}

/// Outcome of the ρ monotonicity/derivative audit on a (t, ξ) grid.
#[derive(Debug, Clone, Serialize)]
pub struct RhoReport {
    pub t_points: usize,
    pub xi_points: usize,
    pub min_rho: f64,
    /// min over the grid of the finite-difference ∂_t ρ / ρ.
    pub min_log_deriv: f64,
    /// max over the grid of (∂_t ρ / ρ) / (ξ λ^m (λ/Λ) w^{m(m-1)}).
    pub max_bound_factor: f64,
    pub monotone_pass: bool,
    pub bound_pass: bool,
    pub pass: bool,
}

/// Audit ρ ≥ 1, near-monotonicity ∂_t ρ ≥ -1e-12 ρ, and the derivative
/// bound ∂_t ρ/ρ ≤ (1+1e-6) ξ λ^m (λ/Λ) w^{m(m-1)}, all by central
/// differences (relative step 1e-6) so the audit does not reuse the closed
/// derivative formulas it is meant to test.
pub fn verify_rho_bounds(lw: &LeviWeight, t_grid: &[f64], xi_grid: &[f64]) -> Result<RhoReport> {
    let t_end = lw.t_end();
    let mf = lw.m() as f64;
    let mut min_rho = f64::INFINITY;
    let mut min_log_deriv = f64::INFINITY;
    let mut max_bound_factor = f64::NEG_INFINITY;
    for &t in t_grid {
        if !(t > 0.0 && t < t_end) {
            return Err(Error::Input(format!("ρ audit grid point {t} outside (0, T)")));
        }
        let h = (t * 1e-6).min((t_end - t) * 0.5);
        let lam = lw.shape().lambda(t)?;
        let y = lw.shape().primitive(t)?;
        let normalizer_base = (mf * lam.ln() + (mf - 1.0) * lw.ln_w_m(y)?).exp() * lam / y;
        for &xi in xi_grid {
            let r = lw.rho(t, xi)?;
            min_rho = min_rho.min(r);
            let fd = (lw.rho(t + h, xi)? - lw.rho(t - h, xi)?) / (2.0 * h);
            let ld = fd / r;
            min_log_deriv = min_log_deriv.min(ld);
            let normalizer = xi * normalizer_base;
            max_bound_factor = max_bound_factor.max(ld / normalizer);
        }
    }
    let monotone_pass = min_log_deriv >= -1e-12;
    let bound_pass = max_bound_factor <= 1.0 + 1e-6;
    Ok(RhoReport {
        t_points: t_grid.len(),
        xi_points: xi_grid.len(),
        min_rho,
        min_log_deriv,
        max_bound_factor,
        monotone_pass,
        bound_pass,
        pass: min_rho >= 1.0 && monotone_pass && bound_pass,
    })
}

/// Emit the per-frequency boundary table: xi, t_xi, Lambda_t_xi, w_at_t_xi,
/// W_at_t_xi, rho_boundary.  Rows follow the grid order; callers pass grids
/// ascending in ξ.
pub fn write_zone_table(
    lw: &LeviWeight,
    zones: &ZoneParams,
    xi_grid: &[f64],
    out: &mut dyn IoWrite,
) -> Result<()> {
    report::write_csv_header(
        out,
        &["xi", "t_xi", "Lambda_t_xi", "w_at_t_xi", "W_at_t_xi", "rho_boundary"],
    )?;
    for &xi in xi_grid {
        let b = lw.t_xi(xi, zones)?;
        let w = lw.w_of(b.lambda_primitive)?;
        let big_w = lw.w_primitive(b.lambda_primitive)?;
        let rho = lw.rho(b.t, xi)?;
        report::write_csv_row(out, &[xi, b.t, b.lambda_primitive, w, big_w, rho])?;
    }
    Ok(())
}
