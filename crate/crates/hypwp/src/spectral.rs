//! Fourier-mode laboratory for x-independent model operators
//!
//!     D_t^m u = Σ_{j+γ=m, j<m} λ(t)^{m-j} a_{m-j}(t) ξ^γ D_t^j u
//!             + Σ_{j+γ<m}      b_{m-j,γ}(t) ξ^γ D_t^j u
//!
//! with m ∈ {2, 3}.  One mode at a time: freeze ξ, rewrite in the energy
//! variables U_k = h^{m-1-k} D_t^k û where the scale h(t, ξ) blends ρ on the
//! pseudodifferential side with ξλ(t) on the hyperbolic side, integrate over
//! [0, T], and report the amplification sup_t ‖U(t)‖ / ‖U(0)‖.  Runs with
//! b ≡ 0 lose at most a fixed power of ξ; coefficients saturating the Levi
//! envelope inflate the loss to exp(c ξ^{1/s}-type) growth, and the measured
//! log-amplification is what the weight budget of `analysis` has to cover.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cutoff::{chi, chi_prime};
use crate::error::{Error, Result};
use crate::fitting;
use crate::leviweight::{LeviWeight, WeightLaw, ZoneParams};
use crate::mollify::{MollifierKernel, TimeCoefficient};
use crate::moduli::Modulus;
use crate::ode::{integrate_ode, zero_state, OdeOpts, State};
use crate::report::{write_csv_header, write_csv_row};
use crate::shape::{ShapeFunction, ShapeKind};

/// Time-dependent coefficient for the lower-order slots.  Complex scales are
/// allowed: the classical borderline drifts are imaginary.
#[derive(Clone, Debug)]
pub enum CoeffExpr {
    Constant(Complex64),
    /// scale * t^exponent, exponent >= 0.
    Power { scale: Complex64, exponent: f64 },
    /// Σ coeffs[i] t^i.
    Poly { coeffs: Vec<Complex64> },
    /// scale * λ(t)^lambda_pow * w(Λ(t))^w_pow: the largest modulus the Levi
    /// condition admits in a slot, up to the constant.  Evaluated in log
    /// space; λ(t) = 0 maps to 0, the limit whenever positive λ-powers win
    /// against the w blow-up (the degeneracy-decay regime; the construction
    /// audit reports the sampled envelope ratio, which diverges otherwise).
    LeviSaturating { scale: Complex64, lambda_pow: u32, w_pow: u32 },
}

impl CoeffExpr {
    pub fn eval(&self, lw: &LeviWeight, t: f64) -> Result<Complex64> {
        match self {
            CoeffExpr::Constant(c) => Ok(*c),
            CoeffExpr::Power { scale, exponent } => Ok(scale * t.powf(*exponent)),
            CoeffExpr::Poly { coeffs } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                Ok(acc)
            }
            CoeffExpr::LeviSaturating { scale, lambda_pow, w_pow } => {
                let lam = lw.shape().lambda(t)?;
                if lam == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let ln_w = lw.ln_w_m(lw.shape().primitive(t)?)? / lw.m() as f64;
                let e = *lambda_pow as f64 * lam.ln() + *w_pow as f64 * ln_w;
                if e > 700.0 {
                    return Err(Error::Numerical(format!(
                        "Levi-saturating coefficient overflows at t = {t} \
                         (log magnitude {e:.1})"
                    )));
                }
                Ok(scale * e.exp())
            }
        }
    }
}

/// λ^{m-j} a(t) ξ^{m-j} D_t^j with j = dt_order; the x-order is m - j.
#[derive(Clone)]
pub struct PrincipalTerm {
    pub dt_order: u32,
    pub coeff: TimeCoefficient,
}

impl fmt::Debug for PrincipalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrincipalTerm(j={}, coeff={})", self.dt_order, self.coeff.name())
    }
}

/// b(t) ξ^{dx_order} D_t^{dt_order} with dt_order + dx_order < m.
#[derive(Clone, Debug)]
pub struct LowerTerm {
    pub dt_order: u32,
    pub dx_order: u32,
    pub coeff: CoeffExpr,
}

/// Which side of the zone blend to use.  `Auto` evaluates χ; the overrides
/// pin it, which turns the energy norm into the pure hyperbolic (ξλ-weighted)
/// or pure pseudodifferential (ρ-weighted) one.  ForceHyperbolic with a shape
/// that vanishes at t = 0 weights the initial state by λ(0) = 0; it is meant
/// for non-degenerate sanity runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChiOverride {
    Auto,
    ForceHyperbolic,
    ForcePseudo,
}

#[derive(Clone, Debug)]
pub struct IntegrateOpts {
    /// Relative tolerance for the stepper; the absolute floor is derived
    /// from the initial state.
    pub tol: f64,
    pub chi_override: ChiOverride,
    /// Integrate [T*1e-12, T] in logarithmic time after a short linear lead.
    /// Pays off for shapes that are flat to all orders at the origin.
    pub log_time: bool,
    pub max_steps: u64,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        IntegrateOpts {
            tol: 1e-10,
            chi_override: ChiOverride::Auto,
            log_time: false,
            max_steps: 20_000_000,
        }
    }
}

impl IntegrateOpts {
    pub fn suggested(mp: &ModelProblem) -> Self {
        let log_time = matches!(mp.lw().shape().kind(), ShapeKind::ExponentialFlat { .. });
        IntegrateOpts { log_time, ..Default::default() }
    }
}

/// One integrated mode.  `times`/`norms` are subsampled to at most 2048
/// points; `amplification` is the sup over every accepted step (plus t = 0,
/// so it is >= 1 by construction).
#[derive(Clone, Debug, Serialize)]
pub struct ModeTrajectory {
    pub xi: f64,
    pub t_xi: Option<f64>,
    pub t_upper: Option<f64>,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub amplification: f64,
    pub log_amplification: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evaluations: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LossRow {
    pub xi: f64,
    pub t_xi: f64,
    pub log_amp: f64,
    pub m_weight: f64,
}

/// Amplification scan over a frequency grid, with two summary fits:
/// log_amp ≈ c (M + 1) through the origin (the consistency certificate; the
/// max ratio is the empirical constant), and log_amp ≈ c ξ^θ in log-log
/// coordinates when every log_amp is positive.
#[derive(Clone, Debug, Serialize)]
pub struct LossReport {
    pub rows: Vec<LossRow>,
    pub budget_slope: f64,
    pub budget_residual: f64,
    pub budget_max_ratio: f64,
    pub power_theta: Option<f64>,
    pub power_log_coeff: Option<f64>,
    pub power_residual: Option<f64>,
    pub tol: f64,
}

/// Diagnostic diagonalizer at one (t, ξ): rows are powers of ψ_k / h with
/// ψ_k = k ρ χ + τ_k (1 - χ), k = 1..m.  In the pseudodifferential zone the
/// nodes are the integers 1..m; on the hyperbolic side they are the rescaled
/// characteristic roots.  Only the condition number feeds back into any
/// judgement; the matrix itself is exposed for inspection.
#[derive(Clone, Debug, Serialize)]
pub struct Diagonalizer {
    pub dim: usize,
    /// Row-major, dim x dim.
    pub matrix: Vec<f64>,
    pub roots: Vec<f64>,
    pub blend: f64,
    pub condition: f64,
}

#[derive(Clone, Debug)]
pub struct ModelProblem {
    m: u32,
    principal: Vec<PrincipalTerm>,
    lower: Vec<LowerTerm>,
    lw: LeviWeight,
    zones: ZoneParams,
    mu: Modulus,
    kernel: MollifierKernel,
    hyperbolicity_margin: f64,
    levi_constants: Vec<f64>,
}

const HYP_SAMPLES: usize = 129;

impl ModelProblem {
    pub fn new(
        m: u32,
        principal: Vec<PrincipalTerm>,
        lower: Vec<LowerTerm>,
        lw: LeviWeight,
        zones: ZoneParams,
        mu: Modulus,
    ) -> Result<Self> {
        if m != 2 && m != 3 {
            return Err(Error::Input(format!("model order must be 2 or 3, got {m}")));
        }
        if m != lw.m() {
            return Err(Error::Input(format!(
                "model order {m} disagrees with the Levi weight order {}",
                lw.m()
            )));
        }
        zones.validate()?;
        if principal.is_empty() {
            return Err(Error::Input("a model needs at least one principal term".into()));
        }
        let t_end = lw.t_end();
        let mut seen = [false; 3];
        for p in &principal {
            if p.dt_order >= m {
                return Err(Error::Input(format!(
                    "principal term with dt_order {} has no room for an x-derivative",
                    p.dt_order
                )));
            }
            if seen[p.dt_order as usize] {
                return Err(Error::Input(format!(
                    "duplicate principal term at dt_order {}",
                    p.dt_order
                )));
            }
            seen[p.dt_order as usize] = true;
            if p.coeff.t_end() != t_end {
                return Err(Error::Input(format!(
                    "principal coefficient {} lives on [0, {}] but the shape on [0, {}]",
                    p.coeff.name(),
                    p.coeff.t_end(),
                    t_end
                )));
            }
        }
        for l in &lower {
            if l.dt_order + l.dx_order >= m {
                return Err(Error::Input(format!(
                    "lower term with dt_order {} and dx_order {} is not below order {m}",
                    l.dt_order, l.dx_order
                )));
            }
            match &l.coeff {
                CoeffExpr::Power { exponent, .. } => {
                    if !(*exponent >= 0.0) || !exponent.is_finite() {
                        return Err(Error::Input(format!(
                            "lower-term power exponent must be finite and >= 0, got {exponent}"
                        )));
                    }
                }
                CoeffExpr::Poly { coeffs } => {
                    if coeffs.is_empty() {
                        return Err(Error::Input("empty polynomial coefficient".into()));
                    }
                }
                _ => {}
            }
        }

        let mut mp = ModelProblem {
            m,
            principal,
            lower,
            lw,
            zones,
            mu,
            kernel: MollifierKernel::standard(),
            hyperbolicity_margin: 0.0,
            levi_constants: Vec::new(),
        };
        mp.hyperbolicity_margin = mp.audit_hyperbolicity()?;
        mp.levi_constants = mp.audit_levi()?;
        Ok(mp)
    }

    /// Roots of z^m = Σ a_{m-j}(t) z^j must be real and separated for every
    /// sampled t; λ and ξ factor out of the principal part entirely, so this
    /// is exactly strict hyperbolicity of the non-degenerate core.  Returns
    /// the worst normalized root separation.
    fn audit_hyperbolicity(&self) -> Result<f64> {
        let t_end = self.lw.t_end();
        let mut margin = f64::INFINITY;
        for i in 0..HYP_SAMPLES {
            let t = t_end * i as f64 / (HYP_SAMPLES - 1) as f64;
            let a = self.principal_values(t, false, 0.0)?;
            let roots = normalized_char_roots(self.m, &a).map_err(|e| {
                Error::Input(format!("model operator is not strictly hyperbolic at t = {t}: {e}"))
            })?;
            let scale = 1.0 + roots.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            let mut sep = f64::INFINITY;
            for i in 0..roots.len() {
                for j in i + 1..roots.len() {
                    sep = sep.min((roots[i] - roots[j]).abs());
                }
            }
            if !(sep / scale > 1e-9) {
                return Err(Error::Input(format!(
                    "model operator is not strictly hyperbolic at t = {t}: \
                     root separation {sep:.3e} vanishes"
                )));
            }
            margin = margin.min(sep / scale);
        }
        Ok(margin)
    }

    /// Sampled sup of |b| / (λ^{m-j} w^{m(m-j-γ)}) per lower term.  Infinite
    /// entries mean the coefficient genuinely escapes the Levi envelope;
    /// they are recorded, not rejected.
    fn audit_levi(&self) -> Result<Vec<f64>> {
        let t_end = self.lw.t_end();
        let mut consts = Vec::with_capacity(self.lower.len());
        for l in &self.lower {
            let lam_pow = (self.m - l.dt_order) as f64;
            let wm_pow = (self.m - l.dt_order - l.dx_order) as f64;
            let mut c = 0.0f64;
            for k in 0..=28 {
                let t = t_end * 10f64.powf(-(k as f64) / 2.0);
                let b = l.coeff.eval(&self.lw, t)?.norm();
                if b == 0.0 {
                    continue;
                }
                let lam = self.lw.shape().lambda(t)?;
                let ln_env =
                    lam_pow * lam.ln() + wm_pow * self.lw.ln_w_m(self.lw.shape().primitive(t)?)?;
                c = c.max((b.ln() - ln_env).exp());
            }
            consts.push(c);
        }
        Ok(consts)
    }

    /// The classical borderline family D_t^2 u = t^{2l} ξ^2 u - i t^k ξ u
    /// (Ivrii's example): the drift t^k D_x saturates the Levi condition for
    /// the weight index s = (2l - k)/(l - 1 - k).
    pub fn ivrii(l: u32, k: u32, t_end: f64) -> Result<ModelProblem> {
        if k + 1 >= l {
            return Err(Error::Input(format!(
                "the drift order must satisfy k < l - 1, got l = {l}, k = {k}"
            )));
        }
        let s = (2 * l - k) as f64 / (l - 1 - k) as f64;
        let shape = ShapeFunction::monomial(l as f64, t_end)?;
        let lw = LeviWeight::new(shape, 2, WeightLaw::Family { s, m_tilde: 0, beta_tilde: 0.0 })?;
        ModelProblem::new(
            2,
            vec![PrincipalTerm { dt_order: 0, coeff: TimeCoefficient::constant(1.0, t_end)? }],
            vec![LowerTerm {
                dt_order: 0,
                dx_order: 1,
                coeff: CoeffExpr::Power {
                    scale: Complex64::new(0.0, -1.0),
                    exponent: k as f64,
                },
            }],
            lw,
            ZoneParams::default(),
            Modulus::Lipschitz,
        )
    }

    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn lw(&self) -> &LeviWeight {
        &self.lw
    }
    pub fn zones(&self) -> &ZoneParams {
        &self.zones
    }
    pub fn modulus(&self) -> &Modulus {
        &self.mu
    }
    pub fn t_end(&self) -> f64 {
        self.lw.t_end()
    }
    pub fn hyperbolicity_margin(&self) -> f64 {
        self.hyperbolicity_margin
    }
    pub fn levi_constants(&self) -> &[f64] {
        &self.levi_constants
    }
    pub fn principal(&self) -> &[PrincipalTerm] {
        &self.principal
    }
    pub fn lower(&self) -> &[LowerTerm] {
        &self.lower
    }

    /// a_{m-j}(t) (or its ε-mollification) indexed by dt_order; absent slots
    /// are zero.
    fn principal_values(&self, t: f64, mollified: bool, eps: f64) -> Result<[f64; 3]> {
        let mut a = [0.0f64; 3];
        for p in &self.principal {
            a[p.dt_order as usize] = if mollified {
                p.coeff.mollified(&self.kernel, t, eps)?
            } else {
                p.coeff.value(t)
            };
        }
        Ok(a)
    }

    /// Mollification width for the regularized coefficients: 1/|ξ| capped at
    /// the horizon so the kernel always fits into the reflected domain.
    fn moll_eps(&self, xa: f64) -> f64 {
        (1.0 / xa).min(self.t_end())
    }

    /// χ(|ξ| / (N w^m(Λ(t)))).  1 in the pseudodifferential zone (including
    /// all of [0, T] for low frequencies), 0 deep in the hyperbolic zone.
    pub fn blend(&self, t: f64, xi: f64, ovr: ChiOverride) -> Result<f64> {
        match ovr {
            ChiOverride::ForceHyperbolic => Ok(0.0),
            ChiOverride::ForcePseudo => Ok(1.0),
            ChiOverride::Auto => {
                let xa = xi.abs();
                if xa == 0.0 {
                    return Ok(1.0);
                }
                let y = self.lw.shape().primitive(t)?;
                let ln_r = xa.ln() - self.zones.n_zone.ln() - self.lw.ln_w_m(y)?;
                Ok(chi(ln_r.exp()))
            }
        }
    }

    /// h = χ ρ + (1 - χ) |ξ| λ.  Equals 1 at t = 0 and exactly |ξ| λ(t) once
    /// χ has dropped to zero.
    pub fn h_symbol(&self, t: f64, xi: f64, ovr: ChiOverride) -> Result<f64> {
        let xa = xi.abs();
        let chi = self.blend(t, xi, ovr)?;
        let hyp = if chi < 1.0 { xa * self.lw.shape().lambda(t)? } else { 0.0 };
        let pd = if chi > 0.0 { self.lw.rho(t, xa)? } else { 0.0 };
        Ok(chi * pd + (1.0 - chi) * hyp)
    }

    /// ∂_t h.  Refuses t = 0: when the degeneracy product vanishes, ∂_t ρ
    /// blows up like a negative power at the origin (integrable, but not a
    /// number this can return).
    pub fn h_time_deriv(&self, t: f64, xi: f64, ovr: ChiOverride) -> Result<f64> {
        let xa = xi.abs();
        if ovr == ChiOverride::ForceHyperbolic {
            return Ok(xa * self.lw.shape().lambda_prime(t)?);
        }
        if t == 0.0 {
            return Err(Error::Domain(
                "∂_t h is singular at the origin; evaluate at t > 0".into(),
            ));
        }
        let drho = |s: &Self| -> Result<f64> {
            Ok(s.lw.rho(t, xa)? * s.lw.rho_log_deriv(t, xa)?)
        };
        if ovr == ChiOverride::ForcePseudo {
            return drho(self);
        }
        let chi = self.blend(t, xi, ChiOverride::Auto)?;
        let lam = self.lw.shape().lambda(t)?;
        let mut out = 0.0;
        if chi > 0.0 {
            out += chi * drho(self)?;
        }
        if chi < 1.0 {
            out += (1.0 - chi) * xa * self.lw.shape().lambda_prime(t)?;
        }
        if chi > 0.0 && chi < 1.0 {
            // dχ/dt = χ'(r) r d(ln r)/dt with d(ln r)/dt = -m (ln w)'(Λ) λ.
            let y = self.lw.shape().primitive(t)?;
            let r = (xa.ln() - self.zones.n_zone.ln() - self.lw.ln_w_m(y)?).exp();
            let dlnr = -(self.m as f64) * self.lw.w_log_deriv(y)? * lam;
            out += chi_prime(r) * r * dlnr * (self.lw.rho(t, xa)? - xa * lam);
        }
        Ok(out)
    }

    /// Roots of τ^m = Σ_j λ^{m-j} a_{m-j}(t) ξ^{m-j} τ^j, ascending.  With
    /// `regularized` the a's are mollified at width min(1/|ξ|, T).  All m
    /// roots collapse to zero where λξ does; elsewhere they inherit the
    /// separation of the strictly hyperbolic core.
    pub fn char_roots(&self, t: f64, xi: f64, regularized: bool) -> Result<Vec<f64>> {
        let md = self.m as usize;
        let lam = self.lw.shape().lambda(t)?;
        let scale = lam * xi;
        if scale == 0.0 {
            return Ok(vec![0.0; md]);
        }
        let a = if regularized {
            self.principal_values(t, true, self.moll_eps(xi.abs()))?
        } else {
            self.principal_values(t, false, 0.0)?
        };
        let z = normalized_char_roots(self.m, &a).map_err(|e| {
            Error::Numerical(format!("characteristic roots at t = {t}, xi = {xi}: {e}"))
        })?;
        let mut roots: Vec<f64> = z.iter().map(|zk| zk * scale).collect();
        roots.sort_by(|p, q| p.partial_cmp(q).unwrap());
        for k in 1..roots.len() {
            if roots[k] == roots[k - 1] {
                return Err(Error::Numerical(format!(
                    "characteristic roots at t = {t}, xi = {xi} are not distinct"
                )));
            }
        }
        Ok(roots)
    }

    /// See [`Diagonalizer`].  Roots are regularized wherever the hyperbolic
    /// side participates.
    pub fn diagonalizer(&self, t: f64, xi: f64) -> Result<Diagonalizer> {
        let md = self.m as usize;
        let chi = self.blend(t, xi, ChiOverride::Auto)?;
        let h = self.h_symbol(t, xi, ChiOverride::Auto)?;
        if h == 0.0 {
            return Err(Error::Numerical(format!(
                "energy scale h vanishes at t = {t}, xi = {xi}"
            )));
        }
        let roots = if chi < 1.0 && xi != 0.0 {
            self.char_roots(t, xi, true)?
        } else {
            vec![0.0; md]
        };
        let rho = if chi > 0.0 { self.lw.rho(t, xi.abs())? } else { 0.0 };
        let mut matrix = vec![0.0f64; md * md];
        for k in 0..md {
            let psi = (k + 1) as f64 * rho * chi + roots[k] * (1.0 - chi);
            let node = psi / h;
            let mut p = 1.0;
            for j in 0..md {
                matrix[k * md + j] = p;
                p *= node;
            }
        }
        let condition = condition_number(&matrix, md)?;
        Ok(Diagonalizer { dim: md, matrix, roots, blend: chi, condition })
    }

    /// The split first-order system D_t U = (A + B) U in the energy
    /// variables.  Row-major m x m pair (A, B):
    ///
    ///   A[k][k+1] = h, last row j : (χ a_j + (1-χ) a_{ε,j}) λ^{m-j} ξ^{m-j} / h^{m-1-j}
    ///   B[k][k]   = -i (m-1-k) ∂_t h / h,
    ///   B last row j : (Σ_γ b_{m-j,γ} ξ^γ + (1-χ)(a_j - a_{ε,j}) λ^{m-j} ξ^{m-j}) / h^{m-1-j}
    ///
    /// The split is exact bookkeeping: the mollified pieces cancel in A + B,
    /// which equals the companion matrix of the original mode equation
    /// conjugated by diag(h^{m-1-k}) plus the log-derivative diagonal.  A is
    /// the part the diagonalizer controls; B is what the Levi and modulus
    /// budgets have to absorb.
    pub fn first_order_system(&self, t: f64, xi: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let md = self.m as usize;
        let chi = self.blend(t, xi, ChiOverride::Auto)?;
        let h = self.h_symbol(t, xi, ChiOverride::Auto)?;
        let dh = self.h_time_deriv(t, xi, ChiOverride::Auto)?;
        if h == 0.0 {
            return Err(Error::Numerical(format!(
                "energy scale h vanishes at t = {t}, xi = {xi}"
            )));
        }
        let lam = self.lw.shape().lambda(t)?;
        let a_plain = self.principal_values(t, false, 0.0)?;
        let a_moll = if chi < 1.0 && xi != 0.0 {
            self.principal_values(t, true, self.moll_eps(xi.abs()))?
        } else {
            a_plain
        };

        let zero = Complex64::new(0.0, 0.0);
        let mut a_mat = vec![zero; md * md];
        let mut b_mat = vec![zero; md * md];
        for k in 0..md - 1 {
            a_mat[k * md + k + 1] = Complex64::new(h, 0.0);
            b_mat[k * md + k] = Complex64::new(0.0, -((md - 1 - k) as f64) * dh / h);
        }
        let last = (md - 1) * md;
        for j in 0..md {
            let hw = h.powi((md - 1 - j) as i32);
            let pj = lam.powi((self.m - j as u32) as i32) * xi.powi((self.m - j as u32) as i32);
            a_mat[last + j] =
                Complex64::new((chi * a_plain[j] + (1.0 - chi) * a_moll[j]) * pj / hw, 0.0);
            let mut b = Complex64::new((1.0 - chi) * (a_plain[j] - a_moll[j]) * pj, 0.0);
            for l in &self.lower {
                if l.dt_order as usize == j {
                    b += l.coeff.eval(&self.lw, t)? * xi.powi(l.dx_order as i32);
                }
            }
            b_mat[last + j] = b / hw;
        }
        Ok((a_mat, b_mat))
    }

    /// Integrate one mode over [0, T] and record ‖U(t)‖.  Internally this
    /// runs the companion variables V = (û, D_t û, ...), whose coefficients
    /// are continuous on all of [0, T], and applies the h-weights in the
    /// observer; by the cancellation noted at [`Self::first_order_system`]
    /// that is the same trajectory, without evaluating the integrable
    /// singularity of ∂_t h / h at the origin.  Zone boundaries are forced
    /// stepping points.
    pub fn integrate_mode(
        &self,
        xi: f64,
        initial: &[Complex64],
        opts: &IntegrateOpts,
    ) -> Result<ModeTrajectory> {
        let md = self.m as usize;
        if initial.len() != md {
            return Err(Error::Input(format!(
                "initial data has {} components, the system {md}",
                initial.len()
            )));
        }
        if !(opts.tol > 0.0 && opts.tol <= 1e-2) {
            return Err(Error::Input(format!(
                "mode tolerance must lie in (0, 1e-2], got {}",
                opts.tol
            )));
        }
        let n_plain = initial.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n_plain > 0.0) || !n_plain.is_finite() {
            return Err(Error::Input("initial data must be finite and nonzero".into()));
        }
        let t_end = self.t_end();
        let xa = xi.abs();

        let mut t_xi = None;
        let mut t_upper = None;
        let mut forced: Vec<f64> = Vec::new();
        if xa > self.zones.m_cut {
            let b = self.lw.t_xi(xa, &self.zones)?;
            t_xi = Some(b.t);
            if !b.clamped {
                forced.push(b.t);
            }
            let u = self.lw.t_xi_upper(xa, &self.zones)?;
            t_upper = Some(u.t);
            if !u.clamped {
                forced.push(u.t);
            }
        }

        // Weighted norm of the companion state; NaN on evaluation trouble,
        // caught by the finiteness check at the end.
        let ovr = opts.chi_override;
        let norm_u = |t: f64, v: &State| -> f64 {
            match self.h_symbol(t, xi, ovr) {
                Ok(h) => {
                    let mut s = 0.0;
                    for k in 0..md {
                        let w = h.powi((md - 1 - k) as i32);
                        s += (w * w) * v[k].norm_sqr();
                    }
                    s.sqrt()
                }
                Err(_) => f64::NAN,
            }
        };

        let mut y0 = zero_state();
        y0[..md].copy_from_slice(initial);
        let n0 = norm_u(0.0, &y0);
        if !(n0 > 0.0) || !n0.is_finite() {
            return Err(Error::Input(
                "initial data is invisible in the weighted norm at t = 0 \
                 (degenerate h under the chosen override)"
                    .into(),
            ));
        }

        // Companion right-hand side, ∂_t V = i C(t) V.
        struct PTerm<'a> {
            j: usize,
            lam_pow: i32,
            xi_pow: f64,
            coeff: &'a TimeCoefficient,
        }
        let pterms: Vec<PTerm> = self
            .principal
            .iter()
            .map(|p| PTerm {
                j: p.dt_order as usize,
                lam_pow: (self.m - p.dt_order) as i32,
                xi_pow: xi.powi((self.m - p.dt_order) as i32),
                coeff: &p.coeff,
            })
            .collect();
        let lterms: Vec<(usize, f64, &CoeffExpr)> = self
            .lower
            .iter()
            .map(|l| (l.dt_order as usize, xi.powi(l.dx_order as i32), &l.coeff))
            .collect();
        let i_unit = Complex64::new(0.0, 1.0);
        let lw = &self.lw;
        let mut rhs = move |t: f64, y: &State, out: &mut State| -> Result<()> {
            let lam = lw.shape().lambda(t)?;
            for k in 0..md - 1 {
                out[k] = i_unit * y[k + 1];
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for p in &pterms {
                acc += y[p.j] * (p.coeff.value(t) * lam.powi(p.lam_pow) * p.xi_pow);
            }
            for (j, xp, c) in &lterms {
                acc += y[*j] * (c.eval(lw, t)? * *xp);
            }
            out[md - 1] = i_unit * acc;
            for k in md..out.len() {
                out[k] = Complex64::new(0.0, 0.0);
            }
            Ok(())
        };

        // Trajectory recorder: running sup over every accepted point, plus a
        // stride-doubling subsample capped at 2048 stored points.
        let mut times: Vec<f64> = Vec::new();
        let mut norms: Vec<f64> = Vec::new();
        let mut stride: usize = 1;
        let mut seen: usize = 0;
        let mut sup = 0.0f64;
        let mut last: (f64, f64) = (0.0, 0.0);
        let mut record = |t: f64, n: f64| {
            sup = sup.max(n);
            last = (t, n);
            if seen % stride == 0 {
                times.push(t);
                norms.push(n);
                if times.len() == 2048 {
                    let mut i = 0;
                    times.retain(|_| {
                        i += 1;
                        (i - 1) % 2 == 0
                    });
                    let mut i = 0;
                    norms.retain(|_| {
                        i += 1;
                        (i - 1) % 2 == 0
                    });
                    stride *= 2;
                }
            }
            seen += 1;
        };
        record(0.0, n0);
        let mut observer = |t: f64, v: &State| record(t, norm_u(t, v));

        let segments: Vec<(f64, f64, bool)> = if opts.log_time {
            let t_break = t_end * 1e-12;
            vec![(0.0, t_break, false), (t_break, t_end, true)]
        } else {
            vec![(0.0, t_end, false)]
        };
        let mut y = y0;
        let mut accepted = 0;
        let mut rejected = 0;
        let mut evals = 0;
        for (lo, hi, log_time) in segments {
            let seg_forced: Vec<f64> =
                forced.iter().copied().filter(|&f| f > lo && f < hi).collect();
            let ode_opts = OdeOpts {
                rel_tol: opts.tol,
                abs_tol: opts.tol * 1e-2 * n_plain,
                max_steps: opts.max_steps,
                log_time,
            };
            let (y_end, stats) = integrate_ode(
                md,
                &mut rhs,
                lo,
                hi,
                y,
                &seg_forced,
                &ode_opts,
                Some(&mut observer),
            )?;
            y = y_end;
            accepted += stats.accepted;
            rejected += stats.rejected;
            evals += stats.rhs_evaluations;
        }
        drop(observer);
        if times.last().copied() != Some(last.0) {
            times.push(last.0);
            norms.push(last.1);
        }

        if !sup.is_finite() {
            return Err(Error::Numerical(format!(
                "mode xi = {xi} produced non-finite energy norms"
            )));
        }
        let amplification = sup / n0;
        Ok(ModeTrajectory {
            xi,
            t_xi,
            t_upper,
            times,
            norms,
            amplification,
            log_amplification: amplification.ln(),
            accepted_steps: accepted,
            rejected_steps: rejected,
            rhs_evaluations: evals,
        })
    }

    /// The loss budget the weight calculus assigns to frequency ξ:
    /// W(Λ(t_ξ)) w^{m-1}(Λ(t_ξ)) + φ(ξ).
    pub fn mode_weight(&self, xi: f64) -> Result<f64> {
        let xa = xi.abs();
        if !(xa > self.zones.m_cut) {
            return Err(Error::Input(format!(
                "mode weight is defined above the cutoff {}, got |xi| = {xa}",
                self.zones.m_cut
            )));
        }
        let b = self.lw.t_xi(xa, &self.zones)?;
        let y = b.lambda_primitive;
        let levi = self.lw.w_primitive(y)? * self.lw.w_of(y)?.powi(self.m as i32 - 1);
        Ok(levi + self.mu.phi(xa)?)
    }

    /// Amplification scan.  Modes are independent; they run in parallel and
    /// are reduced in grid order, so the report is identical bytes no matter
    /// how many workers participate.
    pub fn measure_loss(&self, xi_grid: &[f64], opts: &IntegrateOpts) -> Result<LossReport> {
        if xi_grid.len() < 2 {
            return Err(Error::Input(format!(
                "a loss scan needs at least 2 frequencies, got {}",
                xi_grid.len()
            )));
        }
        let mut grid = xi_grid.to_vec();
        for &x in &grid {
            if !x.is_finite() || !(x > self.zones.m_cut) {
                return Err(Error::Input(format!(
                    "scan frequencies must exceed the cutoff {}, got {x}",
                    self.zones.m_cut
                )));
            }
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();

        let md = self.m as usize;
        let amp0 = 1.0 / (md as f64).sqrt();
        let initial = vec![Complex64::new(amp0, 0.0); md];
        let rows: Vec<LossRow> = grid
            .par_iter()
            .map(|&xi| -> Result<LossRow> {
                let traj = self.integrate_mode(xi, &initial, opts)?;
                Ok(LossRow {
                    xi,
                    t_xi: traj.t_xi.unwrap_or(self.t_end()),
                    log_amp: traj.log_amplification,
                    m_weight: self.mode_weight(xi)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let budget: Vec<f64> = rows.iter().map(|r| r.m_weight + 1.0).collect();
        let amps: Vec<f64> = rows.iter().map(|r| r.log_amp).collect();
        let (budget_slope, budget_residual) = fitting::fit_through_origin(&budget, &amps)?;
        let budget_max_ratio = rows
            .iter()
            .map(|r| r.log_amp / (r.m_weight + 1.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut power_theta, mut power_log_coeff, mut power_residual) = (None, None, None);
        if amps.iter().all(|&v| v > 0.0) {
            let xs: Vec<f64> = rows.iter().map(|r| r.xi).collect();
            if let Ok(line) = fitting::log_log_fit(&xs, &amps) {
                power_theta = Some(line.slope);
                power_log_coeff = Some(line.intercept);
                power_residual = Some(line.residual_rms);
            }
        }
        Ok(LossReport {
            rows,
            budget_slope,
            budget_residual,
            budget_max_ratio,
            power_theta,
            power_log_coeff,
            power_residual,
            tol: opts.tol,
        })
    }
}

pub fn write_loss_table(w: &mut dyn Write, rep: &LossReport) -> Result<()> {
    write_csv_header(w, &["xi", "t_xi", "log_amp", "M_weight"])?;
    for r in &rep.rows {
        write_csv_row(w, &[r.xi, r.t_xi, r.log_amp, r.m_weight])?;
    }
    Ok(())
}

/// Roots z of z^m = Σ a[j] z^j for the λξ-normalized characteristic
/// polynomial.  Unsorted; errors if any root leaves the real axis.
fn normalized_char_roots(m: u32, a: &[f64; 3]) -> Result<Vec<f64>> {
    match m {
        2 => {
            let disc = a[1] * a[1] + 4.0 * a[0];
            if disc < 0.0 {
                return Err(Error::Numerical(format!("discriminant {disc:.6e} is negative")));
            }
            let rt = disc.sqrt();
            Ok(vec![(a[1] - rt) / 2.0, (a[1] + rt) / 2.0])
        }
        3 => {
            let r = cubic_real_roots(-a[2], -a[1], -a[0])?;
            Ok(r.to_vec())
        }
        _ => Err(Error::Input(format!("unsupported order {m}"))),
    }
}

/// Real roots of z^3 + b2 z^2 + b1 z + b0, multiplicities allowed.  Errors
/// when the discriminant certifies a complex pair.  Trigonometric form on
/// the depressed cubic, then two Newton steps per root against the original
/// coefficients.
fn cubic_real_roots(b2: f64, b1: f64, b0: f64) -> Result<[f64; 3]> {
    let p = b1 - b2 * b2 / 3.0;
    let q = b0 - b1 * b2 / 3.0 + 2.0 * b2 * b2 * b2 / 27.0;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    let scale = 4.0 * (p * p * p).abs() + 27.0 * q * q + 1e-300;
    if disc < -1e-9 * scale {
        return Err(Error::Numerical(format!(
            "cubic discriminant {disc:.6e} certifies a complex pair"
        )));
    }
    let shift = -b2 / 3.0;
    let mut roots = if p >= 0.0 {
        // Only reachable with p and q both at roundoff level: a (near-)triple
        // root at the shift point.
        let y = (-q).cbrt();
        [shift + y, shift + y, shift + y]
    } else {
        let amp = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * amp)).clamp(-1.0, 1.0);
        let phi = arg.acos();
        let mut r = [0.0f64; 3];
        for (k, slot) in r.iter_mut().enumerate() {
            *slot = shift + amp * (phi / 3.0 - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
        }
        r
    };
    for z in roots.iter_mut() {
        for _ in 0..2 {
            let f = ((*z + b2) * *z + b1) * *z + b0;
            let fp = (3.0 * *z + 2.0 * b2) * *z + b1;
            if fp != 0.0 && f.is_finite() && fp.is_finite() {
                *z -= f / fp;
            }
        }
    }
    Ok(roots)
}

/// Spectral condition number of a real dim x dim matrix (dim <= 3), via the
/// eigenvalues of MᵀM; those come from the same closed-form solvers the
/// characteristic roots use, so the library needs no linear-algebra crate.
fn condition_number(matrix: &[f64], dim: usize) -> Result<f64> {
    let mut g = [0.0f64; 9];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = 0.0;
            for k in 0..dim {
                s += matrix[k * dim + i] * matrix[k * dim + j];
            }
            g[i * dim + j] = s;
        }
    }
    let eig: Vec<f64> = match dim {
        1 => vec![g[0]],
        2 => {
            let (a, b, c) = (g[0], g[1], g[3]);
            let mid = (a + c) / 2.0;
            let rad = ((a - c) * (a - c) / 4.0 + b * b).sqrt();
            vec![mid - rad, mid + rad]
        }
        3 => {
            let tr = g[0] + g[4] + g[8];
            let m2 = g[0] * g[4] - g[1] * g[3] + g[0] * g[8] - g[2] * g[6] + g[4] * g[8]
                - g[5] * g[7];
            let det = g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6])
                + g[2] * (g[3] * g[7] - g[4] * g[6]);
            cubic_real_roots(-tr, m2, -det)?.to_vec()
        }
        _ => return Err(Error::Input(format!("unsupported dimension {dim}"))),
    };
    let smax = eig.iter().fold(0.0f64, |m, &e| m.max(e));
    let smin = eig.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    if !(smin > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok((smax / smin).sqrt())
}
