//! The total loss-of-derivatives weight, dominance between its two addends,
//! admissibility of a candidate growth function η, and the resulting
//! well-posedness classification.
//!
//! The total weight is
//!
//!   M(ξ) = W(Λ(t_ξ)) (w(Λ(t_ξ)))^{m-1} + φ(ξ),
//!
//! one addend from the Levi weight through the zone boundary, one from the
//! modulus of continuity of the coefficients.  A solution-space weight η is
//! usable when M grows strictly slower (global result) or at most
//! comparably (local result), when η and M are subadditive in frequency,
//! when their logarithmic derivatives are bounded, and when the Cauchy-data
//! weight sequence decays against δ0 η.  Each of those clauses is checked
//! empirically here; none is proved.
//!
//! Little-o is operationalized as "the ratio M/η is strictly decreasing and
//! loses at least a factor 2 across the grid", which needs >= 4 decades of
//! frequencies to be meaningful.  Big-O is a trend bound on the same ratio.
//! Reports carry the full series so borderline cases can be audited.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::fitting;
use crate::leviweight::{LeviWeight, WeightLaw, ZoneParams};
use crate::moduli::{self, Modulus, WeightSequence};
use crate::report::log_grid;
use crate::shape::{self, ScalarFn};

/// Candidate growth function η for the solution-space weight e^{δ η(ξ)}.
#[derive(Clone)]
pub enum WeightKind {
    /// η = ξ^θ, θ in (0, 1].
    Power { theta: f64 },
    /// η = ξ^θ (log ξ)^{-κ}, κ > 0.
    PowerOverLog { theta: f64, kappa: f64 },
    /// η = c (ξ / (c log ξ))^{1/s} log(ξ / (c log ξ)) with c = (s-1)/s: the
    /// exact growth of the log-refined weight family, kept as a named
    /// candidate so measured weights can be fitted against it.
    PowerLogRefined { s: f64 },
    Custom { f: ScalarFn, name: String },
}

#[derive(Clone)]
pub struct WeightFunction {
    pub kind: WeightKind,
    /// Decay rate the data weight sequence must realize against η.
    pub delta0: f64,
    /// Rate budget of the conjugation step; the usable δ is below
    /// min(delta0, delta1).  Carried for reporting.
    pub delta1: f64,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match &self.kind {
            WeightKind::Power { theta } => format!("Power(theta={theta})"),
            WeightKind::PowerOverLog { theta, kappa } => {
                format!("PowerOverLog(theta={theta}, kappa={kappa})")
            }
            WeightKind::PowerLogRefined { s } => format!("PowerLogRefined(s={s})"),
            WeightKind::Custom { name, .. } => format!("Custom({name})"),
        };
        write!(f, "WeightFunction::{k} [delta0={}, delta1={}]", self.delta0, self.delta1)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKindDoc {
    Power { theta: f64 },
    PowerOverLog { theta: f64, kappa: f64 },
    PowerLogRefined { s: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightFunctionDoc {
    #[serde(flatten)]
    pub kind: WeightKindDoc,
    #[serde(default = "one")]
    pub delta0: f64,
    #[serde(default = "one")]
    pub delta1: f64,
}

fn one() -> f64 {
    1.0
}

impl WeightFunction {
    pub fn power(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::Input(format!("power weight needs theta in (0,1], got {theta}")));
        }
        Ok(WeightFunction { kind: WeightKind::Power { theta }, delta0: 1.0, delta1: 1.0 })
    }

    pub fn power_over_log(theta: f64, kappa: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) || !(kappa > 0.0) {
            return Err(Error::Input(format!(
                "log-damped power weight needs theta in (0,1] and kappa > 0, got ({theta}, {kappa})"
            )));
        }
        Ok(WeightFunction {
            kind: WeightKind::PowerOverLog { theta, kappa },
            delta0: 1.0,
            delta1: 1.0,
        })
    }

    pub fn power_log_refined(s: f64) -> Result<Self> {
        if !(s > 1.0) || !s.is_finite() {
            return Err(Error::Input(format!("log-refined weight needs s > 1, got {s}")));
        }
        Ok(WeightFunction { kind: WeightKind::PowerLogRefined { s }, delta0: 1.0, delta1: 1.0 })
    }

    pub fn custom(name: &str, f: ScalarFn) -> Self {
        WeightFunction {
            kind: WeightKind::Custom { f, name: name.to_string() },
            delta0: 1.0,
            delta1: 1.0,
        }
    }

    pub fn with_rates(mut self, delta0: f64, delta1: f64) -> Result<Self> {
        if !(delta0 > 0.0 && delta1 > 0.0) {
            return Err(Error::Input(format!(
                "rates must be positive, got ({delta0}, {delta1})"
            )));
        }
        self.delta0 = delta0;
        self.delta1 = delta1;
        self
        .validate()
    }

    fn validate(self) -> Result<Self> {
        Ok(self)
    }

    pub fn from_doc(doc: &WeightFunctionDoc) -> Result<Self> {
        let base = match doc.kind {
            WeightKindDoc::Power { theta } => Self::power(theta)?,
            WeightKindDoc::PowerOverLog { theta, kappa } => Self::power_over_log(theta, kappa)?,
            WeightKindDoc::PowerLogRefined { s } => Self::power_log_refined(s)?,
        };
        base.with_rates(doc.delta0, doc.delta1)
    }

    pub fn to_doc(&self) -> Result<WeightFunctionDoc> {
        let kind = match &self.kind {
            WeightKind::Power { theta } => WeightKindDoc::Power { theta: *theta },
            WeightKind::PowerOverLog { theta, kappa } => {
                WeightKindDoc::PowerOverLog { theta: *theta, kappa: *kappa }
            }
            WeightKind::PowerLogRefined { s } => WeightKindDoc::PowerLogRefined { s: *s },
            WeightKind::Custom { name, .. } => {
                return Err(Error::Input(format!(
                    "custom weight function '{name}' has no serialized form"
                )))
            }
        };
        Ok(WeightFunctionDoc { kind, delta0: self.delta0, delta1: self.delta1 })
    }

    pub fn name(&self) -> String {
        format!("{self:?}")
    }

    /// η(ξ) for ξ >= 8 (large enough that every catalog form is past its
    /// log singularities and increasing).
    pub fn eval(&self, xi: f64) -> Result<f64> {
        if !(xi >= 8.0) {
            return Err(Error::Domain(format!("weight function evaluated at {xi}; need >= 8")));
        }
        Ok(match &self.kind {
            WeightKind::Power { theta } => xi.powf(*theta),
            WeightKind::PowerOverLog { theta, kappa } => xi.powf(*theta) * xi.ln().powf(-kappa),
            WeightKind::PowerLogRefined { s } => {
                let c = (s - 1.0) / s;
                let inner = xi / (c * xi.ln());
                c * inner.powf(1.0 / s) * inner.ln()
            }
            WeightKind::Custom { f, name } => {
                let v = f(xi);
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Domain(format!(
                        "custom weight function '{name}' returned {v} at {xi:e}"
                    )));
                }
                v
            }
        })
    }
}

/// Assembled description of one Cauchy problem's hypothesis data.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub lw: LeviWeight,
    pub modulus: Modulus,
    pub sequence: WeightSequence,
    pub eta: WeightFunction,
    pub zones: ZoneParams,
    /// Sobolev shift of the data space; reported, never used in checks.
    pub nu: f64,
    /// Scan depth of the envelope check.
    pub p_max: u32,
}

impl ProblemSpec {
    pub fn new(
        lw: LeviWeight,
        modulus: Modulus,
        sequence: WeightSequence,
        eta: WeightFunction,
        zones: ZoneParams,
        nu: f64,
    ) -> Result<Self> {
        zones.validate()?;
        Ok(ProblemSpec { lw, modulus, sequence, eta, zones, nu, p_max: 400 })
    }

    pub fn with_p_max(mut self, p_max: u32) -> Self {
        self.p_max = p_max;
        self
    }
}

/// W(Λ(t_ξ)) (w(Λ(t_ξ)))^{m-1}: the Levi addend of the total weight.
pub fn levi_component(ps: &ProblemSpec, xi: f64) -> Result<f64> {
    if !(xi > ps.zones.m_cut) {
        return Err(Error::Input(format!(
            "total weight defined above the cutoff {}, got {xi}",
            ps.zones.m_cut
        )));
    }
    let b = ps.lw.t_xi(xi, &ps.zones)?;
    let y = b.lambda_primitive;
    Ok(ps.lw.w_primitive(y)? * ps.lw.w_of(y)?.powi(ps.lw.m() as i32 - 1))
}

/// φ(ξ) = ξ μ(1/ξ): the modulus addend.
pub fn modulus_component(ps: &ProblemSpec, xi: f64) -> Result<f64> {
    if !(xi > ps.zones.m_cut) {
        return Err(Error::Input(format!(
            "total weight defined above the cutoff {}, got {xi}",
            ps.zones.m_cut
        )));
    }
    ps.modulus.phi(xi)
}

/// M(ξ): sum of the two addends.
pub fn total_weight(ps: &ProblemSpec, xi: f64) -> Result<f64> {
    Ok(levi_component(ps, xi)? + modulus_component(ps, xi)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dominance {
    LeviDominant,
    ModulusDominant,
    Comparable,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceRow {
    pub xi: f64,
    pub levi: f64,
    pub modulus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceReport {
    pub rows: Vec<DominanceRow>,
    /// Trend of log(levi/modulus) against log ξ.
    pub slope: f64,
    pub verdict: Dominance,
}

pub const DOMINANCE_SLOPE_TOL: f64 = 0.02;

/// Which addend of M wins as ξ grows.  Slope-based, so rescaling either
/// addend by a constant cannot change the verdict.
pub fn dominance(ps: &ProblemSpec, xi_grid: &[f64]) -> Result<DominanceReport> {
    if xi_grid.len() < 4 {
        return Err(Error::Input("dominance needs at least 4 frequencies".into()));
    }
    let span = xi_grid[xi_grid.len() - 1] / xi_grid[0];
    if span < 1e3 * (1.0 - 1e-9) {
        return Err(Error::Input(format!(
            "dominance grid must span at least 3 decades, spans {:.2}",
            span.log10()
        )));
    }
    let mut rows = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        rows.push(DominanceRow {
            xi,
            levi: levi_component(ps, xi)?,
            modulus: modulus_component(ps, xi)?,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.xi).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.levi / r.modulus).collect();
    let line = fitting::log_log_fit(&xs, &ratios)?;
    let verdict = if line.slope > DOMINANCE_SLOPE_TOL {
        Dominance::LeviDominant
    } else if line.slope < -DOMINANCE_SLOPE_TOL {
        Dominance::ModulusDominant
    } else {
        Dominance::Comparable
    };
    Ok(DominanceReport { rows, slope: line.slope, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrowthComparison {
    LittleO,
    BigO,
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaRow {
    pub xi: f64,
    pub total: f64,
    pub eta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaReport {
    pub mode: GrowthComparison,
    pub rows: Vec<EtaRow>,
    pub strictly_decreasing: bool,
    /// ratio at the low end over ratio at the high end.
    pub decrease_factor: f64,
    /// Trend of the ratio against log ξi; the Big-O criterion.
    pub ratio_slope: f64,
    pub pair_count: usize,
    pub eta_subadditivity_violations: usize,
    pub total_subadditivity_violations: usize,
    /// max over the grid of |f'| ξ / f and |f''| ξ² / f.
    pub eta_derivative_k1: f64,
    pub eta_derivative_k2: f64,
    pub total_derivative_k1: f64,
    pub total_derivative_k2: f64,
    /// Trend of the k=1 ratios; boundedness proxy.
    pub eta_derivative_slope: f64,
    pub total_derivative_slope: f64,
    pub little_o_pass: bool,
    pub big_o_pass: bool,
    /// Subadditivity and derivative clauses, shared by both modes.
    pub structural_pass: bool,
    pub pass: bool,
}

pub const BIG_O_SLOPE_TOL: f64 = 0.02;
pub const DERIVATIVE_SLOPE_TOL: f64 = 0.05;

/// Deterministic log-uniform frequency pairs for the subadditivity probes.
pub fn sample_frequency_pairs(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<(f64, f64)> {
    assert!(lo > 0.0 && hi > lo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lln, hln) = (lo.ln(), hi.ln());
    (0..count)
        .map(|_| {
            let a: f64 = rng.gen();
            let b: f64 = rng.gen();
            ((lln + a * (hln - lln)).exp(), (lln + b * (hln - lln)).exp())
        })
        .collect()
}

/// Measure how M relates to η and whether both behave like admissible
/// weights (subadditive, with bounded logarithmic derivatives).
///
/// All failures are report outcomes; Err means the weights could not be
/// evaluated at all.
pub fn check_eta_admissible(
    ps: &ProblemSpec,
    mode: GrowthComparison,
    xi_grid: &[f64],
    pairs: &[(f64, f64)],
) -> Result<EtaReport> {
    if xi_grid.len() < 6 {
        return Err(Error::Input("admissibility grid needs at least 6 points".into()));
    }
    let span = xi_grid[xi_grid.len() - 1] / xi_grid[0];
    if span < 1e4 * (1.0 - 1e-9) {
        return Err(Error::Input(format!(
            "admissibility grid must span at least 4 decades, spans {:.2}",
            span.log10()
        )));
    }

    let total = |x: f64| total_weight(ps, x);
    let eta = |x: f64| ps.eta.eval(x);

    let mut rows = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        let m = total(xi)?;
        let e = eta(xi)?;
        rows.push(EtaRow { xi, total: m, eta: e, ratio: m / e });
    }
    let strictly_decreasing =
        rows.windows(2).all(|w| w[1].ratio <= w[0].ratio * (1.0 + 1e-9));
    let decrease_factor = rows[0].ratio / rows[rows.len() - 1].ratio;
    let xs: Vec<f64> = rows.iter().map(|r| r.xi).collect();
    let rs: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let ratio_slope = fitting::log_log_fit(&xs, &rs)?.slope;

    // Subadditivity over the sampled pairs, with a relative rounding slack.
    let mut eta_viol = 0usize;
    let mut tot_viol = 0usize;
    for &(a, b) in pairs {
        let s = eta(a + b)?;
        if s > eta(a)? + eta(b)? + 1e-9 * s {
            eta_viol += 1;
        }
        let s = total(a + b)?;
        if s > total(a)? + total(b)? + 1e-9 * s {
            tot_viol += 1;
        }
    }

    // Logarithmic derivative ratios by central differences, k = 1 and 2.
    // The trend is fitted on the top half of the grid only: ratios may
    // legitimately drift while one addend overtakes the other, and only
    // sustained growth at the high end indicates unboundedness.
    let deriv_ratios = |f: &dyn Fn(f64) -> Result<f64>| -> Result<(f64, f64, f64)> {
        let mut k1 = Vec::with_capacity(xi_grid.len());
        let mut k2_max = f64::NEG_INFINITY;
        for &xi in xi_grid {
            let h = xi * 1e-3;
            let (fm, f0, fp) = (f(xi - h)?, f(xi)?, f(xi + h)?);
            let d1 = (fp - fm) / (2.0 * h);
            let d2 = (fp - 2.0 * f0 + fm) / (h * h);
            k1.push(d1.abs() * xi / f0);
            k2_max = k2_max.max(d2.abs() * xi * xi / f0);
        }
        let half = xi_grid.len() / 2;
        let slope = fitting::log_log_fit(&xi_grid[half..], &k1[half..])?.slope;
        let k1_max = k1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((k1_max, k2_max, slope))
    };
    let (eta_k1, eta_k2, eta_dslope) = deriv_ratios(&eta)?;
    let (tot_k1, tot_k2, tot_dslope) = deriv_ratios(&total)?;

    let little_o_pass = strictly_decreasing && decrease_factor >= 2.0;
    let big_o_pass = ratio_slope <= BIG_O_SLOPE_TOL;
    let structural_pass = eta_viol == 0
        && tot_viol == 0
        && eta_k1.is_finite()
        && eta_k2.is_finite()
        && tot_k1.is_finite()
        && tot_k2.is_finite()
        && eta_dslope <= DERIVATIVE_SLOPE_TOL
        && tot_dslope <= DERIVATIVE_SLOPE_TOL;
    let pass = structural_pass
        && match mode {
            GrowthComparison::LittleO => little_o_pass,
            GrowthComparison::BigO => big_o_pass,
        };
    Ok(EtaReport {
        mode,
        rows,
        strictly_decreasing,
        decrease_factor,
        ratio_slope,
        pair_count: pairs.len(),
        eta_subadditivity_violations: eta_viol,
        total_subadditivity_violations: tot_viol,
        eta_derivative_k1: eta_k1,
        eta_derivative_k2: eta_k2,
        total_derivative_k1: tot_k1,
        total_derivative_k2: tot_k2,
        eta_derivative_slope: eta_dslope,
        total_derivative_slope: tot_dslope,
        little_o_pass,
        big_o_pass,
        structural_pass,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub t: Vec<f64>,
    pub product: Vec<f64>,
    /// min over the grid of product / product(first grid point).
    pub min_ratio: f64,
    pub monotone: bool,
    /// Nonincreasing from the sampled peak toward 0, with at least one
    /// sample past the peak.  The hypothesis is a limit, so an interior
    /// hump (log-refined laws have one) is tolerated; a peak at the
    /// smallest sampled t means decay was never observed and fails.
    pub monotone_tail: bool,
    /// Product (or λ, Λ) fell below f64 range partway down the grid.
    pub hit_zero: bool,
    pub fitted_exponent: Option<f64>,
    pub pass: bool,
}

/// Default grid for the degeneracy-decay check: T/2 down 16 decades.
pub fn decay_grid(t_end: f64) -> Vec<f64> {
    (0..=32).map(|k| 0.5 * t_end * 10f64.powf(-(k as f64) / 2.0)).collect()
}

/// Check λ^m (w(Λ))^{m(m-1)} → 0 along a grid decreasing toward 0.
///
/// Pass requires the sampled product to be nonincreasing from its peak
/// toward 0 and to show real decay: a drop below 1e-6 of the first value,
/// or underflow, or a fitted power-law exponent of at least 1e-3.  The
/// exponent clause admits arbitrarily slow decay that a fixed drop target
/// would misjudge on any finite grid; the peak clause admits the interior
/// hump of log-refined laws while still rejecting products that keep
/// growing at the small-t end.
pub fn check_degeneracy_decay(lw: &LeviWeight, t_grid: &[f64]) -> Result<DecayReport> {
    if t_grid.len() < 4 {
        return Err(Error::Input("degeneracy grid needs at least 4 points".into()));
    }
    if !t_grid.windows(2).all(|w| w[1] < w[0]) || !(t_grid[t_grid.len() - 1] > 0.0) {
        return Err(Error::Input(
            "degeneracy grid must decrease strictly toward 0 through positive times".into(),
        ));
    }
    let mut ts = Vec::new();
    let mut ps = Vec::new();
    let mut hit_zero = false;
    let mut grew_unbounded = false;
    for &t in t_grid {
        match lw.degeneracy_product(t) {
            Ok(p) if p == f64::INFINITY => {
                grew_unbounded = true;
                break;
            }
            Ok(p) if p > 0.0 => {
                ts.push(t);
                ps.push(p);
            }
            _ => {
                hit_zero = true;
                break;
            }
        }
    }
    if ts.len() < 2 {
        return Err(Error::Numerical(
            "degeneracy product not representable on the given grid".into(),
        ));
    }
    let reference = ps[0];
    let min_ratio = ps.iter().map(|p| p / reference).fold(f64::INFINITY, f64::min);
    let monotone = !grew_unbounded && ps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let peak = ps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    let monotone_tail = !grew_unbounded
        && peak + 1 < ps.len()
        && ps[peak..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let fitted_exponent = fitting::log_log_fit(&ts, &ps).ok().map(|l| l.slope);
    let pass = monotone_tail
        && (hit_zero || min_ratio <= 1e-6 || fitted_exponent.map_or(false, |e| e >= 1e-3));
    Ok(DecayReport {
        t: ts,
        product: ps,
        min_ratio,
        monotone,
        monotone_tail,
        hit_zero,
        fitted_exponent,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub ratio_mean: f64,
    /// Trend of log(f/g) against log ξ: the empirical exponent gap.
    pub ratio_drift_slope: f64,
    pub residual_rms: f64,
}

/// Compare two positive series on a shared grid: mean ratio and the
/// log-log drift of the ratio.  Zero drift means same growth.
pub fn asymptotic_fit(xi: &[f64], f: &[f64], g: &[f64]) -> Result<FitReport> {
    if xi.len() != f.len() || xi.len() != g.len() {
        return Err(Error::Input(format!(
            "fit series misaligned: {} vs {} vs {} points",
            xi.len(),
            f.len(),
            g.len()
        )));
    }
    if xi.len() < 3 {
        return Err(Error::Input("asymptotic fit needs at least 3 points".into()));
    }
    let ratios: Vec<f64> = f.iter().zip(g).map(|(a, b)| a / b).collect();
    let line = fitting::log_log_fit(xi, &ratios)?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(FitReport { ratio_mean: mean, ratio_drift_slope: line.slope, residual_rms: line.residual_rms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    GlobalWellPosed,
    LocalWellPosed,
    NotCovered,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub evidence: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub checks: Vec<CheckOutcome>,
    /// Names of the failed checks; empty unless NotCovered.
    pub reasons: Vec<String>,
}

impl Classification {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Input(format!("verdict serialization failed: {e}")))
    }
}

fn check_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn error_outcome(name: &str, e: Error) -> Result<CheckOutcome> {
    match e {
        Error::Domain(msg) | Error::Numerical(msg) => Ok(CheckOutcome {
            name: name.into(),
            pass: false,
            evidence: serde_json::json!({ "error": msg }),
        }),
        other => Err(other),
    }
}

/// Run the full hypothesis audit and classify.
///
/// Global well-posedness needs every check to pass with M = o(η); if only
/// the O(η) comparison holds the verdict drops to local; any other failure
/// leaves the problem outside the covered class, with the failing check
/// names as reasons.  A check that cannot even be evaluated (a divergent
/// weight primitive, say) counts as failed, with the error as evidence;
/// only caller mistakes surface as Err.
pub fn classify(ps: &ProblemSpec) -> Result<Classification> {
    let t_end = ps.lw.t_end();
    let mut checks = Vec::new();

    // Shape conditions on a grid clear of λ-underflow.
    let mut lo = t_end * 1e-3;
    while ps.lw.shape().lambda(lo).map_or(false, |v| v == 0.0) && lo < 0.1 * t_end {
        lo *= 2.0;
    }
    let grid = log_grid(lo, t_end, 40);
    let shape_result = match ps.lw.law() {
        WeightLaw::Family { s, .. } => {
            shape::check_shape_conditions(ps.lw.shape(), *s, ps.lw.m(), &grid)
        }
        WeightLaw::Custom { .. } => {
            let mf = ps.lw.m() as f64;
            shape::check_shape_conditions_at(ps.lw.shape(), (mf - 1.0) / mf, &grid)
        }
    };
    checks.push(match shape_result {
        Ok(rep) => CheckOutcome {
            name: "shape_conditions".into(),
            pass: rep.pass,
            evidence: check_value(&rep),
        },
        Err(e) => error_outcome("shape_conditions", e)?,
    });

    checks.push(match check_degeneracy_decay(&ps.lw, &decay_grid(t_end)) {
        Ok(rep) => CheckOutcome {
            name: "degeneracy_decay".into(),
            pass: rep.pass,
            evidence: check_value(&rep),
        },
        Err(e) => error_outcome("degeneracy_decay", e)?,
    });

    let envelope_result = moduli::check_envelope_decay(
        &ps.sequence,
        |x| ps.eta.eval(x),
        ps.eta.delta0,
        &log_grid(1e2, 1e5, 15),
        ps.p_max,
    );
    checks.push(match envelope_result {
        Ok(rep) => CheckOutcome {
            name: "envelope_decay".into(),
            pass: rep.pass,
            evidence: check_value(&rep),
        },
        Err(e) => error_outcome("envelope_decay", e)?,
    });

    let pairs = sample_frequency_pairs(64, 1e2, 1e6, 0x5eed);
    let mut global_eta = false;
    checks.push(
        match check_eta_admissible(ps, GrowthComparison::LittleO, &log_grid(1e2, 1e7, 25), &pairs)
        {
            Ok(rep) => {
                let weak =
                    rep.structural_pass && (rep.little_o_pass || rep.big_o_pass);
                global_eta = rep.structural_pass && rep.little_o_pass;
                CheckOutcome {
                    name: "eta_admissible".into(),
                    pass: weak,
                    evidence: check_value(&rep),
                }
            }
            Err(e) => error_outcome("eta_admissible", e)?,
        },
    );

    let core = checks[..3].iter().all(|c| c.pass);
    let eta_pass = checks[3].pass;
    let verdict = if core && global_eta {
        Verdict::GlobalWellPosed
    } else if core && eta_pass {
        Verdict::LocalWellPosed
    } else {
        Verdict::NotCovered
    };
    let reasons = if verdict == Verdict::NotCovered {
        checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect()
    } else {
        Vec::new()
    };
    Ok(Classification { verdict, checks, reasons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::Modulus;
    use crate::shape::ShapeFunction;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn standard_lw() -> LeviWeight {
        LeviWeight::new(
            ShapeFunction::monomial(4.0, 1.0).unwrap(),
            2,
            WeightLaw::Family { s: 3.0, m_tilde: 0, beta_tilde: 0.0 },
        )
        .unwrap()
    }

    fn spec_with(modulus: Modulus, eta: WeightFunction) -> ProblemSpec {
        ProblemSpec::new(
            standard_lw(),
            modulus,
            WeightSequence::gevrey(2.0, 1.0).unwrap(),
            eta,
            ZoneParams::default(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn total_weight_closed_form() {
        // Lipschitz: M = 4 ξ^{1/3} + 1 exactly (W = 4Λ^{1/4}, w = Λ^{-3/4},
        // Λ(t_ξ) = ξ^{-2/3}, φ = 1).
        let ps = spec_with(Modulus::Lipschitz, WeightFunction::power(0.5).unwrap());
        for &xi in &[1e3, 1e6, 1e9] {
            let m = total_weight(&ps, xi).unwrap();
            let closed = 4.0 * xi.powf(1.0 / 3.0) + 1.0;
            assert!((m / closed - 1.0).abs() < 1e-8, "xi = {xi}: {m} vs {closed}");
        }
        assert!(total_weight(&ps, 1.5).is_err(), "below the cutoff");
    }

    #[test]
    fn total_weight_increasing_for_catalog() {
        let specs = [
            spec_with(Modulus::Lipschitz, WeightFunction::power(0.5).unwrap()),
            spec_with(Modulus::hoelder(0.5).unwrap(), WeightFunction::power(0.6).unwrap()),
            spec_with(Modulus::LogLip, WeightFunction::power(0.4).unwrap()),
            spec_with(Modulus::log_inverse(2.0).unwrap(), WeightFunction::power(1.0).unwrap()),
        ];
        for ps in &specs {
            let grid = log_grid(1e2, 1e8, 30);
            let vals: Vec<f64> =
                grid.iter().map(|&x| total_weight(ps, x).unwrap()).collect();
            assert!(
                vals.windows(2).all(|w| w[1] > w[0]),
                "{:?} not increasing",
                ps.modulus
            );
        }
    }

    #[test]
    fn dominance_matches_exponent_comparison() {
        let grid = log_grid(1e3, 1e8, 20);
        // φ = ξ^{0.2} against Levi ξ^{1/3}.
        let ps = spec_with(Modulus::hoelder(0.8).unwrap(), WeightFunction::power(0.5).unwrap());
        assert_eq!(dominance(&ps, &grid).unwrap().verdict, Dominance::LeviDominant);
        // φ = ξ^{0.5}.
        let ps = spec_with(Modulus::hoelder(0.5).unwrap(), WeightFunction::power(0.6).unwrap());
        assert_eq!(dominance(&ps, &grid).unwrap().verdict, Dominance::ModulusDominant);
        // φ = ξ^{1/3}: same exponent on both sides.
        let ps =
            spec_with(Modulus::hoelder(2.0 / 3.0).unwrap(), WeightFunction::power(0.5).unwrap());
        let rep = dominance(&ps, &grid).unwrap();
        assert_eq!(rep.verdict, Dominance::Comparable, "slope = {}", rep.slope);
        // Rescaling an addend must not change the verdict (slope-based).
        assert!(rep.slope.abs() < DOMINANCE_SLOPE_TOL);
        // Too narrow a grid is refused.
        assert!(dominance(&ps, &log_grid(1e3, 1e4, 10)).is_err());
    }

    #[test]
    fn eta_little_o_and_big_o() {
        let grid = log_grid(1e2, 1e7, 25);
        let pairs = sample_frequency_pairs(48, 1e2, 1e6, 7);
        // M ~ ξ^{1/3} against η = ξ^{1/2}: genuine little-o.
        let ps = spec_with(Modulus::Lipschitz, WeightFunction::power(0.5).unwrap());
        let rep = check_eta_admissible(&ps, GrowthComparison::LittleO, &grid, &pairs).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.little_o_pass && rep.big_o_pass);
        assert_eq!(rep.eta_subadditivity_violations, 0);
        assert_eq!(rep.total_subadditivity_violations, 0);
        // Power-law derivative ratios recover the exponents.
        assert!((rep.eta_derivative_k1 - 0.5).abs() < 1e-4, "{}", rep.eta_derivative_k1);
        assert!((rep.total_derivative_k1 - 1.0 / 3.0).abs() < 2e-2);

        // η = M itself: ratio constant, so O(η) holds and o(η) fails.
        let lw = standard_lw();
        let zones = ZoneParams::default();
        let eta_m = WeightFunction::custom(
            "total-weight-itself",
            Arc::new(move |x: f64| {
                let b = lw.t_xi(x, &zones).unwrap();
                let y = b.lambda_primitive;
                lw.w_primitive(y).unwrap() * lw.w_of(y).unwrap() + 1.0
            }),
        );
        let ps = spec_with(Modulus::Lipschitz, eta_m);
        let rep = check_eta_admissible(&ps, GrowthComparison::LittleO, &grid, &pairs).unwrap();
        assert!(!rep.little_o_pass && rep.big_o_pass, "{rep:?}");
        assert!(!rep.pass);
        let rep = check_eta_admissible(&ps, GrowthComparison::BigO, &grid, &pairs).unwrap();
        assert!(rep.pass);

        // Log-inverse coefficients with η = ξ (log ξ)^{-κ}, κ < α.
        let ps = spec_with(
            Modulus::log_inverse(2.0).unwrap(),
            WeightFunction::power_over_log(1.0, 1.0).unwrap(),
        );
        let rep = check_eta_admissible(&ps, GrowthComparison::LittleO, &grid, &pairs).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn degeneracy_decay_criteria() {
        let grid = decay_grid(1.0);
        // s = 3: exponent 1/2, drops below 1e-6 over 16 decades.
        let rep = check_degeneracy_decay(&standard_lw(), &grid).unwrap();
        assert!(rep.pass);
        assert!(rep.min_ratio < 1e-6);
        assert!((rep.fitted_exponent.unwrap() - 0.5).abs() < 1e-6);
        // s = 2.7: exponent 8 - 5 s/(s-1) = 0.0588; the drop clause cannot
        // see it but the exponent clause does.
        let slow = LeviWeight::new(
            ShapeFunction::monomial(4.0, 1.0).unwrap(),
            2,
            WeightLaw::Family { s: 2.7, m_tilde: 0, beta_tilde: 0.0 },
        )
        .unwrap();
        let rep = check_degeneracy_decay(&slow, &grid).unwrap();
        assert!(rep.pass);
        assert!(rep.min_ratio > 1e-6, "drop clause alone would misjudge this");
        assert!((rep.fitted_exponent.unwrap() - (8.0 - 5.0 * 2.7 / 1.7)).abs() < 1e-6);
        // s = 1.9: the product grows toward t = 0.
        let bad = LeviWeight::new(
            ShapeFunction::monomial(4.0, 1.0).unwrap(),
            2,
            WeightLaw::Family { s: 1.9, m_tilde: 0, beta_tilde: 0.0 },
        )
        .unwrap();
        let rep = check_degeneracy_decay(&bad, &grid).unwrap();
        assert!(!rep.pass);
        assert!(!rep.monotone);
        assert!(!rep.monotone_tail, "growth persists to the small-t end");
        // m̃ = 1, β̃ = 1: the product 5^{3/2} t^{1/2} (ln 5 + 5 ln(1/t))
        // peaks near t = 0.19, inside the grid, then decays like t^{1/2}.
        let humped = LeviWeight::new(
            ShapeFunction::monomial(4.0, 1.0).unwrap(),
            2,
            WeightLaw::Family { s: 3.0, m_tilde: 1, beta_tilde: 1.0 },
        )
        .unwrap();
        let rep = check_degeneracy_decay(&humped, &grid).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(!rep.monotone, "the hump sits between the first two grid points");
        assert!(rep.monotone_tail);
        let e = rep.fitted_exponent.unwrap();
        assert!(e > 0.4 && e < 0.55, "exponent {e}");
    }

    #[test]
    fn asymptotic_fit_identity_and_power() {
        let xi = log_grid(1e3, 1e9, 12);
        let f: Vec<f64> = xi.iter().map(|x| 3.0 * x.powf(0.4)).collect();
        let rep = asymptotic_fit(&xi, &f, &f).unwrap();
        assert!(rep.ratio_drift_slope.abs() < 1e-12);
        assert!((rep.ratio_mean - 1.0).abs() < 1e-12);
        let g: Vec<f64> = xi.iter().map(|x| x.powf(0.45)).collect();
        let rep = asymptotic_fit(&xi, &f, &g).unwrap();
        assert!((rep.ratio_drift_slope + 0.05).abs() < 1e-10);
        assert!(asymptotic_fit(&xi[..5], &f, &g).is_err(), "misaligned grids");
    }

    #[test]
    fn power_law_weight_fit() {
        // Lipschitz total against ξ^{1/3}: drift within 0.01 over 5 decades.
        let ps = spec_with(Modulus::Lipschitz, WeightFunction::power(0.5).unwrap());
        let xi = log_grid(1e4, 1e9, 15);
        let f: Vec<f64> = xi.iter().map(|&x| total_weight(&ps, x).unwrap()).collect();
        let g: Vec<f64> = xi.iter().map(|x| x.powf(1.0 / 3.0)).collect();
        let rep = asymptotic_fit(&xi, &f, &g).unwrap();
        assert!(rep.ratio_drift_slope.abs() < 0.01, "slope {}", rep.ratio_drift_slope);
        assert!((rep.ratio_mean - 4.0).abs() < 0.1);
    }

    #[test]
    fn log_refined_weight_matches_measured_levi_addend() {
        // m̃=1, β̃=1, s=3 Levi addend against the named closed form;
        // drift within 0.02 over [1e4, 1e9], ratio 5.42 at 1e5 easing to
        // 4.82 at 1e9.
        let lw = LeviWeight::new(
            ShapeFunction::monomial(4.0, 1.0).unwrap(),
            2,
            WeightLaw::Family { s: 3.0, m_tilde: 1, beta_tilde: 1.0 },
        )
        .unwrap();
        let ps = ProblemSpec::new(
            lw,
            Modulus::Lipschitz,
            WeightSequence::gevrey(2.0, 1.0).unwrap(),
            WeightFunction::power_log_refined(3.0).unwrap(),
            ZoneParams::default(),
            0.0,
        )
        .unwrap();
        let xi = log_grid(1e4, 1e9, 11);
        let f: Vec<f64> = xi.iter().map(|&x| levi_component(&ps, x).unwrap()).collect();
        let g: Vec<f64> = xi.iter().map(|&x| ps.eta.eval(x).unwrap()).collect();
        let rep = asymptotic_fit(&xi, &f, &g).unwrap();
        assert!(rep.ratio_drift_slope.abs() < 0.02, "slope {}", rep.ratio_drift_slope);
        // Spot value against the frozen 40-digit reference at 1e6.
        let b = levi_component(&ps, 1e6).unwrap();
        assert!((b / 1_916.807_660_829_968_3 - 1.0).abs() < 1e-9, "{b}");
        let eta6 = ps.eta.eval(1e6).unwrap();
        assert!((b / eta6 - 5.197_773_932_9).abs() < 1e-6);
    }

    #[test]
    fn borderline_log_law_tracks_log_squared() {
        // w² = Λ^{-1}(log 1/Λ)² with μ(s) = s(log(1/s)+1)²: both addends
        // grow like (log ξ)².
        let lw = LeviWeight::new(
            ShapeFunction::monomial(4.0, 1.0).unwrap(),
            2,
            WeightLaw::Custom {
                w_m: Arc::new(|y: f64| (1.0 / y) * (1.0 / y).ln().powi(2)),
                w_m_prime: None,
                name: "borderline-log".into(),
            },
        )
        .unwrap();
        let ps = ProblemSpec::new(
            lw,
            Modulus::Custom {
                f: Arc::new(|s: f64| s * ((1.0 / s).ln() + 1.0).powi(2)),
                name: "log-squared-lip".into(),
            },
            WeightSequence::gevrey(2.0, 1.0).unwrap(),
            WeightFunction::power(0.5).unwrap(),
            ZoneParams::default(),
            0.0,
        )
        .unwrap();
        let xi = log_grid(1e4, 1e10, 10);
        let g: Vec<f64> = xi.iter().map(|x| x.ln().powi(2)).collect();
        let levi: Vec<f64> = xi.iter().map(|&x| levi_component(&ps, x).unwrap()).collect();
        let modl: Vec<f64> = xi.iter().map(|&x| modulus_component(&ps, x).unwrap()).collect();
        let rep = asymptotic_fit(&xi, &levi, &g).unwrap();
        assert!(rep.ratio_drift_slope.abs() < 0.05, "levi slope {}", rep.ratio_drift_slope);
        let rep = asymptotic_fit(&xi, &modl, &g).unwrap();
        assert!(rep.ratio_drift_slope.abs() < 0.05, "modulus slope {}", rep.ratio_drift_slope);
    }

    #[test]
    fn classify_standard_configurations() {
        // Gevrey data, s* = 2 < s = 3, η = ξ^{1/2}: everything passes.
        let ps = spec_with(
            Modulus::Lipschitz,
            WeightFunction::power(0.5).unwrap().with_rates(0.5, 1.0).unwrap(),
        );
        let c = classify(&ps).unwrap();
        assert_eq!(c.verdict, Verdict::GlobalWellPosed, "{c:?}");
        assert!(c.reasons.is_empty());
        assert_eq!(c.checks.len(), 4);
        let json = c.to_json().unwrap();
        assert!(json.contains("\"verdict\""));
        assert!(json.contains("shape_conditions"));

        // η barely above M: O(η) holds, o(η) cannot lose a factor 2.
        let ps = spec_with(
            Modulus::Lipschitz,
            WeightFunction::power(1.0 / 3.0).unwrap().with_rates(0.5, 1.0).unwrap(),
        );
        let c = classify(&ps).unwrap();
        assert_eq!(c.verdict, Verdict::LocalWellPosed, "{c:?}");

        // s = 1.9: both the shape threshold and the degeneracy limit fail.
        let bad = LeviWeight::new(
            ShapeFunction::monomial(4.0, 1.0).unwrap(),
            2,
            WeightLaw::Family { s: 1.9, m_tilde: 0, beta_tilde: 0.0 },
        )
        .unwrap();
        let ps = ProblemSpec::new(
            bad,
            Modulus::Lipschitz,
            WeightSequence::gevrey(2.0, 1.0).unwrap(),
            WeightFunction::power(0.5).unwrap().with_rates(0.5, 1.0).unwrap(),
            ZoneParams::default(),
            0.0,
        )
        .unwrap();
        let c = classify(&ps).unwrap();
        assert_eq!(c.verdict, Verdict::NotCovered);
        assert!(c.reasons.iter().any(|r| r == "degeneracy_decay"), "{:?}", c.reasons);
    }

    fn verdict_rank(v: Verdict) -> u8 {
        match v {
            Verdict::NotCovered => 0,
            Verdict::LocalWellPosed => 1,
            Verdict::GlobalWellPosed => 2,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn classify_monotone_in_eta(raw_a in 0.36f64..0.6, raw_b in 0.36f64..0.6) {
            // Within the band where the envelope check stays satisfied, a
            // pointwise larger η can only improve the verdict.
            let (lo, hi) = if raw_a < raw_b { (raw_a, raw_b) } else { (raw_b, raw_a) };
            prop_assume!(hi - lo > 1e-3);
            let mk = |theta: f64| {
                let ps = spec_with(
                    Modulus::Lipschitz,
                    WeightFunction::power(theta).unwrap().with_rates(0.5, 1.0).unwrap(),
                );
                classify(&ps).unwrap().verdict
            };
            prop_assert!(verdict_rank(mk(hi)) >= verdict_rank(mk(lo)));
        }
    }

    #[test]
    fn frequency_pairs_are_deterministic() {
        let a = sample_frequency_pairs(16, 1e2, 1e6, 42);
        let b = sample_frequency_pairs(16, 1e2, 1e6, 42);
        assert_eq!(a, b);
        assert!(a.iter().all(|&(x, y)| (1e2..=1e6).contains(&x) && (1e2..=1e6).contains(&y)));
        let c = sample_frequency_pairs(16, 1e2, 1e6, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn weight_function_doc_round_trip() {
        let doc: WeightFunctionDoc =
            serde_json::from_str(r#"{"kind": "power", "theta": 0.5, "delta0": 0.25}"#).unwrap();
        let wf = WeightFunction::from_doc(&doc).unwrap();
        assert_eq!(wf.delta0, 0.25);
        assert_eq!(wf.delta1, 1.0, "defaulted");
        let back = serde_json::to_string(&wf.to_doc().unwrap()).unwrap();
        assert!(back.contains("\"power\""), "{back}");
        assert!(WeightFunction::from_doc(&serde_json::from_str::<WeightFunctionDoc>(
            r#"{"kind": "power", "theta": 1.5}"#
        ).unwrap()).is_err());
    }
}
