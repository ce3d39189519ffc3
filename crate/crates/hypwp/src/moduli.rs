//! Moduli of continuity, the frequency weight they generate, and weight
//! sequences with the envelope-decay compatibility check.
//!
//! A modulus μ is continuous, concave, increasing with μ(0) = 0; the
//! factorization μ(s) = s φ(1/s) turns time-regularity of coefficients into
//! the frequency weight φ(ξ) = ξ μ(1/ξ) that enters the total loss weight.
//! The catalog mirrors the classical ladder from Lipschitz down to
//! Log^{-α}; `phi_model` carries the simplified asymptotic forms the
//! literature tabulates, which agree with the exact φ up to bounded ratio.
//!
//! A weight sequence {K_p} is compatible with a weight function η at rate
//! δ0 when inf_p K_p ξ^{-p} ≤ C e^{-δ0 η(ξ)}.  `check_envelope_decay`
//! measures the slack of that inequality in log form over a frequency grid;
//! the infimum is a finite scan in p whose truncation is reported whenever
//! it binds (an argmin at p_max certifies nothing).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting;
use crate::shape::ScalarFn;

/// log^[k]: k-fold composition of ln.  log^[0] is the identity.
/// Errors name the level at which the argument leaves the domain.
pub fn iterated_log(level: u32, x: f64) -> Result<f64> {
    let mut v = x;
    for j in 1..=level {
        if !(v > 0.0) {
            return Err(Error::Domain(format!(
                "iterated logarithm level {j} of {x} undefined: inner value {v} is not positive"
            )));
        }
        v = v.ln();
    }
    Ok(v)
}

/// exp^[k]: k-fold composition of exp.
pub fn iterated_exp(level: u32, x: f64) -> f64 {
    let mut v = x;
    for _ in 0..level {
        v = v.exp();
    }
    v
}

#[derive(Clone)]
pub enum Modulus {
    /// μ(s) = s.
    Lipschitz,
    /// μ(s) = s (log(1/s) + 1).
    LogLip,
    /// μ(s) = s (log(1/s) + 1) log^[depth](1/s), on s ≤ s0(depth) where the
    /// innermost iterated log stays ≥ 1.
    LogLogLip { depth: u32 },
    /// μ(s) = s^α, α in (0,1).
    Hoelder { alpha: f64 },
    /// μ(s) = (log(1/s) + 1)^{-α}, α > 0.
    LogInverse { alpha: f64 },
    Custom { f: ScalarFn, name: String },
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Lipschitz => write!(f, "Modulus::Lipschitz"),
            Modulus::LogLip => write!(f, "Modulus::LogLip"),
            Modulus::LogLogLip { depth } => write!(f, "Modulus::LogLogLip(depth={depth})"),
            Modulus::Hoelder { alpha } => write!(f, "Modulus::Hoelder(alpha={alpha})"),
            Modulus::LogInverse { alpha } => write!(f, "Modulus::LogInverse(alpha={alpha})"),
            Modulus::Custom { name, .. } => write!(f, "Modulus::Custom({name})"),
        }
    }
}

/// Serialized form; custom moduli are programmatic only.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulusDoc {
    Lipschitz,
    LogLip,
    LogLogLip { depth: u32 },
    Hoelder { alpha: f64 },
    LogInverse { alpha: f64 },
}

impl Modulus {
    pub fn hoelder(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Input(format!("Hoelder exponent must lie in (0,1), got {alpha}")));
        }
        Ok(Modulus::Hoelder { alpha })
    }

    pub fn log_inverse(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Input(format!("log-inverse exponent must be > 0, got {alpha}")));
        }
        Ok(Modulus::LogInverse { alpha })
    }

    pub fn log_log_lip(depth: u32) -> Result<Self> {
        if depth < 1 {
            return Err(Error::Input("iterated-log depth must be >= 1".into()));
        }
        Ok(Modulus::LogLogLip { depth })
    }

    pub fn from_doc(doc: &ModulusDoc) -> Result<Self> {
        match *doc {
            ModulusDoc::Lipschitz => Ok(Modulus::Lipschitz),
            ModulusDoc::LogLip => Ok(Modulus::LogLip),
            ModulusDoc::LogLogLip { depth } => Modulus::log_log_lip(depth),
            ModulusDoc::Hoelder { alpha } => Modulus::hoelder(alpha),
            ModulusDoc::LogInverse { alpha } => Modulus::log_inverse(alpha),
        }
    }

    pub fn to_doc(&self) -> Result<ModulusDoc> {
        Ok(match self {
            Modulus::Lipschitz => ModulusDoc::Lipschitz,
            Modulus::LogLip => ModulusDoc::LogLip,
            Modulus::LogLogLip { depth } => ModulusDoc::LogLogLip { depth: *depth },
            Modulus::Hoelder { alpha } => ModulusDoc::Hoelder { alpha: *alpha },
            Modulus::LogInverse { alpha } => ModulusDoc::LogInverse { alpha: *alpha },
            Modulus::Custom { name, .. } => {
                return Err(Error::Input(format!("custom modulus '{name}' has no serialized form")))
            }
        })
    }

    pub fn name(&self) -> String {
        format!("{self:?}").replace("Modulus::", "")
    }

    /// Upper end of the domain on which μ is evaluated: the largest s up to
    /// which the expression is genuinely a modulus (increasing, concave).
    /// 1 for most of the catalog.  For the iterated-log family with depth
    /// >= 2, s0(depth) = exp(-exp^[depth-1](1)), where the innermost log
    /// factor reaches 1; at depth 1 that cap is not small enough (the
    /// expression s(log(1/s)+1)log(1/s) decreases on (e^-1.62, e^-1]), so
    /// e^-2 is used instead.  For the log-inverse family, e^{-α}, beyond
    /// which the function turns convex.
    pub fn s_max(&self) -> f64 {
        match self {
            Modulus::LogLogLip { depth: 1 } => (-2.0f64).exp(),
            Modulus::LogLogLip { depth } => (-iterated_exp(depth - 1, 1.0)).exp(),
            Modulus::LogInverse { alpha } => (-alpha).exp().min(1.0),
            _ => 1.0,
        }
    }

    /// μ(s) on (0, s_max].
    pub fn eval(&self, s: f64) -> Result<f64> {
        let s_max = self.s_max();
        if !(s > 0.0 && s <= s_max) {
            return Err(Error::Domain(format!(
                "modulus {self:?} evaluated at {s} outside (0, {s_max}]"
            )));
        }
        Ok(match self {
            Modulus::Lipschitz => s,
            Modulus::LogLip => s * ((1.0 / s).ln() + 1.0),
            Modulus::LogLogLip { depth } => {
                s * ((1.0 / s).ln() + 1.0) * iterated_log(*depth, 1.0 / s)?
            }
            Modulus::Hoelder { alpha } => s.powf(*alpha),
            Modulus::LogInverse { alpha } => ((1.0 / s).ln() + 1.0).powf(-alpha),
            Modulus::Custom { f, .. } => f(s),
        })
    }

    /// Least admissible argument of `phi`: max(2, 1/s_max).
    pub fn phi_min_x(&self) -> f64 {
        (1.0 / self.s_max()).max(2.0)
    }

    /// The generated frequency weight φ(x) = x μ(1/x), x ≥ max(2, 1/s_max).
    pub fn phi(&self, x: f64) -> Result<f64> {
        let lo = self.phi_min_x();
        if !(x >= lo) {
            return Err(Error::Domain(format!(
                "frequency weight of {self:?} needs x >= {lo}, got {x}"
            )));
        }
        Ok(x * self.eval(1.0 / x)?)
    }

    /// Tabulated asymptotic form of φ (drops the "+1" regularizations).
    /// Agrees with `phi` up to a bounded ratio; display and cross-checks only.
    pub fn phi_model(&self, x: f64) -> Result<f64> {
        let lo = self.phi_min_x();
        if !(x >= lo) {
            return Err(Error::Domain(format!(
                "model weight of {self:?} needs x >= {lo}, got {x}"
            )));
        }
        Ok(match self {
            Modulus::Lipschitz => 1.0,
            Modulus::LogLip => x.ln(),
            Modulus::LogLogLip { depth } => x.ln() * iterated_log(*depth, x)?,
            Modulus::Hoelder { alpha } => x.powf(1.0 - alpha),
            Modulus::LogInverse { alpha } => x * x.ln().powf(-alpha),
            Modulus::Custom { name, .. } => {
                return Err(Error::Domain(format!("custom modulus '{name}' has no model form")))
            }
        })
    }
}

#[derive(Clone)]
pub enum WeightSequence {
    /// K_p = (p!)^{s_star} scale^p.
    Gevrey { s_star: f64, scale: f64 },
    /// K_p = ((p+1) log(e+p))^p.
    LogFactorial,
    /// ln K_p supplied directly (the scan works in logs throughout).
    Custom { ln_k: Arc<dyn Fn(u32) -> f64 + Send + Sync>, name: String },
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSequence::Gevrey { s_star, scale } => {
                write!(f, "WeightSequence::Gevrey(s_star={s_star}, scale={scale})")
            }
            WeightSequence::LogFactorial => write!(f, "WeightSequence::LogFactorial"),
            WeightSequence::Custom { name, .. } => write!(f, "WeightSequence::Custom({name})"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSequenceDoc {
    Gevrey { s_star: f64, scale: f64 },
    LogFactorial,
}

impl WeightSequence {
    pub fn gevrey(s_star: f64, scale: f64) -> Result<Self> {
        if !(s_star >= 1.0) || !(scale > 0.0) {
            return Err(Error::Input(format!(
                "Gevrey sequence needs s_star >= 1 and scale > 0, got ({s_star}, {scale})"
            )));
        }
        Ok(WeightSequence::Gevrey { s_star, scale })
    }

    pub fn from_doc(doc: &WeightSequenceDoc) -> Result<Self> {
        match *doc {
            WeightSequenceDoc::Gevrey { s_star, scale } => Self::gevrey(s_star, scale),
            WeightSequenceDoc::LogFactorial => Ok(WeightSequence::LogFactorial),
        }
    }

    pub fn to_doc(&self) -> Result<WeightSequenceDoc> {
        match self {
            WeightSequence::Gevrey { s_star, scale } => {
                Ok(WeightSequenceDoc::Gevrey { s_star: *s_star, scale: *scale })
            }
            WeightSequence::LogFactorial => Ok(WeightSequenceDoc::LogFactorial),
            WeightSequence::Custom { name, .. } => {
                Err(Error::Input(format!("custom sequence '{name}' has no serialized form")))
            }
        }
    }

    pub fn name(&self) -> String {
        format!("{self:?}").replace("WeightSequence::", "")
    }

    /// ln K_p for p = 0..=p_max; the factorial accumulates as a running sum
    /// of logs, so the whole table costs one pass.
    pub fn ln_table(&self, p_max: u32) -> Vec<f64> {
        let n = p_max as usize + 1;
        match self {
            WeightSequence::Gevrey { s_star, scale } => {
                let mut out = Vec::with_capacity(n);
                let mut ln_fact = 0.0f64;
                let ln_scale = scale.ln();
                for p in 0..n {
                    if p > 0 {
                        ln_fact += (p as f64).ln();
                    }
                    out.push(s_star * ln_fact + p as f64 * ln_scale);
                }
                out
            }
            WeightSequence::LogFactorial => (0..n)
                .map(|p| {
                    let pf = p as f64;
                    pf * ((pf + 1.0).ln() + (std::f64::consts::E + pf).ln().ln())
                })
                .collect(),
            WeightSequence::Custom { ln_k, .. } => (0..n as u32).map(|p| ln_k(p)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeRow {
    pub xi: f64,
    pub eta: f64,
    /// min over p <= p_max of ln K_p - p ln xi.
    pub ln_inf: f64,
    pub argmin_p: u32,
    /// ln_inf + delta0 * eta; the envelope condition asks this to stay
    /// bounded above across the grid.
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    pub delta0: f64,
    pub p_max: u32,
    pub rows: Vec<EnvelopeRow>,
    pub max_slack: f64,
    /// Slope of slack against eta; positive beyond tolerance means the decay
    /// of the infimum cannot pay for delta0 * eta.
    pub slope_vs_eta: f64,
    /// Set when some argmin hit p_max; the scan then certifies nothing.
    pub inconclusive: bool,
    pub pass: bool,
}

/// Tolerance on `slope_vs_eta` above which the slack is considered growing.
pub const ENVELOPE_SLOPE_TOL: f64 = 0.02;

/// Measure the envelope-decay slack of {K_p} against eta at rate delta0 on a
/// frequency grid.  Pass means: no truncation hit, and slack neither exceeds
/// its low-frequency level by trend (slope vs eta <= tolerance).
pub fn check_envelope_decay(
    seq: &WeightSequence,
    eta: impl Fn(f64) -> Result<f64>,
    delta0: f64,
    xi_grid: &[f64],
    p_max: u32,
) -> Result<EnvelopeReport> {
    if !(delta0 > 0.0) {
        return Err(Error::Input(format!("decay rate delta0 must be > 0, got {delta0}")));
    }
    if xi_grid.len() < 2 {
        return Err(Error::Input("envelope check needs at least 2 grid points".into()));
    }
    let ln_ks = seq.ln_table(p_max);
    let mut rows = Vec::with_capacity(xi_grid.len());
    let mut inconclusive = false;
    for &xi in xi_grid {
        if !(xi > 1.0) {
            return Err(Error::Input(format!("envelope grid point {xi} must exceed 1")));
        }
        let ln_xi = xi.ln();
        let mut best = f64::INFINITY;
        let mut argmin = 0u32;
        for (p, &ln_k) in ln_ks.iter().enumerate() {
            let v = ln_k - p as f64 * ln_xi;
            if v < best {
                best = v;
                argmin = p as u32;
            }
        }
        if argmin == p_max {
            inconclusive = true;
        }
        let e = eta(xi)?;
        rows.push(EnvelopeRow { xi, eta: e, ln_inf: best, argmin_p: argmin, slack: best + delta0 * e });
    }
    let max_slack = rows.iter().map(|r| r.slack).fold(f64::NEG_INFINITY, f64::max);
    let etas: Vec<f64> = rows.iter().map(|r| r.eta).collect();
    let slacks: Vec<f64> = rows.iter().map(|r| r.slack).collect();
    let line = fitting::fit_line(&etas, &slacks)?;
    let pass = !inconclusive && line.slope <= ENVELOPE_SLOPE_TOL;
    Ok(EnvelopeReport {
        delta0,
        p_max,
        rows,
        max_slack,
        slope_vs_eta: line.slope,
        inconclusive,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::log_grid;
    use proptest::prelude::*;

    fn catalog() -> Vec<Modulus> {
        vec![
            Modulus::Lipschitz,
            Modulus::LogLip,
            Modulus::log_log_lip(1).unwrap(),
            Modulus::log_log_lip(2).unwrap(),
            Modulus::hoelder(0.5).unwrap(),
            Modulus::log_inverse(2.0).unwrap(),
        ]
    }

    #[test]
    fn catalog_spot_values() {
        assert_eq!(Modulus::Lipschitz.phi(123.0).unwrap(), 1.0);
        // Hoelder(1/2) at x = 1e4: x * (1/x)^{1/2} = 100.
        let h = Modulus::hoelder(0.5).unwrap();
        assert!((h.phi(1e4).unwrap() - 100.0).abs() < 1e-10);
        // LogInverse(2) at x = e^10: x (10+1)^{-2}; 30-digit reference.
        let li = Modulus::log_inverse(2.0).unwrap();
        let x = 10f64.exp();
        assert!((li.phi(x).unwrap() - 182.036_907_395_096_83).abs() < 1e-10);
        // LogLip phi is exactly log x + 1.
        let ll = Modulus::LogLip.phi(1e3).unwrap();
        assert!((ll - (1e3f64.ln() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn iterated_log_domain_and_round_trip() {
        assert_eq!(iterated_log(0, 7.5).unwrap(), 7.5);
        let x = 1.7;
        for k in 0..4 {
            let y = iterated_exp(k, x);
            assert!((iterated_log(k, y).unwrap() - x).abs() < 1e-9, "level {k}");
        }
        let err = iterated_log(2, 1.0).unwrap_err().to_string();
        assert!(err.contains("level 2"), "{err}");
        // Negative but defined: lnln 2 < 0 is still within the domain.
        assert!(iterated_log(2, 2.0).unwrap() < 0.0);
        assert!(iterated_log(3, 2.0).unwrap_err().to_string().contains("level 3"));
    }

    #[test]
    fn log_log_lip_domain_cap() {
        let m1 = Modulus::log_log_lip(1).unwrap();
        assert!((m1.s_max() - (-2.0f64).exp()).abs() < 1e-15);
        let m2 = Modulus::log_log_lip(2).unwrap();
        assert!((m2.s_max() - (-std::f64::consts::E).exp()).abs() < 1e-15);
        assert!(m2.eval(0.5).is_err());
        assert!(m2.eval(0.05).is_ok());
        // phi respects the shifted domain floor.
        assert!(m2.phi(10.0).is_err());
        assert!(m2.phi(16.0).is_ok());
    }

    #[test]
    fn model_forms_within_bounded_ratio() {
        // Tabulated asymptotic forms track the exact phi within [1/4, 4]
        // across [1e2, 1e8].
        for m in catalog() {
            let grid = log_grid(m.phi_min_x().max(1e2), 1e8, 25);
            for &x in &grid {
                let ratio = m.phi(x).unwrap() / m.phi_model(x).unwrap();
                assert!(
                    (0.25..=4.0).contains(&ratio),
                    "{m:?} at x = {x}: ratio = {ratio}"
                );
            }
        }
    }

    #[test]
    fn concavity_on_midpoints() {
        for m in catalog() {
            let hi = m.s_max();
            let grid = log_grid(hi * 1e-9, hi, 17);
            for pair in grid.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let mid = 0.5 * (a + b);
                let lhs = m.eval(mid).unwrap();
                let rhs = 0.5 * (m.eval(a).unwrap() + m.eval(b).unwrap());
                assert!(lhs >= rhs - 1e-12, "{m:?} midpoint at ({a}, {b})");
            }
        }
    }

    proptest! {
        #[test]
        fn increasing_and_s_over_mu_monotone(raw_a in 1e-9f64..1.0, raw_b in 1e-9f64..1.0) {
            for m in catalog() {
                let cap = m.s_max();
                let (a, b) = (raw_a * cap, raw_b * cap);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                prop_assume!(hi > lo * (1.0 + 1e-12));
                let (mu_lo, mu_hi) = (m.eval(lo).unwrap(), m.eval(hi).unwrap());
                // mu increasing
                prop_assert!(mu_hi >= mu_lo * (1.0 - 1e-12), "{:?}", m);
                // mu(s)/s decreasing (concavity through the origin)
                prop_assert!(mu_lo / lo >= mu_hi / hi * (1.0 - 1e-12), "{:?}", m);
            }
        }

        #[test]
        fn subadditive_on_random_pairs(raw_a in 1e-9f64..0.5, raw_b in 1e-9f64..0.5) {
            for m in catalog() {
                let cap = m.s_max();
                let (a, b) = (raw_a * cap, raw_b * cap);
                let sum = m.eval(a + b).unwrap();
                prop_assert!(
                    sum <= m.eval(a).unwrap() + m.eval(b).unwrap() + 1e-12,
                    "{:?} at ({}, {})", m, a, b
                );
            }
        }
    }

    #[test]
    fn gevrey_ln_table_matches_log_gamma() {
        let seq = WeightSequence::gevrey(2.0, 1.0).unwrap();
        let t = seq.ln_table(6);
        // 2 ln(p!) directly: p=6 -> 2 ln 720.
        assert!((t[6] - 2.0 * 720f64.ln()).abs() < 1e-10);
        assert_eq!(t[0], 0.0);
        // scale enters as p * ln A.
        let seq = WeightSequence::gevrey(2.0, 3.0).unwrap();
        let t = seq.ln_table(4);
        assert!((t[4] - (2.0 * 24f64.ln() + 4.0 * 3f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn envelope_slack_frozen_values() {
        // Gevrey (s*=2, A=1) against eta = sqrt(xi), delta0 = 1/2.
        // 30-digit scan: slack(1e2) = -10.84287671..., argmin 9;
        // slack(1e4) = -143.55528608..., argmin 99.
        let seq = WeightSequence::gevrey(2.0, 1.0).unwrap();
        let grid = [1e2, 1e4, 1e6];
        let rep = check_envelope_decay(&seq, |x| Ok(x.sqrt()), 0.5, &grid, 1200).unwrap();
        assert!(rep.pass);
        assert!(!rep.inconclusive);
        assert_eq!(rep.rows[0].argmin_p, 9);
        assert_eq!(rep.rows[1].argmin_p, 99);
        assert_eq!(rep.rows[2].argmin_p, 999);
        assert!((rep.rows[0].slack - -10.842_876_713_729_883).abs() < 1e-8);
        assert!((rep.rows[1].slack - -143.555_286_086_491_29).abs() < 1e-7);
        assert!((rep.rows[2].slack - -1491.254_200_987_947_4).abs() < 1e-6);
        assert_eq!(rep.max_slack, rep.rows[0].slack);
    }

    #[test]
    fn envelope_rejects_too_strong_eta() {
        // eta = xi asks more decay than (p!)^2 xi^{-p} can provide:
        // slack(1e2) = 84.157..., slack(1e3) = 942.044... and growing.
        let seq = WeightSequence::gevrey(2.0, 1.0).unwrap();
        let rep = check_envelope_decay(&seq, Ok, 1.0, &[1e2, 1e3], 1200).unwrap();
        assert!(!rep.pass);
        assert!(!rep.inconclusive);
        assert!((rep.rows[0].slack - 84.157_123_286_270_12).abs() < 1e-8);
        assert!((rep.rows[1].slack - 942.044_033_458_184_4).abs() < 1e-7);
        assert!(rep.slope_vs_eta > ENVELOPE_SLOPE_TOL);
    }

    #[test]
    fn envelope_log_factorial_sequence() {
        // K_p = ((p+1) log(e+p))^p against eta = xi/log xi; frozen slacks
        // -1.88178..., -5.01531..., -10.90082... at xi = 1e2, 10^2.5, 1e3.
        let seq = WeightSequence::LogFactorial;
        let eta = |x: f64| Ok(x / x.ln());
        let grid = [1e2, 3.16e2, 1e3];
        let rep = check_envelope_decay(&seq, eta, 0.5, &grid, 2000).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.rows[0].argmin_p, 10);
        assert_eq!(rep.rows[2].argmin_p, 69);
        assert!((rep.rows[0].slack - -1.881_783_068_963_376_3).abs() < 1e-9);
        assert!((rep.rows[2].slack - -10.900_820_755_260_879).abs() < 1e-8);

        let rep = check_envelope_decay(&seq, eta, 2.0, &[1e2, 1e3], 2000).unwrap();
        assert!(!rep.pass);
        assert!((rep.rows[0].slack - 30.690_303_073_780_51).abs() < 1e-8);
        assert!((rep.rows[1].slack - 206.246_420_196_365_03).abs() < 1e-7);
    }

    #[test]
    fn envelope_truncation_is_flagged() {
        // p_max far below the true minimizer (about sqrt(xi)).
        let seq = WeightSequence::gevrey(2.0, 1.0).unwrap();
        let rep = check_envelope_decay(&seq, |x| Ok(x.sqrt()), 0.5, &[1e4, 1e6], 20).unwrap();
        assert!(rep.inconclusive);
        assert!(!rep.pass);
    }

    #[test]
    fn serialization_round_trip() {
        let doc = Modulus::hoelder(0.5).unwrap().to_doc().unwrap();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"kind\":\"hoelder\""), "{json}");
        let back = Modulus::from_doc(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.eval(0.3).unwrap(), 0.3f64.sqrt());
    }
}
