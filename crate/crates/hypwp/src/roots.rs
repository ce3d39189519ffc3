//! Scalar root bracketing.
//!
//! Plain bisection.  The maps inverted in this crate (zone boundary in time,
//! primitive inversion) are monotone with brackets of known sign, and the
//! integrands behind them are expensive enough that the guaranteed 2x
//! reduction per step beats a cleverer method that can stall on the nearly
//! flat stretches these weights produce.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub root: f64,
    /// f at the returned point; recorded so callers can judge conditioning.
    pub residual: f64,
    pub iterations: usize,
}

/// Find a sign change of `f` in [lo, hi] to absolute x-tolerance `x_tol`.
/// Requires f(lo) and f(hi) of opposite (or zero) sign.
pub fn bisect(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> Result<Bracket> {
    if !(lo < hi) {
        return Err(Error::Domain(format!("bisection bracket [{lo}, {hi}] is empty")));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(Bracket { root: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Bracket { root: b, residual: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "bisection bracket [{lo:e}, {hi:e}] does not straddle a root \
             (f = {fa:e} and {fb:e})"
        )));
    }
    let mut iterations = 0usize;
    while b - a > x_tol {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::Numerical(format!(
                "bisection stalled after 200 iterations on [{a:e}, {b:e}]"
            )));
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // interval at floating point resolution
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(Bracket { root: mid, residual: 0.0, iterations });
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);
    let residual = f(root)?;
    Ok(Bracket { root, residual, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!((r.root - std::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn rejects_unbracketed() {
        let e = bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(e, Error::Numerical(_)));
    }

    #[test]
    fn endpoint_root_returns_immediately() {
        let r = bisect(|x| Ok(x - 1.0), 1.0, 3.0, 1e-12).unwrap();
        assert_eq!(r.root, 1.0);
        assert_eq!(r.iterations, 0);
    }
}
