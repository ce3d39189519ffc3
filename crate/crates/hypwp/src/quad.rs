//! One-dimensional quadrature.
//!
//! Two tools live here: an adaptive Gauss-Kronrod 7-15 integrator used for
//! every primitive and weight integral in the crate, and fixed Gauss-Legendre
//! rules used by the mollifier (where the integrand is re-evaluated at the
//! same relative nodes for every output point, so a fixed rule is both faster
//! and exactly reproducible).
//!
//! The endpoint-degenerate integrals (primitives of flat shape functions,
//! weight integrals with an integrable singularity at 0) are not handled here
//! by clever endpoint rules; callers substitute into logarithmic variables
//! first and hand this module a smooth integrand on a finite interval.

use crate::error::{Error, Result};

/// Kronrod abscissae for the 7-15 pair, nonnegative half (interval [-1,1]).
/// Odd indices are the embedded Gauss-7 points.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Conservative absolute error estimate (sum of per-interval estimates).
    pub abs_error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

/// One Gauss-Kronrod 7-15 pass over [a, b]: returns (kronrod, error estimate).
fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_int = fc.abs() * WGK[7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        kronrod += (f1 + f2) * WGK[i];
        abs_int += (f1.abs() + f2.abs()) * WGK[i];
        if i % 2 == 1 {
            gauss += (f1 + f2) * WG[i / 2];
        }
    }
    kronrod *= half;
    gauss *= half;
    abs_int *= half.abs();
    // QUADPACK-style sharpened estimate: the raw |K - G| difference badly
    // overestimates once the rule is converging.
    let diff = (kronrod - gauss).abs();
    let err = if abs_int > 0.0 && diff > 0.0 {
        let scaled = (200.0 * diff / abs_int).powf(1.5) * abs_int;
        scaled.min(diff)
    } else {
        diff
    };
    (kronrod, err, abs_int)
}

/// Adaptive integration of `f` over [a, b] to relative tolerance `rel_tol`
/// (with `abs_tol` as a floor for integrals near zero).  Worst-interval-first
/// refinement; deterministic for a given integrand.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "quadrature interval [{a}, {b}] must be finite"
        )));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0, subdivisions: 0 });
    }
    let mut evals = 0usize;
    let mut call = |x: f64| {
        evals += 1;
        let v = f(x);
        if v.is_nan() {
            // Poisoning the sum makes the failure visible in the tolerance
            // check below instead of silently integrating garbage.
            f64::NAN
        } else {
            v
        }
    };

    struct Interval {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }

    let (v0, e0, _) = gk15(&mut call, a, b);
    let mut heap: Vec<Interval> = vec![Interval { a, b, value: v0, err: e0 }];
    let mut subdivisions = 0usize;
    const MAX_INTERVALS: usize = 4096;

    loop {
        let total: f64 = heap.iter().map(|iv| iv.value).sum();
        let total_err: f64 = heap.iter().map(|iv| iv.err).sum();
        if total.is_nan() {
            return Err(Error::Numerical(
                "quadrature integrand returned NaN".to_string(),
            ));
        }
        let target = abs_tol.max(rel_tol * total.abs());
        if total_err <= target {
            return Ok(QuadResult {
                value: total,
                abs_error: total_err,
                evaluations: evals,
                subdivisions,
            });
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "quadrature did not reach tolerance {rel_tol:.1e} on [{a}, {b}] \
                 after {MAX_INTERVALS} subdivisions (error estimate {total_err:.3e})"
            )));
        }
        // Split the interval with the largest error estimate.
        let worst = heap
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let iv = heap.swap_remove(worst);
        let mid = 0.5 * (iv.a + iv.b);
        if mid <= iv.a || mid >= iv.b {
            return Err(Error::Numerical(format!(
                "quadrature interval collapsed at t = {mid:e}; \
                 integrand is too singular for the requested tolerance"
            )));
        }
        let (vl, el, _) = gk15(&mut call, iv.a, mid);
        let (vr, er, _) = gk15(&mut call, mid, iv.b);
        heap.push(Interval { a: iv.a, b: mid, value: vl, err: el });
        heap.push(Interval { a: mid, b: iv.b, value: vr, err: er });
        subdivisions += 1;
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.  Symmetric,
/// deterministic; accuracy is ~1 ulp for the orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Gauss-Legendre order must be at least 2");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // p_{k+1}(x) via the three-term recurrence.
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
