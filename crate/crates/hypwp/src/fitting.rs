//! Least-squares line fits used by the asymptotic checks.
//!
//! Everything in this crate that claims "grows like a power" or "ratio has no
//! trend" reduces to fitting a straight line in log coordinates and looking
//! at the slope.  Keeping the fit in one place keeps those claims comparable.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the residuals around the fitted line.
    pub residual_rms: f64,
}

/// Ordinary least squares y = slope * x + intercept.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<Line> {
    if xs.len() != ys.len() {
        return Err(Error::Input(format!(
            "fit grids differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Input("line fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Input("line fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum();
    Ok(Line { slope, intercept, residual_rms: (ss / n).sqrt() })
}

/// Least squares y = c * x with the intercept pinned at the origin.
/// Returns (c, residual rms).
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::Input(format!(
            "fit grids differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.is_empty() {
        return Err(Error::Input("origin fit needs at least one point".into()));
    }
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if sxx == 0.0 {
        return Err(Error::Input("origin fit abscissae are all zero".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let c = sxy / sxx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - c * x;
            r * r
        })
        .sum();
    Ok((c, (ss / xs.len() as f64).sqrt()))
}

/// Fit ln y against ln x.  The slope is the empirical power-law exponent.
/// Requires strictly positive data; the error message names the offending
/// index because these grids are usually machine-generated.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<Line> {
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        if !(*x > 0.0) || !(*y > 0.0) {
            return Err(Error::Domain(format!(
                "log-log fit needs positive data; point {i} is ({x:e}, {y:e})"
            )));
        }
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let l = fit_line(&xs, &ys).unwrap();
        assert!((l.slope - 2.0).abs() < 1e-14);
        assert!((l.intercept - 1.0).abs() < 1e-13);
        assert!(l.residual_rms < 1e-14);
    }

    #[test]
    fn power_law_exponent() {
        let xs: Vec<f64> = (1..=20).map(|k| 10.0f64.powf(k as f64 / 4.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(0.75)).collect();
        let l = log_log_fit(&xs, &ys).unwrap();
        assert!((l.slope - 0.75).abs() < 1e-12, "slope {}", l.slope);
    }

    #[test]
    fn origin_fit() {
        let xs = [1.0, 2.0, 4.0];
        let ys = [2.1, 3.9, 8.0];
        let (c, _) = fit_through_origin(&xs, &ys).unwrap();
        assert!((c - 2.0).abs() < 0.05, "c = {c}");
    }

    #[test]
    fn mismatched_grids_rejected() {
        assert!(fit_line(&[1.0, 2.0], &[1.0]).is_err());
    }
}
