//! Deterministic number and table formatting for emitted artifacts.
//!
//! Every CSV cell goes through [`g17`]: scientific notation with 17
//! significant digits, enough to round-trip any f64, so two runs that compute
//! the same numbers emit byte-identical files regardless of worker count.
//! JSON reports are serialized with serde_json, whose float encoding is the
//! shortest round-trip form and equally deterministic.

use std::io::Write;

use crate::error::{Error, Result};

/// Format with 17 significant digits (1 leading + 16 fractional).
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write one CSV row of g17-formatted values after an optional leading cell.
pub fn write_csv_row(w: &mut dyn Write, cells: &[f64]) -> Result<()> {
    let row: Vec<String> = cells.iter().map(|c| g17(*c)).collect();
    writeln!(w, "{}", row.join(",")).map_err(|e| Error::Input(format!("write failed: {e}")))
}

pub fn write_csv_header(w: &mut dyn Write, names: &[&str]) -> Result<()> {
    writeln!(w, "{}", names.join(",")).map_err(|e| Error::Input(format!("write failed: {e}")))
}

/// Log-spaced grid of `points` values over [lo, hi], endpoints included.
/// This is the canonical frequency grid builder; keeping it here means every
/// consumer gets the identical floating point values for identical arguments.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2, "log_grid({lo}, {hi}, {points})");
    let la = lo.ln();
    let lb = hi.ln();
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == points - 1 {
                hi
            } else {
                (la + (lb - la) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips() {
        for x in [1.0, std::f64::consts::PI, 1e-300, -3.25e17, 0.1] {
            let s = g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "string {s}");
        }
    }

    #[test]
    fn log_grid_is_inclusive_and_sorted() {
        let g = log_grid(1e2, 1e8, 13);
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 1e2);
        assert_eq!(g[12], 1e8);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
