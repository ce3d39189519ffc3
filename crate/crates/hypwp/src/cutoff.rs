//! The zone blending cutoff.
//!
//! `chi` is the C^2 function that switches the energy symbol from its
//! low-frequency branch to its hyperbolic branch.  It is 1 on (-inf, 1],
//! 0 on [2, inf), and on the blend interval 1 < s < 2 it is the reflected
//! degree-5 smoothstep, published here bit-exactly:
//!
//! ```text
//! chi(1 + u) = 1 - u^3 * (10 - 15 u + 6 u^2),   0 <= u <= 1
//! ```
//!
//! Every consumer (energy symbol, system assembly, conjugator integrands)
//! calls this one definition, so blend-region numbers agree digit for digit
//! across the crate.

/// Cutoff value; 1 below 1, 0 above 2, C^2 across both joints.
pub fn chi(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let u = s - 1.0;
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// d chi / d s.  Zero outside the blend interval.
pub fn chi_prime(s: f64) -> f64 {
    if s <= 1.0 || s >= 2.0 {
        0.0
    } else {
        let u = s - 1.0;
        -30.0 * u * u * (1.0 - u) * (1.0 - u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(2.0), 0.0);
        assert_eq!(chi(5.0), 0.0);
        assert_eq!(chi(1.5), 0.5);
    }

    #[test]
    fn monotone_decreasing_on_blend() {
        let mut prev = chi(1.0);
        for k in 1..=1000 {
            let v = chi(1.0 + k as f64 / 1000.0);
            assert!(v <= prev + 1e-15, "not monotone at {k}");
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for s in [1.01, 1.3, 1.5, 1.77, 1.99] {
            let h = 1e-6;
            let fd = (chi(s + h) - chi(s - h)) / (2.0 * h);
            assert!(
                (fd - chi_prime(s)).abs() < 1e-8,
                "s = {s}: fd {fd} vs {}",
                chi_prime(s)
            );
        }
    }

    #[test]
    fn c2_joints() {
        // chi' and chi'' vanish at both ends of the blend interval.
        assert!(chi_prime(1.0 + 1e-8).abs() < 1e-14);
        assert!(chi_prime(2.0 - 1e-8).abs() < 1e-14);
    }
}
