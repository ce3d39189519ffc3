//! Dormand-Prince 5(4) for small complex systems.
//!
//! The mode equations are first-order systems of size m <= 3 over one real
//! time variable, integrated many times across a frequency grid, so the
//! state is a fixed array and the stepper never allocates per step.
//! Error control uses the componentwise scaled RMS norm on complex moduli.
//!
//! Right-hand sides may be discontinuous at known times (zone cutoffs,
//! coefficient switches); pass those as forced points and the stepper lands
//! on them exactly instead of straddling them.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;
pub type State = [Complex64; MAX_DIM];

pub fn zero_state() -> State {
    [Complex64::new(0.0, 0.0); MAX_DIM]
}

#[derive(Debug, Clone)]
pub struct OdeOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: u64,
    /// Integrate in u = ln t.  For shapes that are flat to all orders at
    /// t = 0 the interesting dynamics stretch over many decades of t and a
    /// linear-time stepper starves; the substitution makes those runs
    /// cheap.  Requires 0 < t0 < t1.
    pub log_time: bool,
}

impl Default for OdeOpts {
    fn default() -> Self {
        OdeOpts { rel_tol: 1e-10, abs_tol: 1e-12, max_steps: 20_000_000, log_time: false }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OdeStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evaluations: u64,
    pub min_step: f64,
}

// Dormand-Prince coefficients.  The 5th-order weights are row a7; the
// embedded error weights are b5 - b4.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri<'a, F> {
    dim: usize,
    rhs: F,
    opts: &'a OdeOpts,
    stats: OdeStats,
}

impl<'a, F> Dopri<'a, F>
where
    F: FnMut(f64, &State, &mut State) -> Result<()>,
{
    fn eval(&mut self, t: f64, y: &State, out: &mut State) -> Result<()> {
        self.stats.rhs_evaluations += 1;
        (self.rhs)(t, y, out)?;
        for c in out.iter().take(self.dim) {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::Numerical(format!(
                    "right-hand side produced a non-finite value at t = {t:e}"
                )));
            }
        }
        Ok(())
    }

    /// One adaptive step from (t, y); h is updated in place.  Returns the
    /// new t on acceptance.  Stage times are capped at `t_cap`: the
    /// coefficient may jump at the segment's right endpoint and this
    /// segment must only ever see the left-limit values.
    fn step(
        &mut self,
        t: f64,
        y: &mut State,
        h: &mut f64,
        t_cap: f64,
        k1: &mut State,
        k1_valid: &mut bool,
    ) -> Result<Option<f64>> {
        let dim = self.dim;
        let mut k = [zero_state(); 7];
        if !*k1_valid {
            self.eval(t, y, k1)?;
            *k1_valid = true;
        }
        k[0] = *k1;
        let mut stage = zero_state();
        for i in 1..7 {
            for d in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(i) {
                    if A[i][j] != 0.0 {
                        acc += kj[d] * A[i][j];
                    }
                }
                stage[d] = y[d] + acc * *h;
            }
            let ti = (t + C[i] * *h).min(t_cap);
            let (head, tail) = k.split_at_mut(i);
            let _ = head;
            self.eval(ti, &stage, &mut tail[0])?;
        }
        // 5th-order candidate is the last stage argument (FSAL): stage was
        // built with row a7 on the final pass.
        let y1 = stage;
        let mut err = 0.0f64;
        for d in 0..dim {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += kj[d] * E[j];
                }
            }
            let sc = self.opts.abs_tol
                + self.opts.rel_tol * y[d].norm().max(y1[d].norm());
            let r = (e * *h).norm() / sc;
            err += r * r;
        }
        err = (err / dim as f64).sqrt();
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        if err <= 1.0 {
            let t_new = t + *h;
            *y = y1;
            *k1 = k[6];
            self.stats.accepted += 1;
            self.stats.min_step = if self.stats.min_step == 0.0 {
                h.abs()
            } else {
                self.stats.min_step.min(h.abs())
            };
            *h *= factor;
            Ok(Some(t_new))
        } else {
            self.stats.rejected += 1;
            *k1_valid = true; // k1 unchanged, still valid at (t, y)
            *h *= factor.min(1.0);
            if t + *h == t {
                return Err(step_underflow(t));
            }
            Ok(None)
        }
    }
}

/// Closer than this and a target is considered reached; about 2 ulps.
fn resolve_tol(u: f64) -> f64 {
    4.0 * f64::EPSILON * u.abs()
}

fn step_underflow(t: f64) -> Error {
    Error::Numerical(format!(
        "step size no longer advances time at t = {t:e}; if the dynamics \
         stretch over many decades, integrate in log_time instead"
    ))
}

/// Integrate dy/dt = rhs(t, y) from t0 to t1 > t0.
///
/// `forced` lists interior times the stepper must hit exactly.  The
/// observer sees every accepted step including the forced landings and the
/// endpoint.
pub fn integrate_ode(
    dim: usize,
    rhs: impl FnMut(f64, &State, &mut State) -> Result<()>,
    t0: f64,
    t1: f64,
    y0: State,
    forced: &[f64],
    opts: &OdeOpts,
    mut observer: Option<&mut dyn FnMut(f64, &State)>,
) -> Result<(State, OdeStats)> {
    if !(dim >= 1 && dim <= MAX_DIM) {
        return Err(Error::Input(format!("system dimension must be 1..={MAX_DIM}, got {dim}")));
    }
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Input(format!("need t0 < t1 finite, got [{t0}, {t1}]")));
    }
    if opts.log_time && !(t0 > 0.0) {
        return Err(Error::Input(format!(
            "log-time integration needs t0 > 0, got {t0}"
        )));
    }

    // In log time the problem is rewritten as dy/du = e^u rhs(e^u, y) and
    // all bookkeeping (targets, observer) maps back through t = e^u.
    let mut targets: Vec<f64> = forced
        .iter()
        .copied()
        .filter(|&x| x > t0 && x < t1)
        .collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets.dedup();
    targets.push(t1);
    let to_u = |t: f64| if opts.log_time { t.ln() } else { t };
    let from_u = |u: f64| if opts.log_time { u.exp() } else { u };

    let u0 = to_u(t0);
    let u_end = to_u(t1);
    let span = u_end - u0;

    let mut y = y0;
    let mut driver;
    {
        let mut inner = rhs;
        let log_time = opts.log_time;
        driver = move |u: f64, yy: &State, out: &mut State| -> Result<()> {
            if log_time {
                let t = u.exp();
                inner(t, yy, out)?;
                for c in out.iter_mut() {
                    *c *= t;
                }
                Ok(())
            } else {
                inner(u, yy, out)
            }
        };
    }
    let mut solver = Dopri {
        dim,
        rhs: &mut driver,
        opts,
        stats: OdeStats::default(),
    };

    let mut u = u0;
    let mut h = span * 1e-4;
    let mut k1 = zero_state();
    let mut k1_valid = false;
    for &target in &targets {
        let u_target = to_u(target);
        let u_cap = u_target.next_down();
        loop {
            let remaining = u_target - u;
            if remaining <= resolve_tol(u) {
                u = u_target;
                break;
            }
            let trial = h.min(remaining);
            if u + trial == u {
                return Err(step_underflow(from_u(u)));
            }
            let mut h_step = trial;
            if solver.stats.accepted + solver.stats.rejected >= opts.max_steps {
                return Err(Error::Numerical(format!(
                    "step budget {} exhausted at t = {:e} of [{t0:e}, {t1:e}]",
                    opts.max_steps,
                    from_u(u)
                )));
            }
            match solver.step(u, &mut y, &mut h_step, u_cap, &mut k1, &mut k1_valid)? {
                Some(u_new) => {
                    let hit_target = (u_target - u_new).abs() <= resolve_tol(u_new);
                    u = if hit_target { u_target } else { u_new };
                    if h_step > trial && trial == remaining {
                        // Step was clipped to the target; let h keep its
                        // controller value rather than the clipped one.
                        h = h_step.max(h);
                    } else {
                        h = h_step;
                    }
                    if let Some(obs) = observer.as_deref_mut() {
                        obs(from_u(u), &y);
                    }
                    if hit_target {
                        break;
                    }
                }
                None => {
                    h = h_step;
                }
            }
        }
        // Coefficients may jump at forced points; never reuse the last
        // stage across one.
        k1_valid = false;
    }
    Ok((y, solver.stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_exponential() {
        let lam = c(-1.0, 2.0);
        let mut y0 = zero_state();
        y0[0] = c(1.0, 0.0);
        let (y, stats) = integrate_ode(
            1,
            |_t, y, out| {
                out[0] = lam * y[0];
                Ok(())
            },
            0.0,
            1.0,
            y0,
            &[],
            &OdeOpts::default(),
            None,
        )
        .unwrap();
        let exact = lam.exp();
        assert!((y[0] - exact).norm() < 1e-9, "{:?} vs {exact:?}", y[0]);
        assert!(stats.accepted > 0);
        // FSAL: first stage of each step reuses the last stage of the
        // previous one, so only the very first costs an extra evaluation.
        assert_eq!(stats.rhs_evaluations, 6 * (stats.accepted + stats.rejected) + 1);
    }

    #[test]
    fn rotation_preserves_modulus() {
        let mut y0 = zero_state();
        y0[0] = c(1.0, 0.0);
        let (y, _) = integrate_ode(
            1,
            |_t, y, out| {
                out[0] = c(0.0, 1.0) * y[0];
                Ok(())
            },
            0.0,
            10.0,
            y0,
            &[],
            &OdeOpts::default(),
            None,
        )
        .unwrap();
        assert!((y[0].norm() - 1.0).abs() < 1e-9);
        assert!((y[0] - c(10.0, 0.0).scale(0.0).exp() * c(0.0, 10.0).exp()).norm() < 1e-8);
    }

    #[test]
    fn wave_energy_conserved() {
        let omega = 5.0;
        let mut y0 = zero_state();
        y0[0] = c(1.0, 0.0);
        y0[1] = c(0.0, 0.3);
        let energy = |y: &State| omega * omega * y[0].norm_sqr() + y[1].norm_sqr();
        let e0 = energy(&y0);
        let (y, _) = integrate_ode(
            2,
            |_t, y, out| {
                out[0] = y[1];
                out[1] = -omega * omega * y[0];
                Ok(())
            },
            0.0,
            20.0,
            y0,
            &[],
            &OdeOpts::default(),
            None,
        )
        .unwrap();
        assert!((energy(&y) / e0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tolerance_scaling() {
        let run = |tol: f64| {
            let mut y0 = zero_state();
            y0[0] = c(0.0, 0.0);
            let (y, _) = integrate_ode(
                1,
                |t, _y, out| {
                    out[0] = c(t.cos(), 0.0);
                    Ok(())
                },
                0.0,
                2.0,
                y0,
                &[],
                &OdeOpts { rel_tol: tol, abs_tol: tol * 1e-2, ..OdeOpts::default() },
                None,
            )
            .unwrap();
            (y[0].re - 2.0f64.sin()).abs()
        };
        let loose = run(1e-6);
        let tight = run(1e-11);
        assert!(tight < 1e-10, "{tight}");
        assert!(tight < loose);
    }

    #[test]
    fn forced_points_resolve_jumps() {
        // dy/dt = 1 below t = 1/2, else 0; landing on the jump exactly
        // makes the quadrature of the jump exact.
        let rhs = |t: f64, _y: &State, out: &mut State| {
            out[0] = if t < 0.5 { c(1.0, 0.0) } else { c(0.0, 0.0) };
            Ok(())
        };
        let (y, _) = integrate_ode(
            1,
            rhs,
            0.0,
            1.0,
            zero_state(),
            &[0.5],
            &OdeOpts::default(),
            None,
        )
        .unwrap();
        assert!((y[0].re - 0.5).abs() < 1e-12, "{}", y[0].re);

        let mut seen_half = false;
        let mut obs = |t: f64, _y: &State| {
            if t == 0.5 {
                seen_half = true;
            }
        };
        integrate_ode(1, rhs, 0.0, 1.0, zero_state(), &[0.5], &OdeOpts::default(), Some(&mut obs))
            .unwrap();
        assert!(seen_half, "stepper must land on forced points exactly");
    }

    #[test]
    fn log_time_handles_wide_ranges() {
        // dy/dt = (i/t) y over 12 decades: y(b)/y(a) = (b/a)^i.
        let rhs = |t: f64, y: &State, out: &mut State| {
            out[0] = c(0.0, 1.0) / t * y[0];
            Ok(())
        };
        let mut y0 = zero_state();
        y0[0] = c(1.0, 0.0);
        let opts = OdeOpts { log_time: true, ..OdeOpts::default() };
        let (y, stats) = integrate_ode(1, rhs, 1e-12, 1.0, y0, &[], &opts, None).unwrap();
        let exact = (c(0.0, 1.0) * (1e12f64).ln()).exp();
        assert!((y[0] - exact).norm() < 1e-7, "{:?} vs {exact:?}", y[0]);
        // The same run in linear time would need ~1e12 steps near the
        // left end; in log time it is a few hundred.
        assert!(stats.accepted < 10_000, "{}", stats.accepted);

        assert!(integrate_ode(1, rhs, 0.0, 1.0, y0, &[], &opts, None).is_err());
    }

    #[test]
    fn budget_and_underflow_guards() {
        let rhs = |_t: f64, y: &State, out: &mut State| {
            out[0] = c(0.0, 50.0) * y[0];
            Ok(())
        };
        let mut y0 = zero_state();
        y0[0] = c(1.0, 0.0);
        let opts = OdeOpts { max_steps: 10, ..OdeOpts::default() };
        let err = integrate_ode(1, rhs, 0.0, 100.0, y0, &[], &opts, None).unwrap_err();
        assert!(format!("{err}").contains("step budget"), "{err}");

        // With t so large that f64 cannot resolve steps across the span,
        // the floor trips and the message points at the remedy.
        let err = integrate_ode(1, rhs, 1e15, 1e15 + 1.0, y0, &[], &OdeOpts::default(), None)
            .unwrap_err();
        assert!(format!("{err}").contains("log_time"), "{err}");

        // A forced point below the floor is merged into the start rather
        // than fought over.
        let res = integrate_ode(1, rhs, 0.0, 1.0, y0, &[1e-300], &OdeOpts::default(), None);
        assert!(res.is_ok());
    }

    #[test]
    fn rhs_errors_propagate() {
        let rhs = |t: f64, _y: &State, out: &mut State| {
            if t > 0.5 {
                return Err(Error::Domain("coefficient left its domain".into()));
            }
            out[0] = c(1.0, 0.0);
            Ok(())
        };
        let err =
            integrate_ode(1, rhs, 0.0, 1.0, zero_state(), &[], &OdeOpts::default(), None)
                .unwrap_err();
        assert!(format!("{err}").contains("domain"), "{err}");

        let nan_rhs = |_t: f64, _y: &State, out: &mut State| {
            out[0] = c(f64::NAN, 0.0);
            Ok(())
        };
        let err =
            integrate_ode(1, nan_rhs, 0.0, 1.0, zero_state(), &[], &OdeOpts::default(), None)
                .unwrap_err();
        assert!(format!("{err}").contains("non-finite"), "{err}");
    }
}
