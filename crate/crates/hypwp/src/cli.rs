//! Command-line front end: load one experiment file, run an analysis,
//! simulation, or verification battery, and emit CSV/JSON artifacts.
//!
//! Every emitted file is deterministic for a fixed spec and flags: CSV cells
//! are printed with 17 significant digits, JSON floats in serde's shortest
//! round-trip form, and parallel reductions preserve grid order.  The worker
//! count changes wall time, never bytes.
//!
//! Exit codes: 0 success, 1 a verification suite reported a violated bound,
//! 2 malformed input (file, flags, spec), 3 a computation failed internally.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{self, GrowthComparison};
use crate::conjugator::{self, ConjugatorConfig};
use crate::error::{Error, Result};
use crate::leviweight::{self, WeightLaw};
use crate::moduli;
use crate::mollify::{self, MollifierKernel};
use crate::problem::{load_problem, LoadedProblem};
use crate::report::{log_grid, write_csv_header, write_csv_row};
use crate::spectral::IntegrateOpts;

#[derive(Debug, Parser)]
#[command(
    name = "hypwp",
    about = "Weight calculus and mode-amplification laboratory for weakly hyperbolic Cauchy problems",
    disable_help_subcommand = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Classify the problem: verdict plus the individual hypothesis checks.
    Analyze(CommonArgs),
    /// Tabulate the loss weights (xi, t_xi, w, W, M) over the frequency grid.
    Weights(CommonArgs),
    /// Integrate the model problem's Fourier modes and report amplification.
    Simulate(CommonArgs),
    /// Run every verification suite; exit 1 if any bound is violated.
    Verify(CommonArgs),
    /// Fit the measured Levi weight against the closed predicted form.
    Fit(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Problem file (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Output directory; created if absent.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "xi-min", default_value_t = 1e3)]
    pub xi_min: f64,
    #[arg(long = "xi-max", default_value_t = 1e8)]
    pub xi_max: f64,
    #[arg(long = "xi-points", default_value_t = 25)]
    pub xi_points: usize,
    /// Integrator tolerance for mode simulations.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Parallel workers for grid sweeps.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Seed for the sampled admissibility probes in `verify`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Analyze,
    Weights,
    Simulate,
    Verify,
    Fit,
}

/// Resolved run parameters, validated against the loaded spec.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub spec_path: PathBuf,
    pub out_dir: PathBuf,
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_points: usize,
    pub tol: f64,
    pub workers: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> RunConfig {
        let (command, a) = match &cli.command {
            CliCommand::Analyze(a) => (CommandKind::Analyze, a),
            CliCommand::Weights(a) => (CommandKind::Weights, a),
            CliCommand::Simulate(a) => (CommandKind::Simulate, a),
            CliCommand::Verify(a) => (CommandKind::Verify, a),
            CliCommand::Fit(a) => (CommandKind::Fit, a),
        };
        RunConfig {
            command,
            spec_path: a.spec.clone(),
            out_dir: a.out.clone(),
            xi_min: a.xi_min,
            xi_max: a.xi_max,
            xi_points: a.xi_points,
            tol: a.tol,
            workers: a.workers,
            seed: a.seed,
        }
    }

    fn validate(&self, m_cut: f64) -> Result<()> {
        if !(self.xi_min >= m_cut) {
            return Err(Error::Input(format!(
                "--xi-min must be at least the frequency cutoff {m_cut}, got {}",
                self.xi_min
            )));
        }
        if !(self.xi_max > self.xi_min) {
            return Err(Error::Input(format!(
                "--xi-max must exceed --xi-min, got [{}, {}]",
                self.xi_min, self.xi_max
            )));
        }
        if self.xi_points < 8 {
            return Err(Error::Input(format!(
                "--xi-points must be at least 8, got {}",
                self.xi_points
            )));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-4) {
            return Err(Error::Input(format!("--tol must lie in (0, 1e-4], got {}", self.tol)));
        }
        if self.workers < 1 {
            return Err(Error::Input("--workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Wire HYPWP_LOG to the logger; unset means errors only.
pub fn init_logging() {
    let env = env_logger::Env::new().filter("HYPWP_LOG");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Files written plus the names of any failed verification checks.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub failed_checks: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failed_checks.is_empty() {
            0
        } else {
            1
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let loaded = load_problem(&cfg.spec_path)?;
    cfg.validate(loaded.ps.zones.m_cut)?;
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::Input(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Input(format!("cannot build worker pool: {e}")))?;
    log::info!(
        "{:?} on {} with {} workers, xi in [{:e}, {:e}] x {}",
        cfg.command,
        cfg.spec_path.display(),
        cfg.workers,
        cfg.xi_min,
        cfg.xi_max,
        cfg.xi_points
    );
    pool.install(|| match cfg.command {
        CommandKind::Analyze => cmd_analyze(cfg, &loaded),
        CommandKind::Weights => cmd_weights(cfg, &loaded),
        CommandKind::Simulate => cmd_simulate(cfg, &loaded),
        CommandKind::Verify => cmd_verify(cfg, &loaded),
        CommandKind::Fit => cmd_fit(cfg, &loaded),
    })
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut body = text.to_string();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    fs::write(&path, body).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn to_pretty<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map_err(|e| Error::Input(format!("report serialization failed: {e}")))
}

fn cmd_analyze(cfg: &RunConfig, loaded: &LoadedProblem) -> Result<RunSummary> {
    let classification = analysis::classify(&loaded.ps)?;
    log::info!("verdict: {:?}", classification.verdict);
    let path = write_text(&cfg.out_dir, "classification.json", &classification.to_json()?)?;
    Ok(RunSummary { files: vec![path], failed_checks: vec![] })
}

fn cmd_weights(cfg: &RunConfig, loaded: &LoadedProblem) -> Result<RunSummary> {
    let ps = &loaded.ps;
    let grid = log_grid(cfg.xi_min, cfg.xi_max, cfg.xi_points);
    let mut table = Vec::new();
    write_csv_header(&mut table, &["xi", "t_xi", "w", "W", "M"])?;
    for &xi in &grid {
        let b = ps.lw.t_xi(xi, &ps.zones)?;
        let w = ps.lw.w_of(b.lambda_primitive)?;
        let big_w = ps.lw.w_primitive(b.lambda_primitive)?;
        let m = analysis::total_weight(ps, xi)?;
        write_csv_row(&mut table, &[xi, b.t, w, big_w, m])?;
    }
    let weights = write_text(
        &cfg.out_dir,
        "weights.csv",
        std::str::from_utf8(&table).expect("csv is ascii"),
    )?;

    let mut ztable = Vec::new();
    leviweight::write_zone_table(&ps.lw, &ps.zones, &grid, &mut ztable)?;
    let zones = write_text(
        &cfg.out_dir,
        "zones.csv",
        std::str::from_utf8(&ztable).expect("csv is ascii"),
    )?;
    Ok(RunSummary { files: vec![weights, zones], failed_checks: vec![] })
}

fn cmd_simulate(cfg: &RunConfig, loaded: &LoadedProblem) -> Result<RunSummary> {
    let model = loaded.model.as_ref().ok_or_else(|| {
        Error::Input("simulate needs a \"model\" section in the problem file".into())
    })?;
    let mut opts = IntegrateOpts::suggested(model);
    opts.tol = cfg.tol;
    let grid = log_grid(cfg.xi_min, cfg.xi_max, cfg.xi_points);
    let report = model.measure_loss(&grid, &opts)?;
    let mut table = Vec::new();
    crate::spectral::write_loss_table(&mut table, &report)?;
    let csv = write_text(
        &cfg.out_dir,
        "loss.csv",
        std::str::from_utf8(&table).expect("csv is ascii"),
    )?;
    let json = write_text(&cfg.out_dir, "loss_summary.json", &to_pretty(&report)?)?;
    Ok(RunSummary { files: vec![csv, json], failed_checks: vec![] })
}

fn cmd_fit(cfg: &RunConfig, loaded: &LoadedProblem) -> Result<RunSummary> {
    let ps = &loaded.ps;
    let &WeightLaw::Family { s, m_tilde, beta_tilde } = ps.lw.law() else {
        return Err(Error::Input("fit needs a family weight law".into()));
    };
    let grid = log_grid(cfg.xi_min, cfg.xi_max, cfg.xi_points);
    let mut measured = Vec::with_capacity(grid.len());
    let mut predicted = Vec::with_capacity(grid.len());
    for &xi in &grid {
        measured.push(analysis::levi_component(ps, xi)?);
        let mut p = xi.powf(s.recip());
        if beta_tilde != 0.0 {
            p *= moduli::iterated_log(m_tilde, xi)?.powf(beta_tilde * (1.0 - s.recip()));
        }
        predicted.push(p);
    }
    let fit = analysis::asymptotic_fit(&grid, &measured, &predicted)?;

    #[derive(Serialize)]
    struct FitDoc {
        predicted_form: String,
        xi_grid: Vec<f64>,
        measured: Vec<f64>,
        predicted: Vec<f64>,
        fit: analysis::FitReport,
    }
    let doc = FitDoc {
        predicted_form: format!(
            "xi^(1/{s}){}",
            if beta_tilde != 0.0 {
                format!(" * (log^[{m_tilde}] xi)^({beta_tilde} * (1 - 1/{s}))")
            } else {
                String::new()
            }
        ),
        xi_grid: grid,
        measured,
        predicted,
        fit,
    };
    let path = write_text(&cfg.out_dir, "fit.json", &to_pretty(&doc)?)?;
    Ok(RunSummary { files: vec![path], failed_checks: vec![] })
}

#[derive(Serialize)]
struct VerifySection {
    name: String,
    pass: bool,
    evidence: serde_json::Value,
}

fn section<T: Serialize>(name: &str, outcome: Result<(bool, T)>) -> VerifySection {
    match outcome {
        Ok((pass, rep)) => VerifySection {
            name: name.into(),
            pass,
            evidence: serde_json::to_value(&rep).unwrap_or(serde_json::Value::Null),
        },
        Err(e) => VerifySection {
            name: name.into(),
            pass: false,
            evidence: serde_json::json!({ "error": e.to_string() }),
        },
    }
}

fn cmd_verify(cfg: &RunConfig, loaded: &LoadedProblem) -> Result<RunSummary> {
    let ps = &loaded.ps;
    let t_end = ps.lw.t_end();
    let mut sections = Vec::new();

    // Hypothesis checks, fixed internal sampling; failures carry the check
    // names through `reasons`.
    let classification = analysis::classify(ps)?;
    for c in &classification.checks {
        sections.push(VerifySection {
            name: c.name.clone(),
            pass: c.pass,
            evidence: c.evidence.clone(),
        });
    }

    let xi_wide = log_grid(cfg.xi_min, cfg.xi_max, cfg.xi_points.min(17));
    sections.push(section(
        "weight_bounds",
        leviweight::verify_weight_bounds(&ps.lw, &ps.zones, &xi_wide).map(|r| (r.pass, r)),
    ));

    // The ρ derivative bound is consumed inside the pseudodifferential zone
    // only, so audit t ∈ (0, t_ξ] per frequency instead of a cross grid.
    // Log-refined laws hold it only below the hump of λ^m w^{m(m-1)}, so
    // they get the additional small-Λ cap the bound actually comes with.
    sections.push(section(
        "rho_bounds",
        (|| {
            let small_lambda_cap = match ps.lw.law() {
                WeightLaw::Family { beta_tilde, .. } if *beta_tilde != 0.0 => {
                    let y_cap =
                        (-10.0f64).exp().min(ps.lw.shape().primitive(0.999 * t_end)?);
                    Some(ps.lw.shape().primitive_inverse(y_cap)?)
                }
                _ => None,
            };
            let xis = log_grid(cfg.xi_min, cfg.xi_max, 6);
            let mut rows = Vec::new();
            let mut pass = true;
            for &xi in &xis {
                let mut cap = ps.lw.t_xi(xi, &ps.zones)?.t.min(0.999 * t_end);
                if let Some(c) = small_lambda_cap {
                    cap = cap.min(c);
                }
                let tg = log_grid(1e-3 * cap, cap, 9);
                let r = leviweight::verify_rho_bounds(&ps.lw, &tg, &[xi])?;
                pass &= r.pass;
                rows.push(serde_json::json!({
                    "xi": xi, "t_cap": cap, "min_rho": r.min_rho,
                    "min_log_deriv": r.min_log_deriv,
                    "max_bound_factor": r.max_bound_factor, "pass": r.pass,
                }));
            }
            Ok((pass, rows))
        })(),
    ));

    // Mollifier bounds run against the model's time-dependent coefficients;
    // constants mollify to themselves and prove nothing.
    if let Some(model) = &loaded.model {
        let kernel = MollifierKernel::standard();
        let eps: Vec<f64> = (0..8).map(|k| 0.25 * t_end * 0.5f64.powi(k)).collect();
        for (i, term) in model.principal().iter().enumerate() {
            let rep = mollify::verify_mollifier_bounds(&term.coeff, &kernel, &eps);
            sections.push(section(
                &format!("mollifier_bounds_principal_{i}"),
                rep.map(|r| (r.pass, r)),
            ));
        }
    }

    // Resampled admissibility probe: same inequality as the classification
    // check, fresh frequency pairs from --seed.
    let pairs = analysis::sample_frequency_pairs(64, cfg.xi_min, cfg.xi_max, cfg.seed);
    let eta_grid = log_grid(cfg.xi_min, cfg.xi_min * 1.0001e4, 25);
    sections.push(section(
        "eta_admissible_resampled",
        analysis::check_eta_admissible(ps, GrowthComparison::LittleO, &eta_grid, &pairs)
            .map(|r| (r.structural_pass && (r.little_o_pass || r.big_o_pass), r)),
    ));

    let conj = ConjugatorConfig::new(ps.clone());
    sections.push(section(
        "conjugator_reduction",
        conj.and_then(|c| {
            let xis = log_grid(cfg.xi_min, cfg.xi_max, 8);
            let t0s: Vec<f64> = (1..=4).map(|k| t_end * k as f64 / 4.0).collect();
            conjugator::verify_phi_reduction(&c, &xis, &t0s)
        })
        .map(|r| (r.pass, r)),
    ));

    if let Some(model) = &loaded.model {
        let mut opts = IntegrateOpts::suggested(model);
        opts.tol = cfg.tol;
        // Small sweep: enough for the budget fit, cheap enough for a gate.
        let grid = log_grid(cfg.xi_min, cfg.xi_min * 1e2, 8);
        sections.push(section(
            "mode_amplification_budget",
            model.measure_loss(&grid, &opts).map(|r| {
                let pass = r.budget_max_ratio.is_finite();
                (pass, r)
            }),
        ));
    }

    let failed: Vec<String> =
        sections.iter().filter(|s| !s.pass).map(|s| s.name.clone()).collect();

    #[derive(Serialize)]
    struct VerifyDoc {
        verdict: analysis::Verdict,
        pass: bool,
        failed: Vec<String>,
        sections: Vec<VerifySection>,
    }
    let doc = VerifyDoc {
        verdict: classification.verdict,
        pass: failed.is_empty(),
        failed: failed.clone(),
        sections,
    };
    let path = write_text(&cfg.out_dir, "verification.json", &to_pretty(&doc)?)?;
    for name in &failed {
        log::warn!("verification failed: {name}");
    }
    Ok(RunSummary { files: vec![path], failed_checks: failed })
}
