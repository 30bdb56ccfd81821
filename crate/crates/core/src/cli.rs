//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 fatal runtime
//! failure (mesh tangling), 3 certification failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::diagnostics::{certify_run, BoundCertificate, Verdict};
use crate::energy::{combined_e1, initial_energies, smallness_report, LocalizedTracker};
use crate::initial::compatibility_residual;
use crate::io::config::{load_config, RunConfig};
use crate::io::recorder::Recorder;
use crate::io::series::{read_series, write_localized, write_series, SeriesRow};
use crate::io::snapshot::{snapshot_name, write_snapshot, Snapshot};
use crate::io::IoError;
use crate::mms::{builtin_case, convergence_study, ImexSolver, StudyPlan};
use crate::par::Execution;
use crate::state::State;
use crate::stepper::{Monitor, Stepper};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_CERTIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sphvac",
    version,
    about = "Spherically symmetric free-boundary Navier-Stokes simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation and write series.csv, snapshots/ and report.txt.
    Run {
        config: PathBuf,
        /// Overrides `output.dir` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the initial energies E0..E4 and the smallness report.
    Energies { config: PathBuf },
    /// Print the boundary stress residual of the initial data.
    CheckCompat { config: PathBuf },
    /// Run the manufactured-solution convergence study.
    Mms {
        /// Also write the rate table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Run the study levels one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Check a series CSV against the configured bounds.
    Certify {
        series: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        alpha_cfg: f64,
        #[arg(long, default_value_t = 0.1)]
        beta_cfg: f64,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Self::config(e)
    }
}

type Outcome = Result<i32, Failure>;

pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    cli_main_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`cli_main`], writing to the given streams.
pub fn cli_main_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let outcome = match cli.command {
        Command::Run { config, out: dir } => cmd_run(&config, dir, out),
        Command::Energies { config } => cmd_energies(&config, out),
        Command::CheckCompat { config } => cmd_check_compat(&config, out),
        Command::Mms { csv, sequential } => cmd_mms(csv.as_deref(), sequential, out),
        Command::Certify {
            series,
            alpha_cfg,
            beta_cfg,
        } => cmd_certify(&series, alpha_cfg, beta_cfg, out),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(Failure::config)
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| Failure::config(IoError::file(path, e)))
}

fn cmd_run(config: &Path, dir: Option<PathBuf>, out: &mut dyn Write) -> Outcome {
    let cfg = load_config(config)?;
    let (grid, init) = cfg.setup().map_err(Failure::config)?;
    let dir = dir.unwrap_or_else(|| cfg.output.dir.clone());
    let snapshots = dir.join("snapshots");
    create_dir(&snapshots)?;

    let stepper = Stepper::new(&grid, &init, &cfg.params, cfg.stepping).map_err(Failure::config)?;
    let mut recorder = Recorder::new(&grid, &init, &cfg.params, cfg.monitors, cfg.output.cadence)
        .with_snapshots(snapshots.clone());
    let mut localized = LocalizedTracker::new(&init, &grid, &cfg.params);
    let initial = State::initial(&grid, &init);
    let result = {
        let mut monitors: Vec<&mut dyn Monitor> = vec![&mut recorder];
        if cfg.monitors.localized {
            monitors.push(&mut localized);
        }
        stepper.run(&initial, &mut monitors)
    };

    let rows = recorder.finish().map_err(Failure::config)?;
    write_series(&rows, &dir.join("series.csv"))?;
    if cfg.monitors.localized {
        let records = localized.finish().map_err(Failure::config)?;
        write_localized(&records, &dir.join("localized.csv"))?;
    }

    let mut report = run_report(&cfg, &rows);
    let code = match result {
        Ok(summary) => {
            let _ = writeln!(report, "status: completed");
            let _ = writeln!(report, "steps: {}", summary.steps);
            EXIT_OK
        }
        Err(failure) => {
            let snap =
                Snapshot::capture(&failure.last_good, failure.steps, &init, &cfg.params, &grid)
                    .map_err(Failure::config)?
                    .flag_failure(failure.error.to_string());
            write_snapshot(&snap, &snapshots.join(snapshot_name(failure.steps)))?;
            let _ = writeln!(
                report,
                "status: failed after {} steps: {}",
                failure.steps, failure.error
            );
            let _ = writeln!(report, "last good state: t = {:.16e}", failure.last_good.t);
            if matches!(failure.error, crate::error::ModelError::Output(_)) {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            }
        }
    };
    std::fs::write(dir.join("report.txt"), &report)
        .map_err(|e| Failure::config(IoError::file(&dir.join("report.txt"), e)))?;
    emit(out, &report)?;
    Ok(code)
}

fn max_finite(rows: &[SeriesRow], f: impl Fn(&SeriesRow) -> f64) -> Option<f64> {
    rows.iter()
        .map(f)
        .filter(|v| v.is_finite())
        .reduce(f64::max)
}

fn run_report(cfg: &RunConfig, rows: &[SeriesRow]) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "cells: {}", cfg.grid.n_cells);
    let _ = writeln!(
        r,
        "params: mu = {}, lambda = {}, gamma = {}",
        cfg.params.mu, cfg.params.lambda, cfg.params.gamma
    );
    let _ = writeln!(r, "records: {}", rows.len());
    if let Some(last) = rows.last() {
        let _ = writeln!(r, "final t: {:.16e}", last.t);
        let _ = writeln!(r, "final radius: {:.16e}", last.radius);
    }
    if let Some(v) = max_finite(rows, |x| x.identity_residual) {
        let _ = writeln!(r, "max energy identity residual: {v:.6e}");
    }
    if let Some(v) = max_finite(rows, |x| x.boundary_stress_residual.abs()) {
        let _ = writeln!(r, "max boundary stress residual: {v:.6e}");
    }
    if cfg.monitors.bounds && !rows.is_empty() {
        let certs: Vec<BoundCertificate> = rows.iter().map(SeriesRow::certificate).collect();
        let v = certify_run(&certs, cfg.thresholds.alpha_cfg, cfg.thresholds.beta_cfg);
        r.push_str(&verdict_text(
            &v,
            cfg.thresholds.alpha_cfg,
            cfg.thresholds.beta_cfg,
        ));
    }
    r
}

fn verdict_text(v: &Verdict, alpha_cfg: f64, beta_cfg: f64) -> String {
    let mut r = String::new();
    let _ = writeln!(
        r,
        "certificate (alpha_cfg = {alpha_cfg}, beta_cfg = {beta_cfg}): {}",
        if v.pass { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(r, "  violations: {}", v.violations);
    if let Some(t) = v.first_violation_t {
        let _ = writeln!(r, "  first violation at t = {t:.6e}");
    }
    let _ = writeln!(r, "  realized alpha: {:.6e}", v.realized_alpha);
    let _ = writeln!(r, "  realized beta: {:.6e}", v.realized_beta);
    let _ = writeln!(r, "  min R * alpha: {:.6e}", v.min_radius_margin);
    r
}

fn cmd_energies(config: &Path, out: &mut dyn Write) -> Outcome {
    let cfg = load_config(config)?;
    let (grid, mut init) = cfg.setup().map_err(Failure::config)?;
    init.derive_accelerations(&cfg.params, &grid)
        .map_err(Failure::config)?;
    let e = initial_energies(&init, &grid, &cfg.params).map_err(Failure::config)?;
    let mut r = String::new();
    for (name, v) in [
        ("E0", e.e0),
        ("E1", e.e1),
        ("E2", e.e2),
        ("E3", e.e3),
        ("E4", e.e4),
    ] {
        let _ = writeln!(r, "{name} = {v:.15}");
    }
    let th = cfg.thresholds;
    let combined = combined_e1(&e, th.c0, th.alpha_cfg, th.beta_cfg, cfg.params.gamma);
    let _ = writeln!(r, "combined E1 (advisory, c0 = {}): {combined:.15}", th.c0);
    match th.epsilon_bar {
        Some(eps) => {
            let s = smallness_report(&e, eps);
            let _ = writeln!(
                r,
                "smallness (advisory, epsilon_bar = {eps}): E0 {} E1 {} E2 {} -> {}",
                s.e0_small,
                s.e1_small,
                s.e2_small,
                if s.pass { "small" } else { "not small" }
            );
        }
        None => {
            let _ = writeln!(r, "smallness: no epsilon_bar configured");
        }
    }
    emit(out, &r)?;
    Ok(EXIT_OK)
}

fn cmd_check_compat(config: &Path, out: &mut dyn Write) -> Outcome {
    let cfg = load_config(config)?;
    let (grid, init) = cfg.setup().map_err(Failure::config)?;
    let residual = compatibility_residual(&init, &cfg.params, &grid);
    emit(
        out,
        &format!("boundary stress residual at t = 0: {residual:.6e}\n"),
    )?;
    Ok(EXIT_OK)
}

fn cmd_mms(csv: Option<&Path>, sequential: bool, out: &mut dyn Write) -> Outcome {
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::Auto
    };
    let table = convergence_study(&builtin_case(), &StudyPlan::default(), &ImexSolver, exec)
        .map_err(|e| Failure {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        })?;
    if let Some(path) = csv {
        std::fs::write(path, table.to_csv())
            .map_err(|e| Failure::config(IoError::file(path, e)))?;
    }
    emit(out, &table.summary())?;
    Ok(EXIT_OK)
}

fn cmd_certify(series: &Path, alpha_cfg: f64, beta_cfg: f64, out: &mut dyn Write) -> Outcome {
    if !(alpha_cfg > 0.0 && beta_cfg > 0.0) {
        return Err(Failure::config("alpha_cfg and beta_cfg must be positive"));
    }
    let rows = read_series(series)?;
    let certs: Vec<BoundCertificate> = rows
        .iter()
        .filter(|r| r.max_jacobian_ratio.is_finite())
        .map(SeriesRow::certificate)
        .collect();
    if certs.is_empty() {
        return Err(Failure::config(format!(
            "{}: no records with bound columns",
            series.display()
        )));
    }
    let v = certify_run(&certs, alpha_cfg, beta_cfg);
    emit(out, &verdict_text(&v, alpha_cfg, beta_cfg))?;
    Ok(if v.pass { EXIT_OK } else { EXIT_CERTIFY })
}
