//! Experiment runner CLI.
//!
//! Exit codes: 0 success (a blow-up verdict is data, not failure),
//! 2 invalid configuration, 3 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcurv::config::ScenarioConfig;
use qcurv::error::QcurvError;
use qcurv::report::{emit_reports, report_json};
use qcurv::scenario;

#[derive(Parser)]
#[command(name = "qcurv", version, about = "Prescribed-curvature experiments on round spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print operator constants, eigenvalues and the coercivity report.
    Spectrum {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 64)]
        lmax: usize,
    },
    /// Bubble diagnostics: volume identity, equation residual, sharp
    /// constant (both routes), interaction energies.
    Bubble {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the subcritical continuation and emit reports.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for report.json, table.csv, curves.csv
        /// (overrides paths in the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-node admissibility threshold profile.
    Threshold {
        #[arg(long)]
        config: PathBuf,
    },
    /// Conformal-vector-field obstruction probe for the configured weight.
    Obstruction {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<ScenarioConfig, QcurvError> {
    let text = std::fs::read_to_string(path).map_err(|e| QcurvError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| QcurvError::Config(format!("{}: {e}", path.display())))
}

fn exit_code_for(err: &QcurvError) -> u8 {
    match err {
        QcurvError::Config(_)
        | QcurvError::Expr(_)
        | QcurvError::InvalidDimensions { .. }
        | QcurvError::BandLimitTooSmall { .. }
        | QcurvError::InvalidBeta { .. }
        | QcurvError::InvalidExponent { .. }
        | QcurvError::AsymmetricWeight { .. } => 2,
        QcurvError::PositivityLost { .. }
        | QcurvError::MaxIterations { .. }
        | QcurvError::PositivityViolation { .. }
        | QcurvError::NodeNonConvergence { .. }
        | QcurvError::NodesOutOfOrder { .. }
        | QcurvError::NonPositiveWeight { .. }
        | QcurvError::RadialNonConvergence { .. }
        | QcurvError::ZeroField => 3,
        QcurvError::Io { .. } | QcurvError::Json(_) => 1,
    }
}

fn run() -> Result<(), QcurvError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectrum { n, k, lmax } => {
            let rep = scenario::spectrum_report(n, k, lmax)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
        }
        Command::Bubble { config } => {
            let cfg = load_config(&config)?;
            let rep = scenario::bubble_report(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
        }
        Command::Solve { config, out } => {
            let cfg = load_config(&config)?;
            let (report, curves) = scenario::run_scenario(&cfg)?;
            let (rp, tp, cp) = match (&out, &cfg.outputs) {
                (Some(dir), _) => (
                    Some(dir.join("report.json").display().to_string()),
                    Some(dir.join("table.csv").display().to_string()),
                    Some(dir.join("curves.csv").display().to_string()),
                ),
                (None, Some(paths)) => (
                    paths.report.clone(),
                    paths.table.clone(),
                    paths.curves.clone(),
                ),
                (None, None) => (None, None, None),
            };
            emit_reports(
                &report,
                &curves,
                rp.as_deref(),
                tp.as_deref(),
                cp.as_deref(),
            )?;
            if rp.is_none() {
                println!("{}", report_json(&report)?);
            } else {
                let last = report.per_q.last().expect("non-empty table");
                println!(
                    "verdict: {:?}  final q = {}  mu = {:.8}  sup = {:.4}  report: {}",
                    report.verdict,
                    last.q,
                    last.mu_q,
                    last.sup_norm,
                    rp.as_deref().unwrap_or("-")
                );
            }
        }
        Command::Threshold { config } => {
            let cfg = load_config(&config)?;
            let rep = scenario::threshold_report(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
        }
        Command::Obstruction { config } => {
            let cfg = load_config(&config)?;
            let rep = scenario::obstruction_report(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
