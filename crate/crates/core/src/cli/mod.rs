//! Command-line pipeline: `truth`, `offline`, `online`, `study`, `validate`.
//!
//! Every command reads an optional JSON [`RunConfig`], writes CSV/JSON
//! artifacts into the output directory and maps failures to exit codes:
//! 0 ok, 2 configuration error, 3 missing or unusable artifact, 4 solver
//! failure, 5 saturation with nothing built.

mod commands;
mod config;
mod gnuplot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::fem::ParameterVector;

pub use commands::{
    cmd_offline, cmd_online, cmd_study, cmd_truth, cmd_validate, OfflineSummary, OnlineSummary,
    StudyRow, TruthSummary,
};
pub use config::{IoConfig, RbConfig, RunConfig, SamplingConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_MISSING_ARTIFACT: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_SATURATION: i32 = 5;

/// Schema version stamped on every JSON artifact.
pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "american-rb", version, about = "Reduced basis pricing of American puts")]
pub struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides sampling.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides io.output_dir.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full-order trajectory for one parameter.
    Truth {
        /// K,R,Q,SIGMA; defaults to the box center.
        #[arg(long)]
        mu: Option<String>,
        /// Print a gnuplot script for the trajectory CSV.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Snapshots, greedy bases and the reduced model file.
    Offline {
        #[arg(long)]
        gnuplot: bool,
    },
    /// Reduced trajectory for one parameter.
    Online {
        #[arg(long)]
        mu: Option<String>,
        /// Overrides io.model_path.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also solve the full-order problem and report err_N.
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        gnuplot: bool,
    },
    /// ErrLinf over the test set for several budgets.
    Study {
        /// Semicolon-separated NV_tilde,NW pairs.
        #[arg(long, default_value = "4,4;8,8;16,16")]
        budgets: String,
        #[arg(long)]
        gnuplot: bool,
    },
    /// Re-run every consistency check on a model file.
    Validate {
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn missing(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_MISSING_ARTIFACT,
            message: message.into(),
        }
    }

    fn to_json(&self) -> String {
        serde_json::json!({
            "schema_version": ARTIFACT_SCHEMA_VERSION,
            "exit_code": self.code,
            "error": self.message,
        })
        .to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::InvalidArgument(_) => EXIT_CONFIG,
            Error::Load { .. } | Error::ModelCorruption(_) | Error::VersionMismatch { .. } => {
                EXIT_MISSING_ARTIFACT
            }
            Error::BasisSaturation { achieved: 0 } | Error::ConeSaturation { achieved: 0 } => {
                EXIT_SATURATION
            }
            _ => EXIT_SOLVER,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_MISSING_ARTIFACT,
            message: format!("i/o error: {e}"),
        }
    }
}

/// Parses `K,R,Q,SIGMA`.
pub fn parse_mu(text: &str) -> Result<ParameterVector, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::config(format!("--mu {text:?}: {e}")))?;
    let [k, r, q, sigma] = values[..] else {
        return Err(CliError::config(format!("--mu {text:?}: expected K,R,Q,SIGMA")));
    };
    ParameterVector::new(k, r, q, sigma).map_err(|e| CliError::config(e.to_string()))
}

/// Parses `4,4;8,8`.
pub fn parse_budgets(text: &str) -> Result<Vec<RbConfig>, CliError> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            match parts[..] {
                [a, b] => match (a.parse(), b.parse()) {
                    (Ok(nv_tilde), Ok(nw)) if nv_tilde > 0 => Ok(RbConfig { nv_tilde, nw }),
                    _ => Err(CliError::config(format!("bad budget {pair:?}"))),
                },
                _ => Err(CliError::config(format!("bad budget {pair:?}"))),
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .and_then(|b| {
            if b.is_empty() {
                Err(CliError::config("no budgets given"))
            } else {
                Ok(b)
            }
        })
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(CliError::config)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.sampling.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.io.output_dir = out.clone();
    }
    Ok(config)
}

fn mu_or_center(mu: &Option<String>, config: &RunConfig) -> Result<ParameterVector, CliError> {
    match mu {
        Some(text) => parse_mu(text),
        None => {
            let b = &config.bounds;
            ParameterVector::new(b.k0, b.r0, b.q0, b.sigma0).map_err(|e| CliError::config(e.to_string()))
        }
    }
}

/// Runs a parsed command; stdout receives the human-readable report.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let mut config = resolve_config(cli)?;
    match &cli.command {
        Command::Truth { mu, gnuplot } => {
            let mu = mu_or_center(mu, &config)?;
            cmd_truth(&config, &mu, *gnuplot)
        }
        Command::Offline { gnuplot } => cmd_offline(&config, *gnuplot),
        Command::Online {
            mu,
            model,
            compare,
            gnuplot,
        } => {
            if let Some(path) = model {
                config.io.model_path = Some(path.clone());
            }
            let mu = mu_or_center(mu, &config)?;
            cmd_online(&config, &mu, *compare, *gnuplot)
        }
        Command::Study { budgets, gnuplot } => {
            let budgets = parse_budgets(budgets)?;
            cmd_study(&config, &budgets, *gnuplot)
        }
        Command::Validate { model } => {
            if let Some(path) = model {
                config.io.model_path = Some(path.clone());
            }
            cmd_validate(&config)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.code
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}
