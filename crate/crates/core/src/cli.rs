//! Command-line front end: scenario configuration with dotted-path
//! overrides, the simulate/compromise/sweep/analyze-lv commands, and
//! CSV/report emission.
//!
//! Exit codes: 0 success, 2 validation or argument error, 3 integration
//! failure, 4 analysis failure, 5 file I/O error, 6 config parse error.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::closed_form::ClosedFormError;
use crate::compromise::{compromise_point, CompromiseError, CompromiseOptions, CompromiseResult};
use crate::income::{income_at, IncomeError, IncomeMode};
use crate::lotka_volterra::{analyze, LvAnalysis, LvError};
use crate::model::{Coupling, ModelError, Scenario, SystemKind};
use crate::ode::{integrate, Event, OdeError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(#[from] ModelError),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Integration(OdeError),
    #[error("{0}")]
    Analysis(LvError),
    #[error("cannot read {path}: {source}")]
    ReadInput {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    WriteOutput {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::InvalidArgument(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Analysis(_) => 4,
            CliError::ReadInput { .. } | CliError::WriteOutput { .. } => 5,
            CliError::Parse { .. } => 6,
        }
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::Invalid(m) => CliError::Validation(m),
            other => CliError::Integration(other),
        }
    }
}

impl From<LvError> for CliError {
    fn from(e: LvError) -> Self {
        match e {
            LvError::Invalid(m) => CliError::Validation(m),
            LvError::Ode(o) => CliError::from(o),
            LvError::WrongSystem => CliError::InvalidArgument(e.to_string()),
            other => CliError::Analysis(other),
        }
    }
}

impl From<IncomeError> for CliError {
    fn from(e: IncomeError) -> Self {
        match e {
            IncomeError::Invalid(m) => CliError::Validation(m),
            IncomeError::Ode(o) => CliError::from(o),
            IncomeError::ClosedForm(ClosedFormError::Invalid(m)) => CliError::Validation(m),
            other => CliError::InvalidArgument(other.to_string()),
        }
    }
}

impl From<CompromiseError> for CliError {
    fn from(e: CompromiseError) -> Self {
        match e {
            CompromiseError::Invalid(m) => CliError::Validation(m),
            CompromiseError::GridTooSmall => CliError::InvalidArgument(e.to_string()),
            CompromiseError::Income { source, .. } => CliError::from(source),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "duotax",
    version,
    about = "Two-firm capital dynamics under taxation: simulate, analyze, and find the compromise tax rate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Scenario config file (JSON)
    #[arg(long)]
    pub config: PathBuf,
    /// Dotted-path overrides applied to the config, e.g. --set firm1.rho=2.0
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

/// Evaluation mode shared by the commands: `coupled` integrates the full
/// system numerically, `decoupled` uses the per-firm closed forms (and, for
/// simulate, drops the cross terms from the integrated system).
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Coupled,
    Decoupled,
}

impl ModeArg {
    fn income_mode(self) -> IncomeMode {
        match self {
            ModeArg::Coupled => IncomeMode::CoupledNumeric,
            ModeArg::Decoupled => IncomeMode::DecoupledClosedForm,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the configured system and write the trajectory CSV
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Trajectory CSV path
        #[arg(long, default_value = "trajectory.csv")]
        out: PathBuf,
        /// Run-report JSON path (stdout when omitted)
        #[arg(long)]
        report: Option<PathBuf>,
        /// Override the scenario's coupling
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Search for the minimax compromise tax rate
    Compromise {
        #[command(flatten)]
        config: ConfigArgs,
        /// Number of grid points over [0, 1 - 1/grid)
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Decoupled)]
        mode: ModeArg,
        /// Two-agent variant: exclude the state's deviation
        #[arg(long)]
        no_state: bool,
        /// Write the x,h1,h2,h3,maxdev sweep CSV here
        #[arg(long)]
        sweep_csv: Option<PathBuf>,
        /// Run-report JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate incomes along a tax-rate grid and write the sweep CSV
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Parameter to sweep (only `x` is supported)
        #[arg(long, default_value = "x")]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Number of grid points; 1 evaluates `from` alone
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Decoupled)]
        mode: ModeArg,
        /// Sweep CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report equilibrium, conserved quantity, period, and time averages
    AnalyzeLv {
        #[command(flatten)]
        config: ConfigArgs,
        /// Run-report JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
pub struct RunReport<R: Serialize> {
    pub command: String,
    pub version: &'static str,
    pub scenario: Scenario,
    pub wall_time_s: f64,
    pub results: R,
}

#[derive(Debug, Serialize)]
struct SimulateResults {
    kind: &'static str,
    trajectory_csv: String,
    samples: usize,
    events: Vec<Event>,
    final_state: [f64; 2],
}

#[derive(Debug, Serialize)]
struct CompromiseResults {
    kind: &'static str,
    #[serde(flatten)]
    result: CompromiseResult,
}

#[derive(Debug, Serialize)]
struct AnalyzeLvResults {
    kind: &'static str,
    equilibrium: (f64, f64),
    x_invariant: f64,
    x_drift: f64,
    /// Absent when the run sits at the equilibrium.
    period: Option<f64>,
    period_status: String,
    averages: (f64, f64),
}

/// Executes a parsed command line; `command_echo` is stored verbatim in the report.
pub fn run(cli: Cli, command_echo: &str) -> Result<(), CliError> {
    let started = Instant::now();
    match cli.command {
        Command::Simulate {
            config,
            out,
            report,
            mode,
        } => {
            let mut scenario = load_scenario(&config)?;
            if let Some(m) = mode {
                scenario.coupling = match m {
                    ModeArg::Coupled => Coupling::Coupled,
                    ModeArg::Decoupled => Coupling::Decoupled,
                };
            }
            scenario.validate()?;
            let trajectory = integrate(&scenario)?;
            let mut csv = Vec::new();
            trajectory
                .write_csv(&mut csv)
                .expect("in-memory write cannot fail");
            write_bytes(&out, &csv)?;
            let end = trajectory.end();
            let results = SimulateResults {
                kind: "simulate",
                trajectory_csv: out.display().to_string(),
                samples: trajectory.samples.len(),
                events: trajectory.events.clone(),
                final_state: [end.v1, end.v2],
            };
            emit_report(command_echo, scenario, started, results, report.as_deref())
        }
        Command::Compromise {
            config,
            grid,
            mode,
            no_state,
            sweep_csv,
            out,
        } => {
            let scenario = load_scenario(&config)?;
            scenario.validate()?;
            let options = CompromiseOptions {
                grid_size: grid,
                mode: mode.income_mode(),
                include_state: !no_state,
                ..Default::default()
            };
            let result = compromise_point(&scenario, &options)?;
            if let Some(path) = &sweep_csv {
                let mut csv = String::from("x,h1,h2,h3,maxdev\n");
                for p in &result.sweep {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        p.x, p.h1, p.h2, p.h3, p.max_deviation
                    ));
                }
                write_bytes(path, csv.as_bytes())?;
            }
            let results = CompromiseResults {
                kind: "compromise",
                result,
            };
            emit_report(command_echo, scenario, started, results, out.as_deref())
        }
        Command::Sweep {
            config,
            param,
            from,
            to,
            steps,
            mode,
            out,
        } => {
            let scenario = load_scenario(&config)?;
            scenario.validate()?;
            if param != "x" {
                return Err(CliError::InvalidArgument(format!(
                    "unsupported sweep parameter '{param}': only 'x' is available"
                )));
            }
            if steps == 0 {
                return Err(CliError::InvalidArgument("steps must be at least 1".into()));
            }
            let valid_range = (0.0..1.0).contains(&from)
                && (0.0..1.0).contains(&to)
                && (steps == 1 || from < to);
            if !valid_range {
                return Err(CliError::InvalidArgument(format!(
                    "invalid range: need 0 <= from < to < 1 (got from={from}, to={to})"
                )));
            }
            let xs: Vec<f64> = if steps == 1 {
                vec![from]
            } else {
                (0..steps)
                    .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
                    .collect()
            };
            let income_mode = mode.income_mode();
            // grid points evaluate in parallel; rows stay in grid order
            let rows: Result<Vec<String>, IncomeError> = xs
                .par_iter()
                .map(|&x| {
                    let r = income_at(&scenario, x, income_mode)?;
                    Ok(format!("{},{},{},{},{}\n", r.x, r.h1, r.h2, r.h3, r.total))
                })
                .collect();
            let mut csv = String::from("x,h1,h2,h3,total\n");
            for row in rows? {
                csv.push_str(&row);
            }
            match out {
                Some(path) => write_bytes(&path, csv.as_bytes()),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Command::AnalyzeLv { config, out } => {
            let scenario = load_scenario(&config)?;
            scenario.validate()?;
            if scenario.system != SystemKind::LotkaVolterra {
                return Err(CliError::InvalidArgument(
                    "analyze-lv requires \"system\": \"lotka-volterra\"".into(),
                ));
            }
            let analysis: LvAnalysis = analyze(&scenario)?;
            let period_status = if analysis.period.is_some() {
                "detected".to_string()
            } else {
                "at equilibrium".to_string()
            };
            let results = AnalyzeLvResults {
                kind: "analyze-lv",
                equilibrium: analysis.equilibrium,
                x_invariant: analysis.x_invariant,
                x_drift: analysis.x_drift,
                period: analysis.period,
                period_status,
                averages: analysis.averages,
            };
            emit_report(command_echo, scenario, started, results, out.as_deref())
        }
    }
}

fn emit_report<R: Serialize>(
    command_echo: &str,
    scenario: Scenario,
    started: Instant,
    results: R,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let report = RunReport {
        command: command_echo.to_string(),
        version: VERSION,
        scenario,
        wall_time_s: started.elapsed().as_secs_f64(),
        results,
    };
    let text = serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    match out {
        Some(path) => write_bytes(path, format!("{text}\n").as_bytes()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::WriteOutput {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads the JSON config, applies `--set` overrides, and deserializes it.
/// Unknown keys are rejected.
pub fn load_scenario(args: &ConfigArgs) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(&args.config).map_err(|source| CliError::ReadInput {
        path: args.config.clone(),
        source,
    })?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: args.config.clone(),
            source,
        })?;
    for entry in &args.set {
        apply_override(&mut value, entry)?;
    }
    serde_json::from_value(value).map_err(|source| CliError::Parse {
        path: args.config.clone(),
        source,
    })
}

fn apply_override(root: &mut serde_json::Value, entry: &str) -> Result<(), CliError> {
    let (path, raw) = entry.split_once('=').ok_or_else(|| {
        CliError::InvalidArgument(format!("--set expects KEY=VALUE, got '{entry}'"))
    })?;
    let leaf_value: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        if seg.is_empty() {
            return Err(CliError::InvalidArgument(format!(
                "--set path '{path}' has an empty segment"
            )));
        }
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::InvalidArgument(format!("--set path '{path}' does not address an object"))
        })?;
        if i + 1 == segments.len() {
            obj.insert(seg.to_string(), leaf_value);
            return Ok(());
        }
        node = obj
            .entry(seg.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("paths have at least one segment")
}
