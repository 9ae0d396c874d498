//! The end-to-end analysis pipeline: read, parse, explore and quantify,
//! classify feasibility, and assemble the report.
//!
//! The binary is a thin wrapper over [`run`]; integration tests drive this
//! module directly so they exercise exactly what the executable runs.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use probsym_core::concrete::VarMeasure;
use probsym_core::measure::{quantify, ratio, MassEstimate, McParams, MeasureError, QuantParams};
use probsym_core::symexec::{EngineError, ExploreParams};
use probsym_core::syntax::{parse_program, parse_query, Program};

use crate::report::{build_report, render_json, render_table, ConfigEcho, Report};
use crate::solver::Solver;

/// Output rendering.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Format {
    Table,
    Json,
}

/// Effective configuration of one run.
pub struct RunConfig {
    pub input: PathBuf,
    pub unroll: u32,
    /// Exploration cap; exceeding it is a budget error, not a truncation.
    pub max_paths: usize,
    pub mc_trials: u64,
    pub seed: u64,
    pub solver_cmd: Option<String>,
    pub timeout_ms: u64,
    pub query: Option<String>,
    /// Raw `NAME=point:V | NAME=uniform01 | NAME=stdnormal` entries;
    /// unlisted variables default to `point:0`.
    pub measure: Vec<String>,
    pub threads: usize,
}

impl RunConfig {
    pub fn new(input: PathBuf) -> RunConfig {
        RunConfig {
            input,
            unroll: 4,
            max_paths: ExploreParams::default().max_paths,
            mc_trials: McParams::default().trials,
            seed: 0,
            solver_cmd: None,
            timeout_ms: 5000,
            query: None,
            measure: Vec::new(),
            threads: 1,
        }
    }
}

/// A failed run, carrying the process exit code: 1 for input problems
/// (unreadable file, parse error, bad flag value), 2 for blown budgets.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CliError {
    Input(String),
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Budget(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Budget(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Parse one `--measure` entry.
fn parse_measure_spec(spec: &str) -> Result<(String, VarMeasure), CliError> {
    let bad = |why: &str| CliError::Input(format!("invalid measure spec {spec:?}: {why}"));
    let (name, rest) = spec
        .split_once('=')
        .ok_or_else(|| bad("expected NAME=point:V, NAME=uniform01, or NAME=stdnormal"))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(bad("empty variable name"));
    }
    let measure = match rest.trim() {
        "uniform01" => VarMeasure::Uniform01,
        "stdnormal" => VarMeasure::StdNormal,
        other => match other.strip_prefix("point:") {
            Some(v) => VarMeasure::Point(
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| bad("point value is not a number"))?,
            ),
            None => return Err(bad("unknown measure kind")),
        },
    };
    Ok((name.to_string(), measure))
}

/// Resolve the measure specs against the program's variables. Later
/// entries override earlier ones for the same variable.
fn resolve_measures(program: &Program, specs: &[String]) -> Result<Vec<VarMeasure>, CliError> {
    let mut mu = vec![VarMeasure::Point(0.0); program.n()];
    for spec in specs {
        let (name, m) = parse_measure_spec(spec)?;
        let i = program
            .vars
            .iter()
            .position(|v| v == &name)
            .ok_or_else(|| {
                CliError::Input(format!("measure names unknown variable {name:?}"))
            })?;
        mu[i] = m;
    }
    Ok(mu)
}

fn measure_echo(program: &Program, mu: &[VarMeasure]) -> Vec<String> {
    program
        .vars
        .iter()
        .zip(mu)
        .map(|(name, m)| match m {
            VarMeasure::Point(v) => format!("{name}=point:{v}"),
            VarMeasure::Uniform01 => format!("{name}=uniform01"),
            VarMeasure::StdNormal => format!("{name}=stdnormal"),
        })
        .collect()
}

fn engine_error(e: EngineError) -> CliError {
    match e {
        EngineError::Budget { max_paths } => CliError::Budget(format!(
            "exploration exceeded the path budget of {max_paths}"
        )),
        other => CliError::Input(format!("engine error: {other}")),
    }
}

/// Execute the full pipeline and assemble the report.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let src = fs::read_to_string(&config.input).map_err(|e| {
        CliError::Input(format!("cannot read {}: {e}", config.input.display()))
    })?;
    let program = parse_program(&src)
        .map_err(|e| CliError::Input(format!("parse error: {e}")))?;
    let mu = resolve_measures(&program, &config.measure)?;
    let event = config
        .query
        .as_deref()
        .map(|q| parse_query(q, &program))
        .transpose()
        .map_err(|e| CliError::Input(format!("query parse error: {e}")))?;
    let params = QuantParams {
        explore: ExploreParams {
            unroll: config.unroll,
            max_paths: config.max_paths,
        },
        mc: McParams {
            trials: config.mc_trials,
            seed: config.seed,
        },
    };
    let mut quant =
        quantify(&program, &mu, event.as_ref(), &params).map_err(engine_error)?;

    let mut solver = Solver::new(config.solver_cmd.as_deref(), config.timeout_ms);
    for path in &mut quant.paths {
        path.outcome.feasibility = solver.classify(&path.outcome.cfg);
    }

    let mut warnings = Vec::new();
    if config.solver_cmd.is_none() {
        warnings.push(
            "no external solver configured; constraints the built-in presolve cannot decide stay unknown"
                .to_string(),
        );
    } else if let Some(reason) = solver.degraded() {
        warnings.push(format!("external solver disabled: {reason}"));
    }

    let posterior: Option<MassEstimate> = match &event {
        None => None,
        Some(_) => match ratio(&quant.event_total, &quant.evidence_total) {
            Ok(m) => Some(m),
            Err(MeasureError::ZeroEvidence) => {
                warnings.push(
                    "evidence has probability zero; posterior is undefined".to_string(),
                );
                None
            }
            Err(MeasureError::Engine(e)) => return Err(engine_error(e)),
        },
    };

    let echo = ConfigEcho {
        input: config.input.display().to_string(),
        unroll: config.unroll,
        mc_trials: config.mc_trials,
        seed: config.seed,
        solver_cmd: config.solver_cmd.clone(),
        timeout_ms: config.timeout_ms,
        query: config.query.clone(),
        measure: measure_echo(&program, &mu),
        threads: config.threads,
    };
    let elapsed_ms = start.elapsed().as_millis() as u64;
    Ok(build_report(
        echo,
        &program,
        &quant,
        posterior.as_ref(),
        warnings,
        elapsed_ms,
    ))
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Table => render_table(report),
        Format::Json => render_json(report),
    }
}
