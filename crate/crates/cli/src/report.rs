//! Run reports: a stable data model serialized to versioned JSON or
//! rendered as a human-readable table.
//!
//! The report is built once as plain data (all strings precomputed) and
//! both renderers consume only that data, so identical inputs and seeds
//! give byte-identical output except for the elapsed-time field.

use serde::Serialize;

use probsym_core::interp::{print_sym_bool, print_sym_expr};
use probsym_core::measure::{MassEstimate, Method, QuantReport};
use probsym_core::symexec::{Feasibility, PathStatus};
use probsym_core::syntax::{Program, VarId};

/// Echo of the effective run configuration, reproduced in the report so a
/// result is interpretable (and reproducible) on its own.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub input: String,
    pub unroll: u32,
    pub mc_trials: u64,
    pub seed: u64,
    pub solver_cmd: Option<String>,
    pub timeout_ms: u64,
    pub query: Option<String>,
    /// One `name=spec` entry per program variable, in declaration order.
    pub measure: Vec<String>,
    pub threads: usize,
}

/// A probability mass in transport form. `value` and `stderr` carry 17
/// significant digits, enough to reconstruct the `f64` exactly; `exact` is
/// the rational value when the whole computation stayed exact.
#[derive(Clone, Debug, Serialize)]
pub struct Mass {
    pub value: String,
    pub method: &'static str,
    pub stderr: String,
    pub samples: u64,
    pub exact: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaEntry {
    pub var: String,
    pub term: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathRecord {
    pub index: usize,
    /// Branch decisions along the path, true branch first in exploration
    /// order.
    pub choices: Vec<bool>,
    pub status: &'static str,
    pub feasibility: &'static str,
    pub k_y: u32,
    pub k_z: u32,
    pub sigma: Vec<SigmaEntry>,
    pub pc: Vec<String>,
    pub po: Vec<String>,
    pub prior: Mass,
    pub joint: Mass,
    pub event: Mass,
}

/// Bucket counts partition the explored paths: truncated paths count once
/// under `unroll_exhausted`; final paths split by feasibility verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub paths: usize,
    pub feasible: usize,
    pub infeasible_pc: usize,
    pub discarded: usize,
    pub unknown: usize,
    pub unroll_exhausted: usize,
    /// Largest k_y + k_z over all paths.
    pub max_samples: u32,
    pub elapsed_ms: u64,
    pub event_total: Mass,
    pub evidence: Mass,
    pub truncation_bound: Mass,
    pub posterior: Option<Mass>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub config: ConfigEcho,
    pub paths: Vec<PathRecord>,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

fn mass(est: &MassEstimate) -> Mass {
    Mass {
        value: format!("{:.16e}", est.value),
        method: match est.method {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte-carlo",
        },
        stderr: format!("{:.16e}", est.stderr),
        samples: est.samples_used,
        exact: est
            .exact_value
            .as_ref()
            .map(|r| format!("{}/{}", r.numer(), r.denom())),
    }
}

fn feasibility_name(f: Feasibility) -> &'static str {
    match f {
        Feasibility::Feasible => "feasible",
        Feasibility::InfeasiblePc => "infeasible-pc",
        Feasibility::Discarded => "discarded",
        Feasibility::Unknown => "unknown",
    }
}

fn lane_warnings(out: &mut Vec<String>, index: usize, lane: &str, est: &MassEstimate) {
    for w in &est.warnings {
        out.push(format!("path {index} {lane}: {w}"));
    }
}

/// Assemble the report data from the quantified paths. `extra_warnings`
/// come from the pipeline (solver degradation, zero evidence); per-path
/// mass warnings are collected here.
pub fn build_report(
    config: ConfigEcho,
    program: &Program,
    quant: &QuantReport,
    posterior: Option<&MassEstimate>,
    extra_warnings: Vec<String>,
    elapsed_ms: u64,
) -> Report {
    let mut warnings = extra_warnings;
    let mut paths = Vec::with_capacity(quant.paths.len());
    let mut feasible = 0;
    let mut infeasible_pc = 0;
    let mut discarded = 0;
    let mut unknown = 0;
    let mut unroll_exhausted = 0;
    let mut max_samples = 0;
    for (index, p) in quant.paths.iter().enumerate() {
        let cfg = &p.outcome.cfg;
        max_samples = max_samples.max(cfg.k_y + cfg.k_z);
        let status = match p.outcome.status {
            PathStatus::Final => {
                match p.outcome.feasibility {
                    Feasibility::Feasible => feasible += 1,
                    Feasibility::InfeasiblePc => infeasible_pc += 1,
                    Feasibility::Discarded => discarded += 1,
                    Feasibility::Unknown => unknown += 1,
                }
                "final"
            }
            PathStatus::UnrollExhausted => {
                unroll_exhausted += 1;
                "unroll-exhausted"
            }
        };
        let sigma = program
            .vars
            .iter()
            .enumerate()
            .map(|(i, name)| SigmaEntry {
                var: name.clone(),
                term: print_sym_expr(cfg.sub.term(VarId(i as u32)), &program.vars),
            })
            .collect();
        lane_warnings(&mut warnings, index, "prior", &p.prior);
        lane_warnings(&mut warnings, index, "joint", &p.joint);
        if config.query.is_some() {
            lane_warnings(&mut warnings, index, "event", &p.event);
        }
        paths.push(PathRecord {
            index,
            choices: p.outcome.choices.clone(),
            status,
            feasibility: feasibility_name(p.outcome.feasibility),
            k_y: cfg.k_y,
            k_z: cfg.k_z,
            sigma,
            pc: cfg
                .pc
                .iter()
                .map(|b| print_sym_bool(b, &program.vars))
                .collect(),
            po: cfg
                .po
                .iter()
                .map(|b| print_sym_bool(b, &program.vars))
                .collect(),
            prior: mass(&p.prior),
            joint: mass(&p.joint),
            event: mass(&p.event),
        });
    }
    let summary = Summary {
        paths: paths.len(),
        feasible,
        infeasible_pc,
        discarded,
        unknown,
        unroll_exhausted,
        max_samples,
        elapsed_ms,
        event_total: mass(&quant.event_total),
        evidence: mass(&quant.evidence_total),
        truncation_bound: mass(&quant.truncation_bound),
        posterior: posterior.map(mass),
    };
    Report {
        schema: 1,
        config,
        paths,
        summary,
        warnings,
    }
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Short human form of a mass: round-trip float, plus either the exact
/// rational or the Monte Carlo error bar.
fn mass_human(m: &Mass) -> String {
    let value: f64 = m.value.parse().unwrap_or(f64::NAN);
    match (&m.exact, m.method) {
        (Some(e), _) => format!("{value} (exact {e})"),
        (None, _) if m.samples > 0 => {
            let stderr: f64 = m.stderr.parse().unwrap_or(f64::NAN);
            format!("{value} +- {stderr} ({} trials)", m.samples)
        }
        _ => format!("{value}"),
    }
}

fn conjunction(atoms: &[String]) -> String {
    if atoms.is_empty() {
        "true".to_string()
    } else {
        atoms.join(" ∧ ")
    }
}

pub fn render_table(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!("input: {}\n", report.config.input));
    if let Some(q) = &report.config.query {
        out.push_str(&format!("query: {q}\n"));
    }
    out.push_str("\npaths:\n");
    for p in &report.paths {
        let sigma = p
            .sigma
            .iter()
            .map(|e| format!("{} ↦ {}", e.var, e.term))
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!(
            "  #{} {} [{}] k_y={} k_z={}\n",
            p.index, p.status, p.feasibility, p.k_y, p.k_z
        ));
        out.push_str(&format!("    sigma: {{{sigma}}}\n"));
        out.push_str(&format!("    pc: {}\n", conjunction(&p.pc)));
        out.push_str(&format!("    po: {}\n", conjunction(&p.po)));
        out.push_str(&format!("    prior: {}\n", mass_human(&p.prior)));
        out.push_str(&format!("    joint: {}\n", mass_human(&p.joint)));
        if report.config.query.is_some() {
            out.push_str(&format!("    event: {}\n", mass_human(&p.event)));
        }
    }
    let s = &report.summary;
    out.push_str("\nsummary:\n");
    out.push_str(&format!(
        "  actual: {} feasible ({} infeasible-pc, {} discarded, {} unknown, {} unroll-exhausted)\n",
        s.feasible, s.infeasible_pc, s.discarded, s.unknown, s.unroll_exhausted
    ));
    out.push_str(&format!("  samples: {}\n", s.max_samples));
    out.push_str(&format!("  time: {} ms\n", s.elapsed_ms));
    out.push_str(&format!("  evidence: {}\n", mass_human(&s.evidence)));
    if report.config.query.is_some() {
        out.push_str(&format!("  event total: {}\n", mass_human(&s.event_total)));
    }
    out.push_str(&format!(
        "  truncation bound: {}\n",
        mass_human(&s.truncation_bound)
    ));
    match (&s.posterior, &report.config.query) {
        (Some(p), _) => out.push_str(&format!("  posterior: {}\n", mass_human(p))),
        (None, Some(_)) => out.push_str("  posterior: undefined\n"),
        (None, None) => {}
    }
    if !report.warnings.is_empty() {
        out.push_str("\nwarnings:\n");
        for w in &report.warnings {
            out.push_str(&format!("  {w}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use probsym_core::measure::{quantify, QuantParams};
    use probsym_core::rat::rat;
    use probsym_core::syntax::parse_program;
    use probsym_core::concrete::VarMeasure;

    fn demo_report(query: Option<&str>) -> Report {
        let p = parse_program("x ~ rnd; if (x < 0.5) { y := 1 } else { y := 0 }").unwrap();
        let mu = vec![VarMeasure::Point(0.0); p.vars.len()];
        let quant = quantify(&p, &mu, None, &QuantParams::default()).unwrap();
        let config = ConfigEcho {
            input: "demo.prob".into(),
            unroll: 4,
            mc_trials: 100_000,
            seed: 0,
            solver_cmd: None,
            timeout_ms: 5000,
            query: query.map(String::from),
            measure: p.vars.iter().map(|v| format!("{v}=point:0")).collect(),
            threads: 1,
        };
        build_report(config, &p, &quant, None, vec![], 3)
    }

    #[test]
    fn seventeen_digit_decimal_strings_round_trip_the_floats() {
        let est = MassEstimate {
            value: 0.51,
            method: Method::Exact,
            stderr: 0.0,
            samples_used: 0,
            exact_value: Some(rat(51, 100)),
            warnings: vec![],
        };
        let m = mass(&est);
        assert_eq!(m.value, "5.1000000000000001e-1");
        assert_eq!(m.value.parse::<f64>().unwrap(), 0.51);
        assert_eq!(m.exact.as_deref(), Some("51/100"));
        assert_eq!(m.method, "exact");
    }

    #[test]
    fn bucket_counts_partition_the_paths() {
        let r = demo_report(None);
        let s = &r.summary;
        assert_eq!(
            s.feasible + s.infeasible_pc + s.discarded + s.unknown + s.unroll_exhausted,
            s.paths
        );
        assert_eq!(s.paths, r.paths.len());
        assert_eq!(s.max_samples, 1);
    }

    #[test]
    fn json_is_identical_across_builds_except_elapsed_time() {
        let a = render_json(&demo_report(None));
        let b = render_json(&demo_report(None));
        assert_eq!(a, b);
        assert!(a.contains("\"schema\": 1"));
        assert!(a.contains("\"elapsed_ms\": 3"));
    }

    #[test]
    fn table_reconstructs_substitutions_and_conjunctions() {
        let r = demo_report(None);
        let t = render_table(&r);
        assert!(t.contains("y ↦ 1"), "table was:\n{t}");
        assert!(t.contains("pc: x0 < 0.5") || t.contains("pc: y0 < 0.5"), "table was:\n{t}");
        assert!(t.contains("samples: 1"));
        // No query, so no posterior line at all.
        assert!(!t.contains("posterior"));
    }
}
