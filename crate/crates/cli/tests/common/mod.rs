//! Fixtures shared by the corpus regression and acceptance targets: the
//! bundled corpus location and the frozen per-program facts (path and
//! verdict counts, and evidence values checked against independently
//! computed references).

#![allow(dead_code)]

use std::path::PathBuf;

use probsym::pipeline::{run, RunConfig};

pub struct Frozen {
    pub file: &'static str,
    pub paths: usize,
    pub feasible: usize,
    pub infeasible_pc: usize,
    pub discarded: usize,
    pub unknown: usize,
    pub unroll_exhausted: usize,
    pub max_samples: u32,
    /// Exact evidence as `numer/denom` when the whole run stays rational.
    pub evidence_exact: Option<&'static str>,
    /// Reference evidence value and the tolerance to hold it to. Exact
    /// rows use a round-off tolerance; Monte Carlo rows get several
    /// standard errors; closed-form CDF rows sit in between.
    pub evidence: f64,
    pub tolerance: f64,
}

pub const FROZEN: &[Frozen] = &[
    Frozen {
        file: "burglar_alarm.prob",
        paths: 144,
        feasible: 4,
        infeasible_pc: 132,
        discarded: 8,
        unknown: 0,
        unroll_exhausted: 0,
        max_samples: 4,
        evidence_exact: Some("9443/1250000"),
        evidence: 0.0075544,
        tolerance: 1e-15,
    },
    Frozen {
        file: "coin_bias.prob",
        paths: 2,
        feasible: 0,
        infeasible_pc: 0,
        discarded: 0,
        unknown: 2,
        unroll_exhausted: 0,
        max_samples: 3,
        evidence_exact: None,
        // True value 1/3; two Monte Carlo lanes at 10^5 trials each.
        evidence: 0.333333333333333,
        tolerance: 0.01,
    },
    Frozen {
        file: "die_cond.prob",
        paths: 16,
        feasible: 6,
        infeasible_pc: 8,
        discarded: 2,
        unknown: 0,
        unroll_exhausted: 0,
        max_samples: 3,
        evidence_exact: Some("3/4"),
        evidence: 0.75,
        tolerance: 1e-15,
    },
    Frozen {
        file: "gender_height.prob",
        paths: 4,
        feasible: 0,
        infeasible_pc: 2,
        discarded: 0,
        unknown: 2,
        unroll_exhausted: 0,
        max_samples: 2,
        evidence_exact: None,
        // 0.51 (1 - Phi(25/sqrt 72)) + 0.49 (1 - Phi(39/sqrt 50)).
        evidence: 8.201469981834065e-4,
        tolerance: 1e-10,
    },
    Frozen {
        file: "grass.prob",
        paths: 100,
        feasible: 5,
        infeasible_pc: 91,
        discarded: 4,
        unknown: 0,
        unroll_exhausted: 0,
        max_samples: 4,
        evidence_exact: Some("281/500"),
        evidence: 0.562,
        tolerance: 1e-15,
    },
    Frozen {
        file: "mixture.prob",
        paths: 4,
        feasible: 2,
        infeasible_pc: 2,
        discarded: 0,
        unknown: 0,
        unroll_exhausted: 0,
        max_samples: 2,
        evidence_exact: Some("17/20"),
        evidence: 0.85,
        tolerance: 1e-15,
    },
    Frozen {
        file: "murder_mystery.prob",
        paths: 8,
        feasible: 2,
        infeasible_pc: 4,
        discarded: 2,
        unknown: 0,
        unroll_exhausted: 0,
        max_samples: 2,
        evidence_exact: Some("431/1000"),
        evidence: 0.431,
        tolerance: 1e-15,
    },
    Frozen {
        file: "neighbor_age.prob",
        paths: 2,
        feasible: 0,
        infeasible_pc: 0,
        discarded: 0,
        unknown: 2,
        unroll_exhausted: 0,
        max_samples: 2,
        evidence_exact: None,
        // (1/40) integral over [20, 60] of Phi((age - 30)/5).
        evidence: 0.7489386621924409,
        tolerance: 0.01,
    },
    Frozen {
        file: "noisy_or.prob",
        paths: 400,
        feasible: 14,
        infeasible_pc: 382,
        discarded: 4,
        unknown: 0,
        unroll_exhausted: 0,
        max_samples: 5,
        evidence_exact: Some("5981/25000"),
        evidence: 0.23924,
        tolerance: 1e-15,
    },
    Frozen {
        file: "piranha.prob",
        paths: 8,
        feasible: 3,
        infeasible_pc: 4,
        discarded: 1,
        unknown: 0,
        unroll_exhausted: 0,
        max_samples: 2,
        evidence_exact: Some("3/4"),
        evidence: 0.75,
        tolerance: 1e-15,
    },
    Frozen {
        file: "random_walk.prob",
        paths: 196,
        feasible: 3,
        infeasible_pc: 33,
        discarded: 0,
        unknown: 0,
        unroll_exhausted: 160,
        max_samples: 4,
        evidence_exact: Some("3479/5000"),
        evidence: 0.6958,
        tolerance: 1e-15,
    },
    Frozen {
        file: "trueskill.prob",
        paths: 2,
        feasible: 0,
        infeasible_pc: 0,
        discarded: 0,
        unknown: 2,
        unroll_exhausted: 0,
        max_samples: 4,
        evidence_exact: None,
        // Symmetric priors: A beats B with probability exactly 1/2.
        evidence: 0.5,
        tolerance: 0.01,
    },
    Frozen {
        file: "two_coins.prob",
        paths: 4,
        feasible: 3,
        infeasible_pc: 0,
        discarded: 1,
        unknown: 0,
        unroll_exhausted: 0,
        max_samples: 2,
        evidence_exact: Some("3/4"),
        evidence: 0.75,
        tolerance: 1e-15,
    },
    Frozen {
        file: "uniform_product.prob",
        paths: 1,
        feasible: 0,
        infeasible_pc: 0,
        discarded: 0,
        unknown: 1,
        unroll_exhausted: 0,
        max_samples: 2,
        evidence_exact: None,
        // 1/4 + ln(4)/4.
        evidence: 0.5965735902799727,
        tolerance: 0.01,
    },
];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus"))
}

pub fn corpus(name: &str) -> PathBuf {
    corpus_dir().join(name)
}

/// Run one corpus program with default settings and compare its summary
/// against the frozen facts. Returns a description of the first drift.
pub fn check_entry(frozen: &Frozen) -> Result<(), String> {
    let report =
        run(&RunConfig::new(corpus(frozen.file))).map_err(|e| format!("{}: {e}", frozen.file))?;
    let s = &report.summary;
    let got = (
        s.paths,
        s.feasible,
        s.infeasible_pc,
        s.discarded,
        s.unknown,
        s.unroll_exhausted,
        s.max_samples,
    );
    let want = (
        frozen.paths,
        frozen.feasible,
        frozen.infeasible_pc,
        frozen.discarded,
        frozen.unknown,
        frozen.unroll_exhausted,
        frozen.max_samples,
    );
    if got != want {
        return Err(format!("{}: count drift, {got:?} vs {want:?}", frozen.file));
    }
    if s.evidence.exact.as_deref() != frozen.evidence_exact {
        return Err(format!(
            "{}: exactness drift, {:?} vs {:?}",
            frozen.file, s.evidence.exact, frozen.evidence_exact
        ));
    }
    let ev: f64 = s.evidence.value.parse().map_err(|e| format!("{}: {e}", frozen.file))?;
    if (ev - frozen.evidence).abs() > frozen.tolerance {
        return Err(format!(
            "{}: evidence {ev} vs reference {} (tolerance {})",
            frozen.file, frozen.evidence, frozen.tolerance
        ));
    }
    Ok(())
}
