//! Concrete operational semantics and the Monte Carlo simulator.
//!
//! Running a program at a valuation either terminates with final variable
//! values, aborts on a failed observe, runs out of loop fuel, or hits an
//! evaluation domain error. The simulator repeats such runs over freshly
//! drawn valuations and reports outcome counts and query frequencies; it is
//! the ground truth the symbolic path masses are tested against.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::interp::{eval_bool, eval_expr, Valuation};
use crate::math;
use crate::syntax::{desugar, BoolExpr, Program, Stmt};

/// Result of one concrete run.
#[derive(Clone, PartialEq, Debug)]
pub enum RunResult {
    /// Normal termination: final variable values and the number of stream
    /// entries consumed per distribution.
    Terminated {
        vars: Vec<f64>,
        used_uni: u32,
        used_nrm: u32,
    },
    /// A failed observe.
    Aborted,
    /// The fuel bound on loop iterations was hit (not the same thing as
    /// divergence, but all a finite run can report).
    OutOfFuel,
    /// Square root of a negative number during evaluation.
    DomainError,
}

/// Input measure for one program variable. The inputs are independent, so a
/// program's input measure is one of these per variable.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum VarMeasure {
    /// Deterministic value (the default input measure is `Point(0)` for
    /// every variable).
    Point(f64),
    /// Uniform on the unit interval.
    Uniform01,
    /// Standard normal.
    StdNormal,
}

struct RunState<'a> {
    vars: Vec<f64>,
    rho: &'a mut Valuation,
    next_uni: u32,
    next_nrm: u32,
    fuel: u64,
}

enum Stop {
    Aborted,
    OutOfFuel,
    Domain,
}

/// Run a program at a valuation. `fuel` bounds the total number of loop
/// iterations across the whole run. The valuation is only extended (streams
/// are drawn on demand), never overwritten; the run's variable state starts
/// from `rho.vars`.
pub fn run_concrete(p: &Program, rho: &mut Valuation, fuel: u64) -> RunResult {
    let core = desugar(p);
    let mut st = RunState {
        vars: rho.vars.clone(),
        rho,
        next_uni: 0,
        next_nrm: 0,
        fuel,
    };
    match exec(&core.body, &mut st) {
        Ok(()) => RunResult::Terminated {
            vars: st.vars,
            used_uni: st.next_uni,
            used_nrm: st.next_nrm,
        },
        Err(Stop::Aborted) => RunResult::Aborted,
        Err(Stop::OutOfFuel) => RunResult::OutOfFuel,
        Err(Stop::Domain) => RunResult::DomainError,
    }
}

fn exec(s: &Stmt, st: &mut RunState) -> Result<(), Stop> {
    match s {
        Stmt::Skip => Ok(()),
        Stmt::Assign(x, e) => {
            st.vars[x.0 as usize] = eval_expr(e, &st.vars).map_err(|_| Stop::Domain)?;
            Ok(())
        }
        Stmt::SampleUniform(x) => {
            st.vars[x.0 as usize] = st.rho.uni(st.next_uni);
            st.next_uni += 1;
            Ok(())
        }
        Stmt::SampleStdNormal(x) => {
            st.vars[x.0 as usize] = st.rho.nrm(st.next_nrm);
            st.next_nrm += 1;
            Ok(())
        }
        Stmt::Observe(b) => {
            if eval_bool(b, &st.vars).map_err(|_| Stop::Domain)? {
                Ok(())
            } else {
                Err(Stop::Aborted)
            }
        }
        Stmt::Seq(a, b) => {
            exec(a, st)?;
            exec(b, st)
        }
        Stmt::If(c, t, e) => {
            if eval_bool(c, &st.vars).map_err(|_| Stop::Domain)? {
                exec(t, st)
            } else {
                exec(e, st)
            }
        }
        Stmt::While(_, c, body) => {
            while eval_bool(c, &st.vars).map_err(|_| Stop::Domain)? {
                if st.fuel == 0 {
                    return Err(Stop::OutOfFuel);
                }
                st.fuel -= 1;
                exec(body, st)?;
            }
            Ok(())
        }
        // run_concrete desugars up front; direct callers must too.
        Stmt::SampleBern(..) | Stmt::SampleNorm(..) => Err(Stop::Domain),
    }
}

/// A frequency with its binomial standard error and 95% Wilson interval.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct FreqEstimate {
    pub value: f64,
    pub stderr: f64,
    pub lo: f64,
    pub hi: f64,
}

impl FreqEstimate {
    fn from_counts(hits: u64, n: u64) -> FreqEstimate {
        // 97.5% normal quantile, for a two-sided 95% interval.
        const Z: f64 = 1.959963984540054;
        let nf = n as f64;
        let p = hits as f64 / nf;
        let denom = 1.0 + Z * Z / nf;
        let center = (p + Z * Z / (2.0 * nf)) / denom;
        let half = Z * math::sqrt(p * (1.0 - p) / nf + Z * Z / (4.0 * nf * nf)) / denom;
        FreqEstimate {
            value: p,
            stderr: math::sqrt(p * (1.0 - p) / nf),
            lo: math::max(0.0, center - half),
            hi: math::min(1.0, center + half),
        }
    }
}

/// Aggregate result of [`simulate`].
#[derive(Clone, PartialEq, Debug)]
pub struct SimReport {
    pub trials: u64,
    pub terminated: u64,
    pub aborted: u64,
    pub out_of_fuel: u64,
    pub domain_errors: u64,
    /// Frequency of "terminated and satisfies the query" over all trials:
    /// the unnormalized mass a symbolic path sum predicts.
    pub joint: FreqEstimate,
    /// Frequency of the query among terminated trials (the posterior
    /// estimate); absent when nothing terminated.
    pub accepted: Option<FreqEstimate>,
}

/// Run `trials` independent executions, drawing each trial's inputs from
/// `mu` and its streams from a per-trial generator, and count outcomes. A
/// missing query means "true" (count every termination). Deterministic in
/// `seed`; trials are independently seeded, so any sharding that preserves
/// trial indices reproduces this exact result.
pub fn simulate(
    p: &Program,
    mu: &[VarMeasure],
    query: Option<&BoolExpr>,
    trials: u64,
    seed: u64,
    fuel: u64,
) -> SimReport {
    assert_eq!(mu.len(), p.n(), "one input measure per program variable");
    assert!(trials >= 1);
    let core = desugar(p);
    let mut terminated = 0;
    let mut aborted = 0;
    let mut out_of_fuel = 0;
    let mut domain_errors = 0;
    let mut hits = 0;
    for trial in 0..trials {
        let trial_seed = math::derive_seed(seed, 1, trial);
        let mut rho = Valuation::new(draw_vars(mu, trial_seed), trial_seed);
        match run_concrete(&core, &mut rho, fuel) {
            RunResult::Terminated { vars, .. } => {
                terminated += 1;
                // A query that cannot be evaluated does not count as a hit.
                let hit = match query {
                    Some(q) => eval_bool(q, &vars).unwrap_or(false),
                    None => true,
                };
                if hit {
                    hits += 1;
                }
            }
            RunResult::Aborted => aborted += 1,
            RunResult::OutOfFuel => out_of_fuel += 1,
            RunResult::DomainError => domain_errors += 1,
        }
    }
    SimReport {
        trials,
        terminated,
        aborted,
        out_of_fuel,
        domain_errors,
        joint: FreqEstimate::from_counts(hits, trials),
        accepted: if terminated > 0 {
            Some(FreqEstimate::from_counts(hits, terminated))
        } else {
            None
        },
    }
}

/// Draw the program variables of one trial. Stream 2 of the trial generator
/// is reserved for these (0 and 1 drive the run's sample streams).
pub(crate) fn draw_vars(mu: &[VarMeasure], trial_seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(2);
    mu.iter()
        .map(|m| match m {
            VarMeasure::Point(v) => *v,
            VarMeasure::Uniform01 => math::bits_to_unit(rng.next_u64()),
            VarMeasure::StdNormal => math::normal_inv_cdf(math::bits_to_open_unit(rng.next_u64())),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;
    use alloc::vec;

    #[test]
    fn skip_terminates_with_the_input_unchanged() {
        let p = parse_program("skip").unwrap();
        let mut rho = Valuation::new(vec![], 0);
        assert_eq!(
            run_concrete(&p, &mut rho, 100),
            RunResult::Terminated {
                vars: vec![],
                used_uni: 0,
                used_nrm: 0
            }
        );
    }

    #[test]
    fn failed_observe_aborts() {
        let p = parse_program("observe (false)").unwrap();
        let mut rho = Valuation::new(vec![], 0);
        assert_eq!(run_concrete(&p, &mut rho, 100), RunResult::Aborted);
    }

    #[test]
    fn gender_height_run_follows_the_pinned_streams() {
        let p = parse_program(
            "gender ~ bern(0.51); \
             if (gender = 1) {height ~ norm(175, 72)} else {height ~ norm(161, 50)}; \
             observe (height >= 200)",
        )
        .unwrap();
        let mut rho = Valuation::with_prefixes(vec![0.0, 0.0], vec![0.3], vec![3.0], 0);
        match run_concrete(&p, &mut rho, 100) {
            RunResult::Terminated {
                vars,
                used_uni,
                used_nrm,
            } => {
                assert_eq!(vars[0], 1.0);
                assert!((vars[1] - 200.45584412271571).abs() < 1e-12);
                assert_eq!((used_uni, used_nrm), (1, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        // A short draw misses the observation and aborts.
        let mut rho = Valuation::with_prefixes(vec![0.0, 0.0], vec![0.3], vec![0.0], 0);
        assert_eq!(run_concrete(&p, &mut rho, 100), RunResult::Aborted);
    }

    #[test]
    fn fuel_limits_total_loop_iterations() {
        let p = parse_program("while (true) {skip}").unwrap();
        let mut rho = Valuation::new(vec![], 0);
        assert_eq!(run_concrete(&p, &mut rho, 1000), RunResult::OutOfFuel);
        let q = parse_program("i := 3; while (0 < i) {i := i - 1}").unwrap();
        let mut rho = Valuation::new(vec![0.0], 0);
        assert_eq!(run_concrete(&q, &mut rho, 2), RunResult::OutOfFuel);
        let mut rho = Valuation::new(vec![0.0], 0);
        assert!(matches!(
            run_concrete(&q, &mut rho, 3),
            RunResult::Terminated { .. }
        ));
    }

    #[test]
    fn domain_errors_are_reported_distinctly() {
        let p = parse_program("x := sqrt(0 - 1)").unwrap();
        let mut rho = Valuation::new(vec![0.0], 0);
        assert_eq!(run_concrete(&p, &mut rho, 10), RunResult::DomainError);
    }

    #[test]
    fn simulation_is_deterministic_and_exact_on_point_inputs() {
        let p = parse_program("skip").unwrap();
        let query = crate::syntax::parse_query("x = 0", &parse_program("x := x").unwrap()).unwrap();
        let r1 = simulate(&p, &[], None, 100, 9, 10);
        let r2 = simulate(&p, &[], None, 100, 9, 10);
        assert_eq!(r1, r2);
        assert_eq!(r1.joint.value, 1.0);
        let q = parse_program("x := x").unwrap();
        let r3 = simulate(&q, &[VarMeasure::Point(0.0)], Some(&query), 50, 1, 10);
        assert_eq!(r3.joint.value, 1.0);
        assert_eq!(r3.terminated, 50);
    }

    #[test]
    fn rejected_programs_count_aborts() {
        let p = parse_program("observe (false)").unwrap();
        let r = simulate(&p, &[], None, 200, 3, 10);
        assert_eq!(r.aborted, 200);
        assert_eq!(r.joint.value, 0.0);
        assert!(r.accepted.is_none());
    }

    #[test]
    fn bernoulli_frequency_approaches_its_bias() {
        let p = parse_program("x ~ bern(0.3)").unwrap();
        let program = parse_program("x := x").unwrap();
        let query = crate::syntax::parse_query("x = 1", &program).unwrap();
        let r = simulate(&p, &[VarMeasure::Point(0.0)], Some(&query), 10_000, 17, 10);
        assert_eq!(r.terminated, 10_000);
        let diff = (r.joint.value - 0.3).abs();
        assert!(diff < 4.0 * (0.3f64 * 0.7 / 10_000.0).sqrt(), "diff {diff}");
        assert!(r.joint.lo < 0.3 && 0.3 < r.joint.hi);
    }

    #[test]
    fn wilson_interval_spot_check() {
        // 8 successes in 10: interval approximately [0.49, 0.94].
        let f = FreqEstimate::from_counts(8, 10);
        assert!((f.value - 0.8).abs() < 1e-15);
        assert!((f.lo - 0.49).abs() < 0.02, "lo {}", f.lo);
        assert!((f.hi - 0.94).abs() < 0.02, "hi {}", f.hi);
        let exact = FreqEstimate::from_counts(10, 10);
        assert_eq!(exact.value, 1.0);
        assert!(exact.hi > 0.999 && exact.lo < 1.0);
    }
}
