//! Subprocess protocol tests against scripted stand-in solvers, plus the
//! pruning soundness and degradation guarantees that hold with no solver
//! at all.

use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::PathBuf;
use std::time::Instant;

use probsym::pipeline::{run, RunConfig};
use probsym::solver::{SatVerdict, Solver};

use probsym_core::gen::Gen;
use probsym_core::interp::{eval_sym_bool, SymBool, SymExpr, Valuation};
use probsym_core::rat::rat;
use probsym_core::symexec::{explore, ExploreParams};
use probsym_core::syntax::RelOp;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus")).join(name)
}

/// Write an executable shell script that consumes stdin and runs `body`.
fn fake_solver(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, format!("#!/bin/sh\ncat > /dev/null\n{body}\n")).expect("write script");
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).expect("chmod script");
    path.to_str().expect("utf-8 path").to_string()
}

/// A constraint the built-in presolve cannot decide, so checking it must
/// reach the external process.
fn nonlinear_atom() -> Vec<SymBool> {
    vec![SymBool::cmp(
        RelOp::Lt,
        SymExpr::mul(SymExpr::uni(0), SymExpr::uni(0)),
        SymExpr::Const(rat(1, 2)),
    )]
}

#[test]
fn sat_verdicts_and_models_come_back_from_the_subprocess() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = fake_solver(
        &dir,
        "sat-with-model",
        "echo sat\necho '(model (define-fun u0 () Real (/ 1 4)))'",
    );
    let mut solver = Solver::new(Some(&cmd), 5000);
    match solver.check(&nonlinear_atom()) {
        SatVerdict::Sat(Some(model)) => assert_eq!(model.get("u0"), Some(&rat(1, 4))),
        other => panic!("expected sat with model, got {other:?}"),
    }
    assert!(solver.degraded().is_none());
}

#[test]
fn unsat_verdicts_come_back_from_the_subprocess() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = fake_solver(&dir, "unsat", "echo unsat");
    let mut solver = Solver::new(Some(&cmd), 5000);
    assert_eq!(solver.check(&nonlinear_atom()), SatVerdict::Unsat);
}

#[test]
fn unrecognized_output_is_unknown_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["echo unknown", "echo sorry, no", ":"] {
        let cmd = fake_solver(&dir, "odd", body);
        let mut solver = Solver::new(Some(&cmd), 5000);
        assert!(
            matches!(solver.check(&nonlinear_atom()), SatVerdict::Unknown(_)),
            "output {body:?} must map to Unknown"
        );
    }
}

#[test]
fn slow_solvers_are_killed_at_the_timeout() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = fake_solver(&dir, "slow", "sleep 30\necho sat");
    let mut solver = Solver::new(Some(&cmd), 150);
    let start = Instant::now();
    let verdict = solver.check(&nonlinear_atom());
    assert!(matches!(&verdict, SatVerdict::Unknown(r) if r == "timeout"), "got {verdict:?}");
    assert!(
        start.elapsed().as_secs() < 5,
        "timeout must not wait for the process to finish on its own"
    );
    // A timeout is per query, not a permanent failure.
    assert!(solver.degraded().is_none());
}

#[test]
fn solver_scripts_receive_a_wellformed_smt_script() {
    let dir = tempfile::tempdir().unwrap();
    let capture = dir.path().join("script.smt2");
    // This solver records its input instead of solving.
    let path = dir.path().join("recorder");
    fs::write(
        &path,
        format!("#!/bin/sh\ncat > {}\necho unknown\n", capture.display()),
    )
    .unwrap();
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();

    let mut solver = Solver::new(Some(path.to_str().unwrap()), 5000);
    let _ = solver.check(&nonlinear_atom());
    let script = fs::read_to_string(&capture).expect("captured script");
    assert!(script.starts_with("(set-option :produce-models true)"));
    assert!(script.contains("(set-logic QF_NRA)"));
    assert!(script.contains("(declare-const u0 Real)"));
    assert!(script.contains("(assert (< (* u0 u0) (/ 1 2)))"));
    assert!(script.trim_end().ends_with("(get-model)"));
}

/// Empirical unsat soundness: whenever a concrete input satisfies a path
/// condition, checking that condition must not claim unsatisfiability.
/// Runs solverless, which exercises the presolves that do the pruning.
#[test]
fn pruning_is_never_wrong_on_satisfied_path_conditions() {
    let mut solver = Solver::new(None, 0);
    let mut confirmed = 0usize;
    let mut program_index = 0u64;
    while confirmed < 1000 {
        let mut g = Gen::new(0xfeed_5eed ^ program_index);
        program_index += 1;
        let p = match program_index % 3 {
            0 => g.loopfree(3, 5),
            1 => g.loopfree_total(3, 5),
            _ => g.bern_program(3, 4, 2),
        };
        let outcomes = match explore(&p, &ExploreParams::default()) {
            Ok(o) => o,
            Err(_) => continue,
        };
        for _trial in 0..20u64 {
            let master = Valuation::new(g.input_vars(3), g.seed());
            for outcome in &outcomes {
                let mut rho = master.clone();
                let holds = outcome
                    .cfg
                    .pc
                    .iter()
                    .all(|a| matches!(eval_sym_bool(a, &mut rho), Ok(true)));
                if holds {
                    confirmed += 1;
                    assert_ne!(
                        solver.check(&outcome.cfg.pc),
                        SatVerdict::Unsat,
                        "pruned a path condition satisfied by a concrete input
program: {p:?}"
                    );
                }
            }
        }
    }
}

/// Feasibility checking is an optimization: turning the solver off (or
/// pointing it at a missing binary) must leave every reported mass and
/// path untouched, shifting only feasibility labels and warnings.
#[test]
fn degraded_solvers_never_change_measure_results() {
    // The first two need the external solver (a square root and a
    // nonlinear product); the walk is fully decided by the presolve, so a
    // broken solver is never consulted there and no warning is owed.
    for (file, needs_solver) in [
        ("gender_height.prob", true),
        ("uniform_product.prob", true),
        ("random_walk.prob", false),
    ] {
        let mut plain = RunConfig::new(corpus(file));
        plain.query = Some("1 = 1".to_string());
        let mut broken = RunConfig::new(corpus(file));
        broken.query = Some("1 = 1".to_string());
        broken.solver_cmd = Some("probsym-missing-solver-binary".to_string());

        let a = run(&plain).unwrap();
        let b = run(&broken).unwrap();
        assert_eq!(a.paths.len(), b.paths.len());
        for (pa, pb) in a.paths.iter().zip(&b.paths) {
            assert_eq!(pa.prior.value, pb.prior.value, "{file}");
            assert_eq!(pa.joint.value, pb.joint.value, "{file}");
            assert_eq!(pa.event.value, pb.event.value, "{file}");
            assert_eq!(pa.pc, pb.pc);
            assert_eq!(pa.po, pb.po);
            assert_eq!(pa.status, pb.status);
        }
        assert_eq!(a.summary.evidence.value, b.summary.evidence.value);
        assert_eq!(
            a.summary.truncation_bound.value,
            b.summary.truncation_bound.value
        );
        let warned = b
            .warnings
            .iter()
            .any(|w| w.contains("external solver disabled"));
        assert_eq!(warned, needs_solver, "{file}");
    }
}
