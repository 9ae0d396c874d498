//! Structure of the explored path set: path conditions are pairwise
//! disjoint, they partition the input space when every operation is total,
//! and every reported configuration obeys the sample index discipline.

use probsym_core::gen::Gen;
use probsym_core::interp::{eval_sym_bool, Valuation};
use probsym_core::symexec::{explore, ExploreParams, PathOutcome, PathStatus};
use probsym_core::syntax::Program;

fn pc_holds(outcome: &PathOutcome, rho: &Valuation) -> bool {
    let mut r = rho.clone();
    outcome
        .cfg
        .pc
        .iter()
        .all(|atom| matches!(eval_sym_bool(atom, &mut r), Ok(true)))
}

fn mixed_program(g: &mut Gen, index: u32) -> Program {
    match index % 5 {
        0 | 1 => g.loopfree(3, 6),
        2 => g.with_loops(3, 5),
        3 => g.bern_program(3, 5, 2),
        _ => g.loopfree_total(3, 6),
    }
}

#[test]
fn at_most_one_final_path_condition_holds_anywhere() {
    let mut g = Gen::new(0x0d15);
    let params = ExploreParams::default();
    for case in 0..250u32 {
        let p = mixed_program(&mut g, case);
        let outcomes = explore(&p, &params).expect("bounded exploration");
        let finals: Vec<&PathOutcome> = outcomes
            .iter()
            .filter(|o| o.status == PathStatus::Final)
            .collect();
        for trial in 0..40 {
            let rho = Valuation::new(g.input_vars(3), g.seed());
            let live = finals.iter().filter(|o| pc_holds(o, &rho)).count();
            assert!(live <= 1, "case {case} trial {trial}: {live} live paths");
        }
    }
}

#[test]
fn total_loopfree_path_conditions_partition_the_input_space() {
    let mut g = Gen::new(0x9a27);
    let params = ExploreParams::default();
    for case in 0..200u32 {
        let p = g.loopfree_total(3, 6);
        let outcomes = explore(&p, &params).expect("bounded exploration");
        for trial in 0..50 {
            let rho = Valuation::new(g.input_vars(3), g.seed());
            let live = outcomes.iter().filter(|o| pc_holds(o, &rho)).count();
            assert_eq!(live, 1, "case {case} trial {trial}");
        }
    }
}

#[test]
fn every_outcome_respects_the_index_discipline() {
    let mut g = Gen::new(0x1d0c);
    let params = ExploreParams::default();
    for case in 0..200u32 {
        let p = mixed_program(&mut g, case);
        for o in explore(&p, &params).expect("bounded exploration") {
            assert!(o.cfg.index_discipline_ok(), "case {case}");
        }
    }
}
