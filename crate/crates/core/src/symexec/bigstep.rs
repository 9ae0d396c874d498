//! Compositional (big-step) enumeration of final configurations for
//! loop-free programs.
//!
//! Sequencing works by configuration composition: the second stage's terms
//! are rewritten into the first stage's frame (variables through the first
//! substitution, sample indices shifted past the first stage's draws), and
//! branching prepends the guard to each branch configuration. On loop-free
//! programs this enumerates, one composite per control-flow path and in the
//! same order, exactly what small-step exploration produces, which makes
//! the two implementations mutual oracles.

use alloc::vec::Vec;

use super::{Configuration, EngineError};
use crate::interp::{inject_bool, Substitution, SymExpr};
use crate::syntax::{desugar, BoolExpr, Program, Stmt, VarId};

/// Sequential composition: the configuration of "first `a`, then `b`".
/// `b`'s variable reads become `a`'s terms and `b`'s sample indices move
/// past `a`'s draws; conditions concatenate, with `b`'s rewritten likewise.
pub fn compose(a: &Configuration, b: &Configuration) -> Configuration {
    let transform = |term: &SymExpr| a.sub.apply_sym(&term.shift_samples(a.k_y, a.k_z));
    let mut sub = Substitution::identity(a.sub.n());
    for i in 0..b.sub.n() {
        sub.set(VarId(i as u32), transform(b.sub.term(VarId(i as u32))));
    }
    let lifted = |atoms: &[crate::interp::SymBool]| {
        atoms
            .iter()
            .map(|atom| a.sub.apply_sym_bool(&atom.shift_samples(a.k_y, a.k_z)))
            .collect::<Vec<_>>()
    };
    let mut pc = a.pc.clone();
    pc.extend(lifted(&b.pc));
    let mut po = a.po.clone();
    po.extend(lifted(&b.po));
    Configuration {
        sub,
        k_y: a.k_y + b.k_y,
        k_z: a.k_z + b.k_z,
        pc,
        po,
    }
}

/// Enumerate the final configurations of a loop-free program
/// compositionally, in the same order as exploration (true branch first).
pub fn bigstep(p: &Program) -> Result<Vec<Configuration>, EngineError> {
    let core = desugar(p);
    bigstep_stmt(&core.body, core.n())
}

fn bigstep_stmt(s: &Stmt, n: usize) -> Result<Vec<Configuration>, EngineError> {
    match s {
        Stmt::Skip => Ok(alloc::vec![Configuration::initial(n)]),
        Stmt::Assign(x, e) => {
            let mut cfg = Configuration::initial(n);
            let term = cfg.sub.apply_expr(e);
            cfg.sub.set(*x, term);
            Ok(alloc::vec![cfg])
        }
        Stmt::SampleUniform(x) => {
            let mut cfg = Configuration::initial(n);
            cfg.sub.set(*x, SymExpr::uni(0));
            cfg.k_y = 1;
            Ok(alloc::vec![cfg])
        }
        Stmt::SampleStdNormal(x) => {
            let mut cfg = Configuration::initial(n);
            cfg.sub.set(*x, SymExpr::nrm(0));
            cfg.k_z = 1;
            Ok(alloc::vec![cfg])
        }
        Stmt::Observe(b) => {
            let mut cfg = Configuration::initial(n);
            cfg.po.push(inject_bool(b));
            Ok(alloc::vec![cfg])
        }
        Stmt::Seq(a, b) => {
            let first = bigstep_stmt(a, n)?;
            let second = bigstep_stmt(b, n)?;
            let mut out = Vec::with_capacity(first.len() * second.len());
            for ca in &first {
                for cb in &second {
                    out.push(compose(ca, cb));
                }
            }
            Ok(out)
        }
        Stmt::If(c, t, e) => {
            let guarded = |cond: BoolExpr, branch: &Stmt| -> Result<Vec<Configuration>, EngineError> {
                let mut head = Configuration::initial(n);
                head.pc.push(inject_bool(&cond));
                Ok(bigstep_stmt(branch, n)?
                    .iter()
                    .map(|cfg| compose(&head, cfg))
                    .collect())
            };
            let mut out = guarded(c.clone(), t)?;
            out.extend(guarded(c.negate(), e)?);
            Ok(out)
        }
        Stmt::While(..) => Err(EngineError::UnsupportedLoop),
        Stmt::SampleBern(..) | Stmt::SampleNorm(..) => Err(EngineError::Sugar),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{explore, ExploreParams, PathStatus};
    use super::*;
    use crate::interp::SymBool;
    use crate::syntax::{parse_program, RelOp};
    use alloc::vec;

    #[test]
    fn skip_gives_the_unaltered_initial_configuration() {
        let p = parse_program("skip").unwrap();
        assert_eq!(bigstep(&p).unwrap(), vec![Configuration::initial(0)]);
    }

    #[test]
    fn observe_only_updates_the_path_observation() {
        let p = parse_program("observe (x < 1)").unwrap();
        let out = bigstep(&p).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].sub, Substitution::identity(1));
        assert!(out[0].pc.is_empty());
        assert_eq!(
            out[0].po,
            vec![SymBool::cmp(RelOp::Lt, SymExpr::var(0), SymExpr::int(1))]
        );
    }

    #[test]
    fn loops_are_rejected() {
        let p = parse_program("while (x < 1) {x := x + 1}").unwrap();
        assert_eq!(bigstep(&p).unwrap_err(), EngineError::UnsupportedLoop);
    }

    #[test]
    fn matches_exploration_on_the_gender_height_program() {
        let p = parse_program(
            "gender ~ bern(0.51); \
             if (gender = 1) {height ~ norm(175, 72)} else {height ~ norm(161, 50)}; \
             observe (height >= 200)",
        )
        .unwrap();
        let big = bigstep(&p).unwrap();
        let small = explore(&p, &ExploreParams::default()).unwrap();
        assert_eq!(big.len(), 4);
        assert_eq!(small.len(), 4);
        for (b, s) in big.iter().zip(&small) {
            assert_eq!(s.status, PathStatus::Final);
            assert_eq!(b, &s.cfg);
        }
    }

    #[test]
    fn composition_shifts_the_second_stage_into_the_first_frame() {
        // Stage 1: x ~ rnd (uses y0). Stage 2: y ~ rnd; observe(x < y)
        // renders as y1 after composition, and stage 2's read of x becomes
        // stage 1's term.
        let p1 = parse_program("x ~ rnd; y := 0").unwrap();
        let p2 = parse_program("x := x; y ~ rnd; observe (x < y)").unwrap();
        let c1 = &bigstep(&p1).unwrap()[0];
        let c2 = &bigstep(&p2).unwrap()[0];
        let c = compose(c1, c2);
        assert_eq!((c.k_y, c.k_z), (2, 0));
        assert_eq!(c.sub.term(VarId(0)), &SymExpr::uni(0));
        assert_eq!(c.sub.term(VarId(1)), &SymExpr::uni(1));
        assert_eq!(
            c.po,
            vec![SymBool::cmp(RelOp::Lt, SymExpr::uni(0), SymExpr::uni(1))]
        );
        assert!(c.index_discipline_ok());
    }
}
