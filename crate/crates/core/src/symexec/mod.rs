//! The symbolic transition system and bounded path exploration.
//!
//! A symbolic state carries the residual program and a configuration: the
//! substitution accumulated so far, the two sampling indices, the path
//! condition, and the path observation. Stepping a state applies exactly
//! one transition rule; exploration drives this to completion depth-first,
//! true branch first, with a per-loop unroll budget. [`bigstep`] computes
//! the same final configurations compositionally for loop-free programs and
//! serves as an independent oracle for the exploration.

mod bigstep;

pub use bigstep::{bigstep, compose};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::interp::{Substitution, SymBool, SymExpr};
use crate::syntax::{desugar, LoopId, Program, Stmt};

/// Engine failure.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EngineError {
    /// [`step`] applied to a final state.
    FinalState,
    /// A sugar node reached the engine; desugar the program first.
    Sugar,
    /// Exploration exceeded the path cap.
    Budget { max_paths: usize },
    /// [`bigstep`] applied to a program with a loop.
    UnsupportedLoop,
}

impl core::fmt::Display for EngineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EngineError::FinalState => f.write_str("step applied to a final state"),
            EngineError::Sugar => f.write_str("program contains sugar nodes; desugar first"),
            EngineError::Budget { max_paths } => {
                write!(f, "exploration exceeded the cap of {max_paths} paths")
            }
            EngineError::UnsupportedLoop => {
                f.write_str("big-step enumeration requires a loop-free program")
            }
        }
    }
}

impl core::error::Error for EngineError {}

/// The symbolic analogue of a machine state: substitution, sampling
/// indices, path condition, path observation. `pc` and `po` are conjunction
/// lists (empty list = true), one entry per rule application.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Configuration {
    pub sub: Substitution,
    pub k_y: u32,
    pub k_z: u32,
    pub pc: Vec<SymBool>,
    pub po: Vec<SymBool>,
}

impl Configuration {
    /// The initial configuration on `n` variables: identity substitution,
    /// zero samples, empty conditions.
    pub fn initial(n: usize) -> Configuration {
        Configuration {
            sub: Substitution::identity(n),
            k_y: 0,
            k_z: 0,
            pc: Vec::new(),
            po: Vec::new(),
        }
    }

    /// Every sample index mentioned anywhere must be below the
    /// corresponding sampling index.
    pub fn index_discipline_ok(&self) -> bool {
        let mut b = (0, 0);
        for term in self.sub.terms() {
            let tb = term.sample_bounds();
            b.0 = b.0.max(tb.0);
            b.1 = b.1.max(tb.1);
        }
        for atom in self.pc.iter().chain(self.po.iter()) {
            let ab = atom.sample_bounds();
            b.0 = b.0.max(ab.0);
            b.1 = b.1.max(ab.1);
        }
        b.0 <= self.k_y && b.1 <= self.k_z
    }
}

/// A node of the symbolic execution tree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymState {
    /// Residual program; `Skip` iff the state is final.
    pub prog: Stmt,
    pub cfg: Configuration,
    /// Branch decisions taken so far; `true` is the true branch.
    pub choices: Vec<bool>,
    /// Times each loop has fired its true branch on this path.
    iter_counts: BTreeMap<LoopId, u32>,
}

impl SymState {
    pub fn initial(prog: Stmt, n: usize) -> SymState {
        SymState::from_configuration(prog, Configuration::initial(n))
    }

    pub fn from_configuration(prog: Stmt, cfg: Configuration) -> SymState {
        SymState {
            prog,
            cfg,
            choices: Vec::new(),
            iter_counts: BTreeMap::new(),
        }
    }

    pub fn is_final(&self) -> bool {
        matches!(self.prog, Stmt::Skip)
    }
}

/// How a path ended.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PathStatus {
    /// The residual program reached `Skip`.
    Final,
    /// The unroll budget cut the path at a loop whose true branch would
    /// have fired again; the configuration describes the abandoned subtree
    /// (its guard is already in `pc`), so its mass bounds the truncation.
    UnrollExhausted,
}

/// Solver verdict on a path, filled in after exploration. `Unknown` is the
/// state before checking and whenever the solver cannot decide; it is
/// treated as feasible downstream so no mass is ever dropped.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Feasibility {
    Feasible,
    /// Path condition unsatisfiable: the path cannot execute at all.
    InfeasiblePc,
    /// Path condition satisfiable but condition plus observation is not:
    /// the path always fails an observe, so it carries zero likelihood.
    Discarded,
    Unknown,
}

/// One explored path.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PathOutcome {
    pub cfg: Configuration,
    pub status: PathStatus,
    pub choices: Vec<bool>,
    pub feasibility: Feasibility,
}

/// Apply one transition rule. `If` yields its two branch successors;
/// `While` yields up to two, with a successor suppressed when the applied
/// guard constant-folds (a loop that provably keeps running produces no
/// exit path, and one that provably stopped produces no iteration). `If`
/// successors are never suppressed: provably dead branches stay visible as
/// infeasible paths. Successor order is true branch first.
pub fn step(s: &SymState) -> Result<Vec<SymState>, EngineError> {
    match &s.prog {
        Stmt::Skip => Err(EngineError::FinalState),
        Stmt::SampleBern(..) | Stmt::SampleNorm(..) => Err(EngineError::Sugar),
        Stmt::Assign(x, e) => {
            let mut succ = s.clone();
            succ.prog = Stmt::Skip;
            let term = s.cfg.sub.apply_expr(e);
            succ.cfg.sub.set(*x, term);
            Ok(alloc::vec![succ])
        }
        Stmt::SampleUniform(x) => {
            let mut succ = s.clone();
            succ.prog = Stmt::Skip;
            succ.cfg.sub.set(*x, SymExpr::uni(s.cfg.k_y));
            succ.cfg.k_y += 1;
            Ok(alloc::vec![succ])
        }
        Stmt::SampleStdNormal(x) => {
            let mut succ = s.clone();
            succ.prog = Stmt::Skip;
            succ.cfg.sub.set(*x, SymExpr::nrm(s.cfg.k_z));
            succ.cfg.k_z += 1;
            Ok(alloc::vec![succ])
        }
        Stmt::Observe(b) => {
            let mut succ = s.clone();
            succ.prog = Stmt::Skip;
            let atom = s.cfg.sub.apply_bool(b);
            succ.cfg.po.push(atom);
            Ok(alloc::vec![succ])
        }
        Stmt::Seq(a, b) => {
            if matches!(**a, Stmt::Skip) {
                let mut succ = s.clone();
                succ.prog = (**b).clone();
                return Ok(alloc::vec![succ]);
            }
            let mut head = s.clone();
            head.prog = (**a).clone();
            let mut succs = step(&head)?;
            for succ in &mut succs {
                let rest = core::mem::replace(&mut succ.prog, Stmt::Skip);
                succ.prog = Stmt::seq(rest, (**b).clone());
            }
            Ok(succs)
        }
        Stmt::If(c, t, e) => {
            let mut on_true = s.clone();
            on_true.prog = (**t).clone();
            on_true.cfg.pc.push(s.cfg.sub.apply_bool(c));
            on_true.choices.push(true);
            let mut on_false = s.clone();
            on_false.prog = (**e).clone();
            on_false.cfg.pc.push(s.cfg.sub.apply_bool(&c.negate()));
            on_false.choices.push(false);
            Ok(alloc::vec![on_true, on_false])
        }
        Stmt::While(id, c, body) => {
            let guard = s.cfg.sub.apply_bool(c);
            let folded = guard.const_truth();
            let mut succs = Vec::with_capacity(2);
            if folded != Some(false) {
                let mut on_true = s.clone();
                on_true.prog = Stmt::seq((**body).clone(), s.prog.clone());
                on_true.cfg.pc.push(guard.clone());
                on_true.choices.push(true);
                *on_true.iter_counts.entry(*id).or_insert(0) += 1;
                succs.push(on_true);
            }
            if folded != Some(true) {
                let mut on_false = s.clone();
                on_false.prog = Stmt::Skip;
                on_false.cfg.pc.push(s.cfg.sub.apply_bool(&c.negate()));
                on_false.choices.push(false);
                succs.push(on_false);
            }
            Ok(succs)
        }
    }
}

/// Exploration limits.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ExploreParams {
    /// Times each loop may fire its true branch along one path.
    pub unroll: u32,
    /// Cap on the number of returned paths.
    pub max_paths: usize,
}

impl Default for ExploreParams {
    fn default() -> ExploreParams {
        ExploreParams {
            unroll: 4,
            max_paths: 1 << 16,
        }
    }
}

/// Enumerate all paths of a program: desugars, then explores depth-first
/// from the initial configuration, true branch first, so outcomes are in
/// lexicographic order of their choice strings (true < false). All
/// feasibility fields are [`Feasibility::Unknown`]; checking them is the
/// solver's job.
pub fn explore(p: &Program, params: &ExploreParams) -> Result<Vec<PathOutcome>, EngineError> {
    let core = desugar(p);
    let n = core.n();
    explore_from(SymState::initial(core.body, n), params)
}

/// Exploration from an arbitrary state, typically a mid-execution state of
/// some program (the residual program with its current configuration).
pub fn explore_from(
    start: SymState,
    params: &ExploreParams,
) -> Result<Vec<PathOutcome>, EngineError> {
    let mut out = Vec::new();
    // Depth-first worklist; successors are pushed in reverse so the true
    // branch is processed first.
    let mut stack = alloc::vec![start];
    while let Some(state) = stack.pop() {
        if state.is_final() {
            push_outcome(
                &mut out,
                PathOutcome {
                    cfg: state.cfg,
                    status: PathStatus::Final,
                    choices: state.choices,
                    feasibility: Feasibility::Unknown,
                },
                params,
            )?;
            continue;
        }
        let succs = step(&state)?;
        for succ in succs.into_iter().rev() {
            if succ.iter_counts.values().any(|&c| c > params.unroll) {
                // The budget forbids this iteration; record the abandoned
                // subtree instead of entering it. Its pc already includes
                // the guard, so its mass bounds what the cut discarded.
                push_outcome(
                    &mut out,
                    PathOutcome {
                        cfg: succ.cfg,
                        status: PathStatus::UnrollExhausted,
                        choices: succ.choices,
                        feasibility: Feasibility::Unknown,
                    },
                    params,
                )?;
            } else {
                stack.push(succ);
            }
        }
    }
    Ok(out)
}

fn push_outcome(
    out: &mut Vec<PathOutcome>,
    outcome: PathOutcome,
    params: &ExploreParams,
) -> Result<(), EngineError> {
    if out.len() >= params.max_paths {
        return Err(EngineError::Budget {
            max_paths: params.max_paths,
        });
    }
    out.push(outcome);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::Dist;
    use crate::rat::rat;
    use crate::syntax::{parse_program, BoolExpr, Expr, RelOp, VarId};
    use alloc::vec;

    fn explore_src(src: &str, params: &ExploreParams) -> Vec<PathOutcome> {
        explore(&parse_program(src).unwrap(), params).unwrap()
    }

    #[test]
    fn sampling_rule_allocates_the_next_sample_variable() {
        let s = SymState::initial(Stmt::SampleUniform(VarId(0)), 1);
        let succs = step(&s).unwrap();
        assert_eq!(succs.len(), 1);
        let succ = &succs[0];
        assert!(succ.is_final());
        assert_eq!(succ.cfg.sub.term(VarId(0)), &SymExpr::uni(0));
        assert_eq!((succ.cfg.k_y, succ.cfg.k_z), (1, 0));
        assert!(succ.cfg.pc.is_empty() && succ.cfg.po.is_empty());
    }

    #[test]
    fn observe_rule_extends_the_path_observation_only() {
        let b = BoolExpr::cmp(RelOp::Lt, Expr::var(0), Expr::int(1));
        let s = SymState::initial(Stmt::Observe(b), 1);
        let succs = step(&s).unwrap();
        assert_eq!(succs.len(), 1);
        assert_eq!(
            succs[0].cfg.po,
            vec![SymBool::cmp(RelOp::Lt, SymExpr::var(0), SymExpr::int(1))]
        );
        assert!(succs[0].cfg.pc.is_empty());
    }

    #[test]
    fn stepping_a_final_state_is_an_error() {
        let s = SymState::initial(Stmt::Skip, 0);
        assert_eq!(step(&s), Err(EngineError::FinalState));
    }

    #[test]
    fn skip_program_yields_the_initial_configuration() {
        let out = explore_src("skip", &ExploreParams::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].cfg, Configuration::initial(0));
        assert_eq!(out[0].status, PathStatus::Final);
        assert!(out[0].choices.is_empty());
    }

    /// The four traces of the gender/height program, in exploration order.
    fn expected_gender_height() -> Vec<(Vec<bool>, Configuration)> {
        let p51 = SymExpr::Const(rat(51, 100));
        let height = |variance: i64, mean: i64| {
            SymExpr::add(
                SymExpr::mul(SymExpr::nrm(0), SymExpr::sqrt(SymExpr::int(variance))),
                SymExpr::int(mean),
            )
        };
        let tall = |variance: i64, mean: i64| {
            SymBool::cmp(RelOp::Ge, height(variance, mean), SymExpr::int(200))
        };
        let cfg = |g: i64, variance: i64, mean: i64, pc: Vec<SymBool>| {
            let mut sub = Substitution::identity(2);
            sub.set(VarId(0), SymExpr::int(g));
            sub.set(VarId(1), height(variance, mean));
            Configuration {
                sub,
                k_y: 1,
                k_z: 1,
                pc,
                po: vec![tall(variance, mean)],
            }
        };
        let under = |rel: RelOp| SymBool::cmp(rel, SymExpr::uni(0), p51.clone());
        let gate = |rel: RelOp, g: i64| SymBool::cmp(rel, SymExpr::int(g), SymExpr::int(1));
        vec![
            (
                vec![true, true],
                cfg(1, 72, 175, vec![under(RelOp::Lt), gate(RelOp::Eq, 1)]),
            ),
            (
                vec![true, false],
                cfg(1, 50, 161, vec![under(RelOp::Lt), gate(RelOp::Ne, 1)]),
            ),
            (
                vec![false, true],
                cfg(0, 72, 175, vec![under(RelOp::Ge), gate(RelOp::Eq, 0)]),
            ),
            (
                vec![false, false],
                cfg(0, 50, 161, vec![under(RelOp::Ge), gate(RelOp::Ne, 0)]),
            ),
        ]
    }

    #[test]
    fn gender_height_produces_the_four_documented_traces() {
        let src = "gender ~ bern(0.51); \
                   if (gender = 1) {height ~ norm(175, 72)} else {height ~ norm(161, 50)}; \
                   observe (height >= 200)";
        let out = explore_src(src, &ExploreParams::default());
        assert_eq!(out.len(), 4);
        for (outcome, (choices, cfg)) in out.iter().zip(expected_gender_height()) {
            assert_eq!(outcome.status, PathStatus::Final);
            assert_eq!(outcome.choices, choices);
            assert_eq!(outcome.cfg, cfg);
            assert!(outcome.cfg.index_discipline_ok());
        }
    }

    #[test]
    fn constant_true_loop_exhausts_the_budget_without_an_exit_path() {
        let out = explore_src(
            "while (true) {skip}",
            &ExploreParams {
                unroll: 3,
                max_paths: 100,
            },
        );
        assert_eq!(out.len(), 1);
        let stub = &out[0];
        assert_eq!(stub.status, PathStatus::UnrollExhausted);
        // Three iterations plus the refused fourth, each guard in pc.
        assert_eq!(stub.choices, vec![true, true, true, true]);
        assert_eq!(stub.cfg.pc, vec![SymBool::Const(true); 4]);
    }

    #[test]
    fn constant_false_loop_exits_without_an_iteration_path() {
        let out = explore_src("while (false) {skip}", &ExploreParams::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].status, PathStatus::Final);
        assert_eq!(out[0].choices, vec![false]);
        assert_eq!(out[0].cfg.pc, vec![SymBool::Const(true)]);
    }

    #[test]
    fn counting_loop_folds_to_a_single_path() {
        let out = explore_src(
            "i := 3; while (0 < i) {i := i - 1}",
            &ExploreParams::default(),
        );
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].status, PathStatus::Final);
        assert_eq!(out[0].choices, vec![true, true, true, false]);
        // The final substitution still carries the unfolded arithmetic.
        let i = out[0].cfg.sub.term(VarId(0));
        assert_eq!(i.const_value(), Some(rat(0, 1)));
    }

    #[test]
    fn symbolic_loop_guards_keep_both_successors() {
        let out = explore_src(
            "x ~ rnd; while (x < 0.5) {x := x + 0.5}",
            &ExploreParams {
                unroll: 2,
                max_paths: 100,
            },
        );
        // Paths: exit immediately; one iteration then exit; two iterations
        // then exit; two iterations then budget stub.
        let statuses: Vec<_> = out.iter().map(|o| o.status).collect();
        assert_eq!(
            statuses,
            vec![
                PathStatus::UnrollExhausted,
                PathStatus::Final,
                PathStatus::Final,
                PathStatus::Final
            ]
        );
        let choices: Vec<_> = out.iter().map(|o| o.choices.clone()).collect();
        assert_eq!(
            choices,
            vec![
                vec![true, true, true],
                vec![true, true, false],
                vec![true, false],
                vec![false]
            ]
        );
        for o in &out {
            assert!(o.cfg.index_discipline_ok());
        }
    }

    #[test]
    fn if_branches_survive_even_when_provably_dead() {
        // Both branch conditions fold to constants, yet both paths appear.
        let out = explore_src("x := 1; if (x = 1) {x := 2} else {x := 3}", &ExploreParams::default());
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].cfg.pc[0].const_truth(), Some(true));
        assert_eq!(out[1].cfg.pc[0].const_truth(), Some(false));
    }

    #[test]
    fn path_cap_is_enforced() {
        let src = "a ~ bern(0.5); b ~ bern(0.5); c ~ bern(0.5); d ~ bern(0.5)";
        let err = explore(
            &parse_program(src).unwrap(),
            &ExploreParams {
                unroll: 4,
                max_paths: 8,
            },
        )
        .unwrap_err();
        assert_eq!(err, EngineError::Budget { max_paths: 8 });
    }

    #[test]
    fn exploration_desugars_internally() {
        let out = explore_src("x ~ bern(0.5)", &ExploreParams::default());
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].cfg.sub.term(VarId(0)), &SymExpr::int(1));
        assert_eq!(out[1].cfg.sub.term(VarId(0)), &SymExpr::int(0));
        assert_eq!(out[0].cfg.k_y, 1);
        assert_eq!(
            out[0].cfg.pc,
            vec![SymBool::cmp(
                RelOp::Lt,
                SymExpr::Sample(Dist::Uniform, 0),
                SymExpr::Const(rat(1, 2))
            )]
        );
    }
}
