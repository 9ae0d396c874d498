//! Desugaring of parameterized distributions into primitive sampling.
//!
//! `x ~ bern(t)` becomes `x ~ rnd; if (x < t) {x := 1} else {x := 0}` and
//! `x ~ norm(m, v)` becomes `x ~ stdnorm; x := x * sqrt(v) + m`. Both
//! rewrites reuse the target variable as the scratch holding the primitive
//! sample, so a parameter expression that mentions the target reads the
//! freshly drawn sample; that is the defined meaning of the sugar.

use super::ast::{BoolExpr, Expr, Program, RelOp, Stmt};

/// Rewrite all sugar nodes; other nodes are recursed unchanged. Total and
/// idempotent, and it introduces no loops and no variables.
pub fn desugar(p: &Program) -> Program {
    Program {
        vars: p.vars.clone(),
        body: desugar_stmt(&p.body),
        loop_count: p.loop_count,
    }
}

fn desugar_stmt(s: &Stmt) -> Stmt {
    match s {
        Stmt::SampleBern(x, t) => Stmt::seq(
            Stmt::SampleUniform(*x),
            Stmt::if_else(
                BoolExpr::cmp(RelOp::Lt, Expr::Var(*x), t.clone()),
                Stmt::Assign(*x, Expr::int(1)),
                Stmt::Assign(*x, Expr::int(0)),
            ),
        ),
        Stmt::SampleNorm(x, mean, variance) => Stmt::seq(
            Stmt::SampleStdNormal(*x),
            Stmt::Assign(
                *x,
                Expr::add(
                    Expr::mul(Expr::Var(*x), Expr::sqrt(variance.clone())),
                    mean.clone(),
                ),
            ),
        ),
        Stmt::Seq(a, b) => Stmt::seq(desugar_stmt(a), desugar_stmt(b)),
        Stmt::If(cond, then, els) => {
            Stmt::if_else(cond.clone(), desugar_stmt(then), desugar_stmt(els))
        }
        Stmt::While(id, cond, body) => {
            Stmt::While(*id, cond.clone(), alloc::boxed::Box::new(desugar_stmt(body)))
        }
        Stmt::Skip
        | Stmt::Assign(..)
        | Stmt::SampleUniform(_)
        | Stmt::SampleStdNormal(_)
        | Stmt::Observe(_) => s.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_program;
    use super::*;
    use crate::rat::rat;
    use crate::syntax::ast::VarId;

    #[test]
    fn bern_becomes_uniform_plus_threshold_branch() {
        let p = parse_program("x ~ bern(0.51)").unwrap();
        let d = desugar(&p);
        assert_eq!(
            d.body,
            Stmt::seq(
                Stmt::SampleUniform(VarId(0)),
                Stmt::if_else(
                    BoolExpr::cmp(RelOp::Lt, Expr::var(0), Expr::Const(rat(51, 100))),
                    Stmt::Assign(VarId(0), Expr::int(1)),
                    Stmt::Assign(VarId(0), Expr::int(0)),
                )
            )
        );
    }

    #[test]
    fn norm_becomes_scaled_translated_stdnormal() {
        let p = parse_program("h ~ norm(175, 72)").unwrap();
        let d = desugar(&p);
        assert_eq!(
            d.body,
            Stmt::seq(
                Stmt::SampleStdNormal(VarId(0)),
                Stmt::Assign(
                    VarId(0),
                    Expr::add(
                        Expr::mul(Expr::var(0), Expr::sqrt(Expr::int(72))),
                        Expr::int(175)
                    )
                )
            )
        );
    }

    #[test]
    fn skip_is_a_fixpoint() {
        let p = parse_program("skip").unwrap();
        assert_eq!(desugar(&p), p);
    }

    #[test]
    fn idempotent_and_variable_preserving() {
        let p = parse_program(
            "g ~ bern(0.51); if (g = 1) {h ~ norm(175, 72)} else {h ~ norm(161, 50)}; \
             while (h < 0) {h ~ norm(h, 1)}; observe (h >= 200)",
        )
        .unwrap();
        let once = desugar(&p);
        assert!(!once.body.has_sugar());
        assert_eq!(desugar(&once), once);
        assert_eq!(once.vars, p.vars);
        assert_eq!(once.loop_count, p.loop_count);
    }

    #[test]
    fn bern_count_bounds_branch_count() {
        // One extra If per bern node and nothing else that branches.
        let p = parse_program("a ~ bern(0.5); b ~ bern(0.25); c := a + b").unwrap();
        let d = desugar(&p);
        fn count_ifs(s: &Stmt) -> u32 {
            match s {
                Stmt::Seq(a, b) => count_ifs(a) + count_ifs(b),
                Stmt::If(_, t, e) => 1 + count_ifs(t) + count_ifs(e),
                Stmt::While(_, _, body) => count_ifs(body),
                _ => 0,
            }
        }
        assert_eq!(count_ifs(&d.body), 2);
    }
}
