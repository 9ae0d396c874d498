//! Exact enumeration of discrete (Bernoulli-only) programs.
//!
//! For loop-free programs whose only randomness is `bern`, the final state
//! is a finite distribution over rational variable vectors. This module
//! computes it by direct weighted enumeration, entirely in the rationals,
//! with no symbolic execution involved. It exists to be an independent
//! check on the path-quantification pipeline, so it deliberately shares
//! nothing with it beyond the syntax tree.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::interp::rational_sqrt;
use crate::rat::{rat_int, Rat};
use crate::syntax::{BoolExpr, Expr, Program, Stmt};

/// Why a program falls outside the discrete fragment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NotDiscrete {
    Loop,
    ContinuousSample,
    /// A square root that is not a perfect rational square (or has a
    /// negative argument) appeared during evaluation.
    IrrationalValue,
}

impl core::fmt::Display for NotDiscrete {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NotDiscrete::Loop => f.write_str("program contains a loop"),
            NotDiscrete::ContinuousSample => {
                f.write_str("program draws from a continuous distribution")
            }
            NotDiscrete::IrrationalValue => {
                f.write_str("evaluation left the rationals (square root)")
            }
        }
    }
}

impl core::error::Error for NotDiscrete {}

/// Final distribution of a discrete program: probability per terminal
/// variable vector, plus the mass removed by failed observations.
#[derive(Clone, PartialEq, Debug)]
pub struct DiscreteDist {
    pub support: BTreeMap<Vec<Rat>, Rat>,
    pub discarded: Rat,
}

impl DiscreteDist {
    /// Exact probability of an event over the final state. Atoms that do
    /// not evaluate (an irrational square root in the query) count as
    /// false.
    pub fn event_mass(&self, event: &BoolExpr) -> Rat {
        let mut total = Rat::zero();
        for (vals, w) in &self.support {
            if eval_bool(event, vals) == Some(true) {
                total += w;
            }
        }
        total
    }

    /// The mass that survived all observations.
    pub fn kept(&self) -> Rat {
        self.support.values().sum()
    }
}

fn eval_expr(e: &Expr, vals: &[Rat]) -> Option<Rat> {
    match e {
        Expr::Const(c) => Some(c.clone()),
        Expr::Var(x) => Some(vals[x.0 as usize].clone()),
        Expr::Bin(op, l, r) => Some(op.apply_rat(&eval_expr(l, vals)?, &eval_expr(r, vals)?)),
        Expr::Neg(e) => Some(-eval_expr(e, vals)?),
        Expr::Sqrt(e) => rational_sqrt(&eval_expr(e, vals)?),
    }
}

fn eval_bool(b: &BoolExpr, vals: &[Rat]) -> Option<bool> {
    match b {
        BoolExpr::Const(v) => Some(*v),
        BoolExpr::Cmp(rel, l, r) => Some(rel.holds_rat(&eval_expr(l, vals)?, &eval_expr(r, vals)?)),
        BoolExpr::And(l, r) => Some(eval_bool(l, vals)? && eval_bool(r, vals)?),
        BoolExpr::Or(l, r) => Some(eval_bool(l, vals)? || eval_bool(r, vals)?),
        BoolExpr::Not(b) => Some(!eval_bool(b, vals)?),
    }
}

fn scan(s: &Stmt) -> Result<(), NotDiscrete> {
    match s {
        Stmt::Skip | Stmt::Assign(..) | Stmt::Observe(_) | Stmt::SampleBern(..) => Ok(()),
        Stmt::SampleUniform(_) | Stmt::SampleStdNormal(_) | Stmt::SampleNorm(..) => {
            Err(NotDiscrete::ContinuousSample)
        }
        Stmt::Seq(a, b) => {
            scan(a)?;
            scan(b)
        }
        Stmt::If(_, t, e) => {
            scan(t)?;
            scan(e)
        }
        Stmt::While(..) => Err(NotDiscrete::Loop),
    }
}

type States = Vec<(Vec<Rat>, Rat)>;

fn exec(s: &Stmt, states: States, discarded: &mut Rat) -> Result<States, NotDiscrete> {
    match s {
        Stmt::Skip => Ok(states),
        Stmt::Assign(x, e) => {
            let mut out = states;
            for (vals, _) in &mut out {
                vals[x.0 as usize] = eval_expr(e, vals).ok_or(NotDiscrete::IrrationalValue)?;
            }
            Ok(out)
        }
        Stmt::SampleBern(x, t) => {
            let one = Rat::one();
            let zero = Rat::zero();
            let mut out = Vec::with_capacity(2 * states.len());
            for (vals, w) in states {
                let t = eval_expr(t, &vals).ok_or(NotDiscrete::IrrationalValue)?;
                // The desugared guard is "fresh uniform < t", so the success
                // probability is t clamped to the unit interval.
                let p = if t < zero {
                    zero.clone()
                } else if t > one {
                    one.clone()
                } else {
                    t
                };
                if !p.is_zero() {
                    let mut hit = vals.clone();
                    hit[x.0 as usize] = one.clone();
                    out.push((hit, &w * &p));
                }
                let q = &one - &p;
                if !q.is_zero() {
                    let mut miss = vals;
                    miss[x.0 as usize] = zero.clone();
                    out.push((miss, w * q));
                }
            }
            Ok(out)
        }
        Stmt::Observe(b) => {
            let mut out = Vec::with_capacity(states.len());
            for (vals, w) in states {
                match eval_bool(b, &vals).ok_or(NotDiscrete::IrrationalValue)? {
                    true => out.push((vals, w)),
                    false => *discarded += w,
                }
            }
            Ok(out)
        }
        Stmt::Seq(a, b) => {
            let mid = exec(a, states, discarded)?;
            exec(b, mid, discarded)
        }
        Stmt::If(c, t, e) => {
            let mut then_states = Vec::new();
            let mut else_states = Vec::new();
            for (vals, w) in states {
                match eval_bool(c, &vals).ok_or(NotDiscrete::IrrationalValue)? {
                    true => then_states.push((vals, w)),
                    false => else_states.push((vals, w)),
                }
            }
            let mut out = exec(t, then_states, discarded)?;
            out.extend(exec(e, else_states, discarded)?);
            Ok(out)
        }
        Stmt::SampleUniform(_) | Stmt::SampleStdNormal(_) | Stmt::SampleNorm(..) | Stmt::While(..) => {
            unreachable!("rejected by the fragment scan")
        }
    }
}

/// Enumerate the final distribution of a discrete program. Variables start
/// at zero, the default input. Support mass plus discarded mass is exactly
/// one.
pub fn enumerate_discrete(p: &Program) -> Result<DiscreteDist, NotDiscrete> {
    scan(&p.body)?;
    let init = vec![(vec![rat_int(0); p.n() as usize], Rat::one())];
    let mut discarded = Rat::zero();
    let states = exec(&p.body, init, &mut discarded)?;
    let mut support: BTreeMap<Vec<Rat>, Rat> = BTreeMap::new();
    for (vals, w) in states {
        *support.entry(vals).or_insert_with(Rat::zero) += w;
    }
    support.retain(|_, w| !w.is_zero());
    Ok(DiscreteDist { support, discarded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use crate::syntax::{parse_program, parse_query};

    #[test]
    fn two_coins_with_not_both_heads() {
        let p = parse_program(
            "x ~ bern(0.5); y ~ bern(0.5); observe (!(x = 1 && y = 1))",
        )
        .unwrap();
        let d = enumerate_discrete(&p).unwrap();
        assert_eq!(d.support.len(), 3);
        assert_eq!(d.discarded, rat(1, 4));
        assert_eq!(d.kept(), rat(3, 4));
        let first_heads = parse_query("x = 1", &p).unwrap();
        assert_eq!(d.event_mass(&first_heads), rat(1, 4));
        // Posterior of "first is heads" given not both heads: 1/3.
        assert_eq!(d.event_mass(&first_heads) / d.kept(), rat(1, 3));
    }

    #[test]
    fn thresholds_clamp_to_the_unit_interval() {
        let p = parse_program("a ~ bern(1.5); b ~ bern(0 - 0.2)").unwrap();
        let d = enumerate_discrete(&p).unwrap();
        assert_eq!(d.support.len(), 1);
        assert_eq!(d.support[&vec![rat_int(1), rat_int(0)]], rat_int(1));
    }

    #[test]
    fn thresholds_may_depend_on_earlier_draws() {
        let p = parse_program("x ~ bern(0.5); y ~ bern(x)").unwrap();
        let d = enumerate_discrete(&p).unwrap();
        // y copies x: only (0,0) and (1,1) survive, each 1/2.
        assert_eq!(d.support.len(), 2);
        assert_eq!(d.support[&vec![rat_int(0), rat_int(0)]], rat(1, 2));
        assert_eq!(d.support[&vec![rat_int(1), rat_int(1)]], rat(1, 2));
    }

    #[test]
    fn fragment_violations_are_named() {
        let l = parse_program("while (true) {skip}").unwrap();
        assert_eq!(enumerate_discrete(&l), Err(NotDiscrete::Loop));
        let c = parse_program("x ~ rnd").unwrap();
        assert_eq!(enumerate_discrete(&c), Err(NotDiscrete::ContinuousSample));
        let n = parse_program("x ~ norm(0, 1)").unwrap();
        assert_eq!(enumerate_discrete(&n), Err(NotDiscrete::ContinuousSample));
        let s = parse_program("x := sqrt(2)").unwrap();
        assert_eq!(enumerate_discrete(&s), Err(NotDiscrete::IrrationalValue));
    }

    #[test]
    fn mass_is_conserved_exactly() {
        let p = parse_program(
            "a ~ bern(0.3); b ~ bern(0.7); c := a + b; \
             if (c = 1) {d ~ bern(0.25)} else {skip}; observe (d < 1)",
        )
        .unwrap();
        let d = enumerate_discrete(&p).unwrap();
        assert_eq!(d.kept() + &d.discarded, rat_int(1));
    }
}
