//! Seeded random program generators for the test suites.
//!
//! Each generator targets one class of programs a test batch needs:
//! arbitrary loop-free programs for the semantic correspondence batches,
//! Bernoulli-only programs whose exact distribution the discrete enumerator
//! can check, and observation-free programs built to stay inside the
//! rational closed-form lane so path masses must sum to exactly one.
//! Everything is driven by a counter-based generator, so a test failure
//! reproduces from its seed alone.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rat::{rat, Rat};
use crate::syntax::{BoolExpr, Expr, Program, RelOp, Stmt, VarId};

pub struct Gen {
    rng: ChaCha8Rng,
}

/// What a variable currently holds, tracked conservatively while building
/// programs that must stay in the separable rational lane.
#[derive(Clone, Copy, PartialEq)]
enum Kind {
    /// A rational constant along every path.
    Det,
    /// Directly holds one uniform draw nothing else has touched.
    Fresh,
    /// Some mixture involving randomness; usable in arithmetic but not as
    /// a guard subject.
    Tainted,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in `0..n`.
    fn pick(&mut self, n: u32) -> u32 {
        debug_assert!(n > 0);
        // Modulo bias is irrelevant for test-case generation.
        self.rng.next_u32() % n
    }

    fn chance(&mut self, permille: u32) -> bool {
        self.pick(1000) < permille
    }

    /// Small nonnegative rational with at most two decimal places, the
    /// kind of literal the concrete syntax can spell directly.
    fn rat_const(&mut self) -> Rat {
        let scale = 10i64.pow(self.pick(3));
        rat(i64::from(self.pick(3 * scale as u32 + 1)), scale)
    }

    fn rel(&mut self) -> RelOp {
        match self.pick(6) {
            0 => RelOp::Lt,
            1 => RelOp::Le,
            2 => RelOp::Gt,
            3 => RelOp::Ge,
            4 => RelOp::Eq,
            _ => RelOp::Ne,
        }
    }

    fn var(&mut self, n_vars: u32) -> u32 {
        self.pick(n_vars)
    }

    /// Random expression over `n_vars` variables. Square roots appear only
    /// when allowed; their arguments are unconstrained, so evaluation may
    /// legitimately hit domain errors.
    pub fn expr(&mut self, n_vars: u32, depth: u32, allow_sqrt: bool) -> Expr {
        if depth == 0 || self.chance(300) {
            return if n_vars > 0 && self.chance(550) {
                Expr::var(self.var(n_vars))
            } else {
                Expr::Const(self.rat_const())
            };
        }
        match self.pick(if allow_sqrt { 10 } else { 8 }) {
            0 | 1 | 2 => Expr::add(
                self.expr(n_vars, depth - 1, allow_sqrt),
                self.expr(n_vars, depth - 1, allow_sqrt),
            ),
            3 | 4 => Expr::sub(
                self.expr(n_vars, depth - 1, allow_sqrt),
                self.expr(n_vars, depth - 1, allow_sqrt),
            ),
            5 | 6 => Expr::mul(
                self.expr(n_vars, depth - 1, allow_sqrt),
                self.expr(n_vars, depth - 1, allow_sqrt),
            ),
            7 => Expr::neg(self.expr(n_vars, depth - 1, allow_sqrt)),
            _ => Expr::sqrt(self.expr(n_vars, depth - 1, allow_sqrt)),
        }
    }

    /// Random Boolean expression with comparisons over [`Gen::expr`].
    pub fn bool_expr(&mut self, n_vars: u32, depth: u32, allow_sqrt: bool) -> BoolExpr {
        if depth == 0 || self.chance(250) {
            return match self.pick(10) {
                0 => BoolExpr::Const(true),
                1 => BoolExpr::Const(false),
                _ => BoolExpr::cmp(
                    self.rel(),
                    self.expr(n_vars, 2, allow_sqrt),
                    self.expr(n_vars, 2, allow_sqrt),
                ),
            };
        }
        match self.pick(5) {
            0 | 1 => BoolExpr::and(
                self.bool_expr(n_vars, depth - 1, allow_sqrt),
                self.bool_expr(n_vars, depth - 1, allow_sqrt),
            ),
            2 | 3 => BoolExpr::or(
                self.bool_expr(n_vars, depth - 1, allow_sqrt),
                self.bool_expr(n_vars, depth - 1, allow_sqrt),
            ),
            _ => BoolExpr::not(self.bool_expr(n_vars, depth - 1, allow_sqrt)),
        }
    }

    fn var_names(n_vars: u32) -> Vec<String> {
        (0..n_vars).map(|i| format!("v{i}")).collect()
    }

    /// Arbitrary loop-free program: all statement forms except `while`,
    /// square roots included. Exercises the full semantic surface for the
    /// correspondence and composition batches.
    pub fn loopfree(&mut self, n_vars: u32, size: u32) -> Program {
        let body = self.loopfree_stmt(n_vars, size, true);
        Program::new(Self::var_names(n_vars), body)
    }

    /// Loop-free program in which every operation is total: no square roots
    /// and no `norm` sugar (whose desugaring takes the square root of the
    /// variance expression). Evaluation of any term of such a program is
    /// defined at every valuation, which the path-partition batch needs.
    pub fn loopfree_total(&mut self, n_vars: u32, size: u32) -> Program {
        let body = self.loopfree_stmt(n_vars, size, false);
        Program::new(Self::var_names(n_vars), body)
    }

    /// Program with one or two small `while` loops between loop-free
    /// sections: a deterministic countdown that finishes inside the default
    /// unroll budget, or a rejection loop that redraws a uniform until it
    /// clears a threshold (occasionally exhausting the budget, which is the
    /// point).
    pub fn with_loops(&mut self, n_vars: u32, size: u32) -> Program {
        let mut stmts = alloc::vec![self.loopfree_stmt(n_vars, size / 2, true)];
        for _ in 0..1 + self.pick(2) {
            stmts.push(self.small_loop(n_vars));
            stmts.push(self.loopfree_stmt(n_vars, 2, true));
        }
        let body = stmts
            .into_iter()
            .rev()
            .fold(Stmt::Skip, |acc, s| Stmt::seq(s, acc));
        Program::new(Self::var_names(n_vars), body)
    }

    fn small_loop(&mut self, n_vars: u32) -> Stmt {
        let x = VarId(self.var(n_vars));
        if self.chance(500) {
            let k = i64::from(self.pick(4));
            let body = Stmt::seq(
                self.loopfree_stmt(n_vars, 1, false),
                Stmt::Assign(x, Expr::sub(Expr::var(x.0), Expr::int(1))),
            );
            Stmt::seq(
                Stmt::Assign(x, Expr::int(k)),
                Stmt::while_loop(BoolExpr::cmp(RelOp::Gt, Expr::var(x.0), Expr::int(0)), body),
            )
        } else {
            let t = rat(i64::from(1 + self.pick(8)), 10);
            Stmt::seq(
                Stmt::SampleUniform(x),
                Stmt::while_loop(
                    BoolExpr::cmp(RelOp::Lt, Expr::var(x.0), Expr::Const(t)),
                    Stmt::SampleUniform(x),
                ),
            )
        }
    }

    fn loopfree_stmt(&mut self, n_vars: u32, size: u32, allow_sqrt: bool) -> Stmt {
        if size == 0 {
            return Stmt::Skip;
        }
        if size > 1 && self.chance(450) {
            let left = self.pick(size);
            return Stmt::seq(
                self.loopfree_stmt(n_vars, left, allow_sqrt),
                self.loopfree_stmt(n_vars, size - left, allow_sqrt),
            );
        }
        let x = VarId(self.var(n_vars));
        match self.pick(100) {
            0..=29 => Stmt::Assign(x, self.expr(n_vars, 3, allow_sqrt)),
            30..=41 => Stmt::SampleUniform(x),
            42..=53 => Stmt::SampleStdNormal(x),
            54..=63 => Stmt::SampleBern(x, self.expr(n_vars, 2, false)),
            64..=73 if allow_sqrt => Stmt::SampleNorm(
                x,
                self.expr(n_vars, 2, false),
                self.expr(n_vars, 2, false),
            ),
            64..=73 => Stmt::SampleStdNormal(x),
            74..=85 => Stmt::Observe(self.bool_expr(n_vars, 2, allow_sqrt)),
            _ => {
                let inner = size.saturating_sub(1).min(3);
                Stmt::if_else(
                    self.bool_expr(n_vars, 2, false),
                    self.loopfree_stmt(n_vars, inner, allow_sqrt),
                    self.loopfree_stmt(n_vars, inner, allow_sqrt),
                )
            }
        }
    }

    /// Loop-free Bernoulli-only program: at most `max_samples` coin flips
    /// with thresholds that stay affine in already-settled variables, at
    /// most `max_observes` observations, plus assignments and branching
    /// over the (per-path constant) variables. The discrete enumerator
    /// accepts everything this produces, and the closed-form lane stays
    /// exact on it.
    pub fn bern_program(&mut self, n_vars: u32, max_samples: u32, max_observes: u32) -> Program {
        let mut stmts = Vec::new();
        let mut samples = 0;
        let mut observes = 0;
        let len = 3 + self.pick(6);
        for _ in 0..len {
            let x = VarId(self.var(n_vars));
            match self.pick(10) {
                0..=3 if samples < max_samples => {
                    samples += 1;
                    // Threshold over earlier variables; keep it affine so
                    // the path constraint stays univariate in the fresh
                    // draw even when it mentions the target itself.
                    stmts.push(Stmt::SampleBern(x, self.affine_expr(n_vars)));
                }
                4 | 5 if observes < max_observes => {
                    observes += 1;
                    stmts.push(Stmt::Observe(self.bool_expr(n_vars, 2, false)));
                }
                6 | 7 => stmts.push(Stmt::Assign(x, self.expr(n_vars, 2, false))),
                _ => {
                    let t = Stmt::Assign(VarId(self.var(n_vars)), self.expr(n_vars, 1, false));
                    let e = if self.chance(500) {
                        Stmt::Skip
                    } else {
                        Stmt::Assign(VarId(self.var(n_vars)), self.expr(n_vars, 1, false))
                    };
                    stmts.push(Stmt::if_else(self.bool_expr(n_vars, 1, false), t, e));
                }
            }
        }
        let body = stmts
            .into_iter()
            .rev()
            .fold(Stmt::Skip, |acc, s| Stmt::seq(s, acc));
        Program::new(Self::var_names(n_vars), body)
    }

    /// Affine expression: sums and differences of variables scaled by
    /// constants. Multiplication only pairs a constant with a variable.
    fn affine_expr(&mut self, n_vars: u32) -> Expr {
        let mut e = if self.chance(700) {
            Expr::Const(self.rat_const())
        } else {
            Expr::var(self.var(n_vars))
        };
        for _ in 0..self.pick(3) {
            let term = if self.chance(500) {
                Expr::mul(Expr::Const(self.rat_const()), Expr::var(self.var(n_vars)))
            } else {
                Expr::Const(self.rat_const())
            };
            e = if self.chance(650) {
                Expr::add(e, term)
            } else {
                Expr::sub(e, term)
            };
        }
        e
    }

    /// Observation-free, loop-free program whose every path mass is a
    /// rational the closed-form lane computes exactly, so the masses of all
    /// paths must sum to exactly one: uniform draws and coin flips, affine
    /// rational arithmetic, and guards that compare one fresh draw (or a
    /// settled value) against constants.
    pub fn conservation_program(&mut self, n_vars: u32) -> Program {
        let mut kinds = alloc::vec![Kind::Det; n_vars as usize];
        let len = 4 + self.pick(5);
        // Every coin flip and branch doubles the path count; budget them so
        // a program stays at a few hundred paths.
        let mut branches = 8u32;
        let body = self.conservation_stmt(n_vars, &mut kinds, len, &mut branches);
        Program::new(Self::var_names(n_vars), body)
    }

    fn conservation_stmt(
        &mut self,
        n_vars: u32,
        kinds: &mut Vec<Kind>,
        len: u32,
        branches: &mut u32,
    ) -> Stmt {
        let mut stmts = Vec::new();
        for _ in 0..len {
            let xi = self.var(n_vars);
            let x = VarId(xi);
            match self.pick(10) {
                0..=2 => {
                    stmts.push(Stmt::SampleUniform(x));
                    kinds[xi as usize] = Kind::Fresh;
                }
                3 | 4 if *branches > 0 => {
                    *branches -= 1;
                    // Threshold from settled variables only, so the guard
                    // introduced by the flip stays univariate.
                    let t = self.det_affine(n_vars, kinds);
                    stmts.push(Stmt::SampleBern(x, t));
                    kinds[xi as usize] = Kind::Det;
                }
                5 | 6 => {
                    let e = self.affine_expr(n_vars);
                    stmts.push(Stmt::Assign(x, e));
                    kinds[xi as usize] = Kind::Tainted;
                }
                _ if *branches > 0 => {
                    *branches -= 1;
                    let guard = self.separable_guard(n_vars, kinds);
                    let mut then_kinds = kinds.clone();
                    let mut else_kinds = kinds.clone();
                    let (tl, el) = (self.pick(3), self.pick(3));
                    let t = self.conservation_stmt(n_vars, &mut then_kinds, tl, branches);
                    let e = self.conservation_stmt(n_vars, &mut else_kinds, el, branches);
                    stmts.push(Stmt::if_else(guard, t, e));
                    for i in 0..kinds.len() {
                        kinds[i] = if then_kinds[i] == else_kinds[i] {
                            then_kinds[i]
                        } else {
                            Kind::Tainted
                        };
                    }
                }
                _ => stmts.push(Stmt::Skip),
            }
        }
        stmts
            .into_iter()
            .rev()
            .fold(Stmt::Skip, |acc, s| Stmt::seq(s, acc))
    }

    /// Affine expression over variables currently holding constants.
    fn det_affine(&mut self, n_vars: u32, kinds: &[Kind]) -> Expr {
        let det: Vec<u32> = (0..n_vars).filter(|&i| kinds[i as usize] == Kind::Det).collect();
        let mut e = Expr::Const(self.rat_const());
        for _ in 0..self.pick(2) {
            if det.is_empty() {
                break;
            }
            let v = det[self.pick(det.len() as u32) as usize];
            e = Expr::add(e, Expr::mul(Expr::Const(self.rat_const()), Expr::var(v)));
        }
        e
    }

    /// Guard whose atoms each compare one fresh draw or settled value to a
    /// constant: exactly the shape the closed-form lane keeps rational.
    fn separable_guard(&mut self, n_vars: u32, kinds: &[Kind]) -> BoolExpr {
        let fresh: Vec<u32> = (0..n_vars)
            .filter(|&i| kinds[i as usize] == Kind::Fresh)
            .collect();
        let atom = |g: &mut Gen| {
            let rel = match g.pick(4) {
                0 => RelOp::Lt,
                1 => RelOp::Le,
                2 => RelOp::Gt,
                _ => RelOp::Ge,
            };
            if !fresh.is_empty() && g.chance(750) {
                let v = fresh[g.pick(fresh.len() as u32) as usize];
                BoolExpr::cmp(rel, Expr::var(v), Expr::Const(g.rat_const()))
            } else {
                let l = g.det_affine(n_vars, kinds);
                BoolExpr::cmp(rel, l, Expr::Const(g.rat_const()))
            }
        };
        match self.pick(10) {
            0 | 1 => BoolExpr::and(atom(self), atom(self)),
            2 | 3 => BoolExpr::or(atom(self), atom(self)),
            4 => BoolExpr::not(atom(self)),
            _ => atom(self),
        }
    }

    /// Event over the program's variables, for querying final states.
    pub fn query(&mut self, p: &Program) -> BoolExpr {
        self.bool_expr(p.n() as u32, 2, false)
    }

    /// Random input values for a concrete run, spread over a few orders of
    /// magnitude around zero.
    pub fn input_vars(&mut self, n_vars: u32) -> Vec<f64> {
        (0..n_vars)
            .map(|_| {
                let raw = crate::math::bits_to_unit(self.rng.next_u64()) * 2.0 - 1.0;
                let scale = [0.25, 1.0, 10.0][self.pick(3) as usize];
                raw * scale
            })
            .collect()
    }

    /// A fresh seed, for deriving valuations from the generator stream.
    pub fn seed(&mut self) -> u64 {
        self.rng.next_u64()
    }
}
