//! Abstract syntax trees for the probabilistic language.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::rat::{rat_int, Rat};

/// Index of a program variable; dense in `0..n` within one [`Program`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

/// Identity of a `while` loop, unique within one [`Program`].
///
/// Unfolding an iteration clones the loop node into the continuation, so
/// per-loop bookkeeping (unroll budgets) must key on an identity that
/// travels with the node rather than on its position in the tree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LoopId(pub u32);

/// Binary arithmetic operator. Division is deliberately absent: every
/// operator must be total for the semantics to be.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Op {
    Add,
    Sub,
    Mul,
}

impl Op {
    /// Apply to doubles. Evaluators for concrete and symbolic expressions
    /// both go through this so equal terms evaluate bit-identically.
    #[inline]
    pub fn apply_f64(self, l: f64, r: f64) -> f64 {
        match self {
            Op::Add => l + r,
            Op::Sub => l - r,
            Op::Mul => l * r,
        }
    }

    /// Apply exactly to rationals.
    pub fn apply_rat(self, l: &Rat, r: &Rat) -> Rat {
        match self {
            Op::Add => l + r,
            Op::Sub => l - r,
            Op::Mul => l * r,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
        }
    }
}

/// Arithmetic expression over program variables.
///
/// Constants are exact rationals; floating point enters only at evaluation
/// and measure time.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Const(Rat),
    Var(VarId),
    Bin(Op, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Const(rat_int(v))
    }

    pub fn var(i: u32) -> Expr {
        Expr::Var(VarId(i))
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::Bin(Op::Add, Box::new(l), Box::new(r))
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::Bin(Op::Sub, Box::new(l), Box::new(r))
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::Bin(Op::Mul, Box::new(l), Box::new(r))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn sqrt(e: Expr) -> Expr {
        Expr::Sqrt(Box::new(e))
    }
}

/// Comparison operator of a Boolean atom.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl RelOp {
    /// The comparison equivalent to the negation of `self`.
    pub fn negated(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Ge,
            RelOp::Le => RelOp::Gt,
            RelOp::Gt => RelOp::Le,
            RelOp::Ge => RelOp::Lt,
            RelOp::Eq => RelOp::Ne,
            RelOp::Ne => RelOp::Eq,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::Eq => "=",
            RelOp::Ne => "!=",
        }
    }

    #[inline]
    pub fn holds_f64(self, l: f64, r: f64) -> bool {
        match self {
            RelOp::Lt => l < r,
            RelOp::Le => l <= r,
            RelOp::Gt => l > r,
            RelOp::Ge => l >= r,
            RelOp::Eq => l == r,
            RelOp::Ne => l != r,
        }
    }

    pub fn holds_rat(self, l: &Rat, r: &Rat) -> bool {
        match self {
            RelOp::Lt => l < r,
            RelOp::Le => l <= r,
            RelOp::Gt => l > r,
            RelOp::Ge => l >= r,
            RelOp::Eq => l == r,
            RelOp::Ne => l != r,
        }
    }
}

/// Boolean expression over arithmetic comparisons.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BoolExpr {
    Const(bool),
    Cmp(RelOp, Expr, Expr),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
}

impl BoolExpr {
    pub fn cmp(rel: RelOp, l: Expr, r: Expr) -> BoolExpr {
        BoolExpr::Cmp(rel, l, r)
    }

    pub fn and(l: BoolExpr, r: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: BoolExpr, r: BoolExpr) -> BoolExpr {
        BoolExpr::Or(Box::new(l), Box::new(r))
    }

    pub fn not(b: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(b))
    }

    /// Logical negation with `Not` pushed inward: comparisons flip their
    /// operator, conjunction and disjunction swap, and a direct `Not`
    /// cancels. On `Not`-free input the result is `Not`-free, which keeps
    /// path conditions in plain conjunctive form.
    pub fn negate(&self) -> BoolExpr {
        match self {
            BoolExpr::Const(b) => BoolExpr::Const(!b),
            BoolExpr::Cmp(rel, l, r) => BoolExpr::Cmp(rel.negated(), l.clone(), r.clone()),
            BoolExpr::And(l, r) => BoolExpr::or(l.negate(), r.negate()),
            BoolExpr::Or(l, r) => BoolExpr::and(l.negate(), r.negate()),
            BoolExpr::Not(b) => (**b).clone(),
        }
    }
}

/// Statement of the surface language. Bernoulli and general normal sampling
/// are sugar; [`super::desugar`] rewrites them into the primitive forms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Stmt {
    Skip,
    Assign(VarId, Expr),
    SampleUniform(VarId),
    SampleStdNormal(VarId),
    /// Sugar: Bernoulli sample with the given success probability.
    SampleBern(VarId, Expr),
    /// Sugar: normal sample with the given mean and variance.
    SampleNorm(VarId, Expr, Expr),
    Observe(BoolExpr),
    Seq(Box<Stmt>, Box<Stmt>),
    If(BoolExpr, Box<Stmt>, Box<Stmt>),
    While(LoopId, BoolExpr, Box<Stmt>),
}

impl Stmt {
    pub fn seq(a: Stmt, b: Stmt) -> Stmt {
        Stmt::Seq(Box::new(a), Box::new(b))
    }

    pub fn if_else(cond: BoolExpr, then: Stmt, els: Stmt) -> Stmt {
        Stmt::If(cond, Box::new(then), Box::new(els))
    }

    /// Build a loop with a placeholder id; [`Program::new`] renumbers ids.
    pub fn while_loop(cond: BoolExpr, body: Stmt) -> Stmt {
        Stmt::While(LoopId(0), cond, Box::new(body))
    }

    /// True if the tree contains a sugar node.
    pub fn has_sugar(&self) -> bool {
        match self {
            Stmt::SampleBern(..) | Stmt::SampleNorm(..) => true,
            Stmt::Seq(a, b) => a.has_sugar() || b.has_sugar(),
            Stmt::If(_, t, e) => t.has_sugar() || e.has_sugar(),
            Stmt::While(_, _, body) => body.has_sugar(),
            _ => false,
        }
    }
}

/// A program: a statement over a fixed set of named variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Program {
    /// Variable names in first-use order; `VarId(i)` names `vars[i]`.
    pub vars: Vec<String>,
    pub body: Stmt,
    /// Number of `while` nodes; their [`LoopId`]s are dense in `0..`.
    pub loop_count: u32,
}

impl Program {
    /// Build a program from a hand-assembled body, assigning loop ids in
    /// pre-order. The parser does this itself; use this for generated or
    /// test-built trees.
    pub fn new(vars: Vec<String>, mut body: Stmt) -> Program {
        let mut next = 0;
        number_loops(&mut body, &mut next);
        Program {
            vars,
            body,
            loop_count: next,
        }
    }

    /// Variable count.
    pub fn n(&self) -> usize {
        self.vars.len()
    }
}

fn number_loops(s: &mut Stmt, next: &mut u32) {
    match s {
        Stmt::Seq(a, b) => {
            number_loops(a, next);
            number_loops(b, next);
        }
        Stmt::If(_, t, e) => {
            number_loops(t, next);
            number_loops(e, next);
        }
        Stmt::While(id, _, body) => {
            *id = LoopId(*next);
            *next += 1;
            number_loops(body, next);
        }
        _ => {}
    }
}
