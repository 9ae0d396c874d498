//! Meaning of expressions and substitutions.
//!
//! Symbolic expressions extend program expressions with sample variables:
//! `y_k` picks the k-th uniform draw and `z_k` the k-th standard normal
//! draw of a valuation's streams. Substitutions map every program variable
//! to a symbolic expression and act homomorphically on (symbolic)
//! expressions and Booleans. Evaluation of concrete and symbolic trees
//! shares the same operator code paths, so an expression without sample
//! variables evaluates bit-identically through either route.

mod valuation;

pub use valuation::{interpret_subst, Valuation};

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Signed;

use crate::math;
use crate::rat::{rat_int, Rat};
use crate::syntax::{self, BoolExpr, Expr, Op, RelOp, VarId};

/// Primitive distribution a sample variable draws from.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Dist {
    Uniform,
    StdNormal,
}

/// Evaluation failure: square root of a negative number. The operator set
/// is otherwise total.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DomainError;

impl core::fmt::Display for DomainError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("square root of a negative number")
    }
}

impl core::error::Error for DomainError {}

/// Symbolic expression: a program expression possibly mentioning sample
/// variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SymExpr {
    Const(Rat),
    Var(VarId),
    /// `y_k` (uniform) or `z_k` (standard normal).
    Sample(Dist, u32),
    Bin(Op, Box<SymExpr>, Box<SymExpr>),
    Neg(Box<SymExpr>),
    Sqrt(Box<SymExpr>),
}

impl SymExpr {
    pub fn int(v: i64) -> SymExpr {
        SymExpr::Const(rat_int(v))
    }

    pub fn var(i: u32) -> SymExpr {
        SymExpr::Var(VarId(i))
    }

    pub fn uni(k: u32) -> SymExpr {
        SymExpr::Sample(Dist::Uniform, k)
    }

    pub fn nrm(k: u32) -> SymExpr {
        SymExpr::Sample(Dist::StdNormal, k)
    }

    pub fn add(l: SymExpr, r: SymExpr) -> SymExpr {
        SymExpr::Bin(Op::Add, Box::new(l), Box::new(r))
    }

    pub fn sub(l: SymExpr, r: SymExpr) -> SymExpr {
        SymExpr::Bin(Op::Sub, Box::new(l), Box::new(r))
    }

    pub fn mul(l: SymExpr, r: SymExpr) -> SymExpr {
        SymExpr::Bin(Op::Mul, Box::new(l), Box::new(r))
    }

    pub fn neg(e: SymExpr) -> SymExpr {
        SymExpr::Neg(Box::new(e))
    }

    pub fn sqrt(e: SymExpr) -> SymExpr {
        SymExpr::Sqrt(Box::new(e))
    }

    /// Exclusive upper bounds on the uniform and normal sample indices
    /// occurring in the term: `(0, 0)` means no sample variables at all.
    pub fn sample_bounds(&self) -> (u32, u32) {
        let mut b = (0, 0);
        self.grow_bounds(&mut b);
        b
    }

    fn grow_bounds(&self, b: &mut (u32, u32)) {
        match self {
            SymExpr::Sample(Dist::Uniform, k) => b.0 = b.0.max(k + 1),
            SymExpr::Sample(Dist::StdNormal, k) => b.1 = b.1.max(k + 1),
            SymExpr::Bin(_, l, r) => {
                l.grow_bounds(b);
                r.grow_bounds(b);
            }
            SymExpr::Neg(e) | SymExpr::Sqrt(e) => e.grow_bounds(b),
            SymExpr::Const(_) | SymExpr::Var(_) => {}
        }
    }

    /// Add `dy`/`dz` to every uniform/normal sample index.
    pub fn shift_samples(&self, dy: u32, dz: u32) -> SymExpr {
        match self {
            SymExpr::Sample(Dist::Uniform, k) => SymExpr::Sample(Dist::Uniform, k + dy),
            SymExpr::Sample(Dist::StdNormal, k) => SymExpr::Sample(Dist::StdNormal, k + dz),
            SymExpr::Bin(op, l, r) => SymExpr::Bin(
                *op,
                Box::new(l.shift_samples(dy, dz)),
                Box::new(r.shift_samples(dy, dz)),
            ),
            SymExpr::Neg(e) => SymExpr::Neg(Box::new(e.shift_samples(dy, dz))),
            SymExpr::Sqrt(e) => SymExpr::Sqrt(Box::new(e.shift_samples(dy, dz))),
            SymExpr::Const(_) | SymExpr::Var(_) => self.clone(),
        }
    }

    /// Exact rational value, if the term contains no variables and every
    /// square root is of a perfect rational square. Used for feasibility
    /// presolving; evaluation never goes through here.
    pub fn const_value(&self) -> Option<Rat> {
        match self {
            SymExpr::Const(c) => Some(c.clone()),
            SymExpr::Var(_) | SymExpr::Sample(..) => None,
            SymExpr::Bin(op, l, r) => Some(op.apply_rat(&l.const_value()?, &r.const_value()?)),
            SymExpr::Neg(e) => Some(-e.const_value()?),
            SymExpr::Sqrt(e) => rational_sqrt(&e.const_value()?),
        }
    }
}

/// Exact square root of a nonnegative rational, when one exists.
pub(crate) fn rational_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let num_root = r.numer().sqrt();
    let den_root = r.denom().sqrt();
    if &(&num_root * &num_root) == r.numer() && &(&den_root * &den_root) == r.denom() {
        Some(Rat::new(num_root, den_root))
    } else {
        None
    }
}

/// Symbolic Boolean expression.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SymBool {
    Const(bool),
    Cmp(RelOp, SymExpr, SymExpr),
    And(Box<SymBool>, Box<SymBool>),
    Or(Box<SymBool>, Box<SymBool>),
    Not(Box<SymBool>),
}

impl SymBool {
    pub fn cmp(rel: RelOp, l: SymExpr, r: SymExpr) -> SymBool {
        SymBool::Cmp(rel, l, r)
    }

    pub fn and(l: SymBool, r: SymBool) -> SymBool {
        SymBool::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: SymBool, r: SymBool) -> SymBool {
        SymBool::Or(Box::new(l), Box::new(r))
    }

    /// As [`crate::syntax::BoolExpr::negate`]: flip comparisons, swap
    /// connectives, cancel a direct `Not`.
    pub fn negate(&self) -> SymBool {
        match self {
            SymBool::Const(b) => SymBool::Const(!b),
            SymBool::Cmp(rel, l, r) => SymBool::Cmp(rel.negated(), l.clone(), r.clone()),
            SymBool::And(l, r) => SymBool::or(l.negate(), r.negate()),
            SymBool::Or(l, r) => SymBool::and(l.negate(), r.negate()),
            SymBool::Not(b) => (**b).clone(),
        }
    }

    /// See [`SymExpr::sample_bounds`].
    pub fn sample_bounds(&self) -> (u32, u32) {
        let mut b = (0, 0);
        self.grow_bounds(&mut b);
        b
    }

    fn grow_bounds(&self, b: &mut (u32, u32)) {
        match self {
            SymBool::Const(_) => {}
            SymBool::Cmp(_, l, r) => {
                l.grow_bounds(b);
                r.grow_bounds(b);
            }
            SymBool::And(l, r) | SymBool::Or(l, r) => {
                l.grow_bounds(b);
                r.grow_bounds(b);
            }
            SymBool::Not(inner) => inner.grow_bounds(b),
        }
    }

    /// Add `dy`/`dz` to every sample index.
    pub fn shift_samples(&self, dy: u32, dz: u32) -> SymBool {
        match self {
            SymBool::Const(b) => SymBool::Const(*b),
            SymBool::Cmp(rel, l, r) => {
                SymBool::Cmp(*rel, l.shift_samples(dy, dz), r.shift_samples(dy, dz))
            }
            SymBool::And(l, r) => {
                SymBool::and(l.shift_samples(dy, dz), r.shift_samples(dy, dz))
            }
            SymBool::Or(l, r) => SymBool::or(l.shift_samples(dy, dz), r.shift_samples(dy, dz)),
            SymBool::Not(inner) => SymBool::Not(Box::new(inner.shift_samples(dy, dz))),
        }
    }

    /// Constant truth value, if one is forced by exact rational reasoning.
    /// `And`/`Or` fold when one side settles the answer.
    pub fn const_truth(&self) -> Option<bool> {
        match self {
            SymBool::Const(b) => Some(*b),
            SymBool::Cmp(rel, l, r) => Some(rel.holds_rat(&l.const_value()?, &r.const_value()?)),
            SymBool::And(l, r) => match (l.const_truth(), r.const_truth()) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            SymBool::Or(l, r) => match (l.const_truth(), r.const_truth()) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            SymBool::Not(inner) => inner.const_truth().map(|b| !b),
        }
    }
}

/// Lift a program expression into a symbolic one (no sample variables).
pub fn inject(e: &Expr) -> SymExpr {
    match e {
        Expr::Const(c) => SymExpr::Const(c.clone()),
        Expr::Var(v) => SymExpr::Var(*v),
        Expr::Bin(op, l, r) => SymExpr::Bin(*op, Box::new(inject(l)), Box::new(inject(r))),
        Expr::Neg(inner) => SymExpr::Neg(Box::new(inject(inner))),
        Expr::Sqrt(inner) => SymExpr::Sqrt(Box::new(inject(inner))),
    }
}

/// Lift a program Boolean expression into a symbolic one.
pub fn inject_bool(b: &BoolExpr) -> SymBool {
    match b {
        BoolExpr::Const(c) => SymBool::Const(*c),
        BoolExpr::Cmp(rel, l, r) => SymBool::Cmp(*rel, inject(l), inject(r)),
        BoolExpr::And(l, r) => SymBool::and(inject_bool(l), inject_bool(r)),
        BoolExpr::Or(l, r) => SymBool::or(inject_bool(l), inject_bool(r)),
        BoolExpr::Not(inner) => SymBool::Not(Box::new(inject_bool(inner))),
    }
}

/// Total map from program variables to symbolic expressions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Substitution {
    terms: Vec<SymExpr>,
}

impl Substitution {
    /// The identity substitution on `n` variables.
    pub fn identity(n: usize) -> Substitution {
        Substitution {
            terms: (0..n).map(|i| SymExpr::var(i as u32)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, v: VarId) -> &SymExpr {
        &self.terms[v.0 as usize]
    }

    pub fn terms(&self) -> &[SymExpr] {
        &self.terms
    }

    pub fn set(&mut self, v: VarId, term: SymExpr) {
        self.terms[v.0 as usize] = term;
    }

    /// Replace every `Var(i)` in a symbolic term by this substitution's
    /// term for `i`; sample variables pass through.
    pub fn apply_sym(&self, se: &SymExpr) -> SymExpr {
        match se {
            SymExpr::Const(_) | SymExpr::Sample(..) => se.clone(),
            SymExpr::Var(v) => self.term(*v).clone(),
            SymExpr::Bin(op, l, r) => {
                SymExpr::Bin(*op, Box::new(self.apply_sym(l)), Box::new(self.apply_sym(r)))
            }
            SymExpr::Neg(e) => SymExpr::Neg(Box::new(self.apply_sym(e))),
            SymExpr::Sqrt(e) => SymExpr::Sqrt(Box::new(self.apply_sym(e))),
        }
    }

    /// Apply to a program expression.
    pub fn apply_expr(&self, e: &Expr) -> SymExpr {
        self.apply_sym(&inject(e))
    }

    /// Apply to a symbolic Boolean expression.
    pub fn apply_sym_bool(&self, sb: &SymBool) -> SymBool {
        match sb {
            SymBool::Const(b) => SymBool::Const(*b),
            SymBool::Cmp(rel, l, r) => SymBool::Cmp(*rel, self.apply_sym(l), self.apply_sym(r)),
            SymBool::And(l, r) => SymBool::and(self.apply_sym_bool(l), self.apply_sym_bool(r)),
            SymBool::Or(l, r) => SymBool::or(self.apply_sym_bool(l), self.apply_sym_bool(r)),
            SymBool::Not(inner) => SymBool::Not(Box::new(self.apply_sym_bool(inner))),
        }
    }

    /// Apply to a program Boolean expression.
    pub fn apply_bool(&self, b: &BoolExpr) -> SymBool {
        self.apply_sym_bool(&inject_bool(b))
    }
}

/// Evaluate a program expression at a vector of variable values.
pub fn eval_expr(e: &Expr, vals: &[f64]) -> Result<f64, DomainError> {
    match e {
        Expr::Const(c) => Ok(crate::rat::to_f64(c)),
        Expr::Var(v) => Ok(vals[v.0 as usize]),
        Expr::Bin(op, l, r) => Ok(op.apply_f64(eval_expr(l, vals)?, eval_expr(r, vals)?)),
        Expr::Neg(inner) => Ok(-eval_expr(inner, vals)?),
        Expr::Sqrt(inner) => {
            let v = eval_expr(inner, vals)?;
            if v < 0.0 {
                Err(DomainError)
            } else {
                Ok(math::sqrt(v))
            }
        }
    }
}

/// Evaluate a program Boolean expression at a vector of variable values.
/// Conjunction and disjunction short-circuit left to right.
pub fn eval_bool(b: &BoolExpr, vals: &[f64]) -> Result<bool, DomainError> {
    match b {
        BoolExpr::Const(c) => Ok(*c),
        BoolExpr::Cmp(rel, l, r) => Ok(rel.holds_f64(eval_expr(l, vals)?, eval_expr(r, vals)?)),
        BoolExpr::And(l, r) => {
            if !eval_bool(l, vals)? {
                Ok(false)
            } else {
                eval_bool(r, vals)
            }
        }
        BoolExpr::Or(l, r) => {
            if eval_bool(l, vals)? {
                Ok(true)
            } else {
                eval_bool(r, vals)
            }
        }
        BoolExpr::Not(inner) => Ok(!eval_bool(inner, vals)?),
    }
}

/// Evaluate a symbolic expression at a valuation; sample variables read the
/// streams, which extend on demand.
pub fn eval_sym_expr(se: &SymExpr, rho: &mut Valuation) -> Result<f64, DomainError> {
    match se {
        SymExpr::Const(c) => Ok(crate::rat::to_f64(c)),
        SymExpr::Var(v) => Ok(rho.vars[v.0 as usize]),
        SymExpr::Sample(Dist::Uniform, k) => Ok(rho.uni(*k)),
        SymExpr::Sample(Dist::StdNormal, k) => Ok(rho.nrm(*k)),
        SymExpr::Bin(op, l, r) => {
            let lv = eval_sym_expr(l, rho)?;
            let rv = eval_sym_expr(r, rho)?;
            Ok(op.apply_f64(lv, rv))
        }
        SymExpr::Neg(inner) => Ok(-eval_sym_expr(inner, rho)?),
        SymExpr::Sqrt(inner) => {
            let v = eval_sym_expr(inner, rho)?;
            if v < 0.0 {
                Err(DomainError)
            } else {
                Ok(math::sqrt(v))
            }
        }
    }
}

/// Evaluate a symbolic Boolean expression at a valuation.
pub fn eval_sym_bool(sb: &SymBool, rho: &mut Valuation) -> Result<bool, DomainError> {
    match sb {
        SymBool::Const(c) => Ok(*c),
        SymBool::Cmp(rel, l, r) => {
            let lv = eval_sym_expr(l, rho)?;
            let rv = eval_sym_expr(r, rho)?;
            Ok(rel.holds_f64(lv, rv))
        }
        SymBool::And(l, r) => {
            if !eval_sym_bool(l, rho)? {
                Ok(false)
            } else {
                eval_sym_bool(r, rho)
            }
        }
        SymBool::Or(l, r) => {
            if eval_sym_bool(l, rho)? {
                Ok(true)
            } else {
                eval_sym_bool(r, rho)
            }
        }
        SymBool::Not(inner) => Ok(!eval_sym_bool(inner, rho)?),
    }
}

/// Sample-variable names appended to the program variables, so symbolic
/// terms can reuse the program printer.
fn extended_names(vars: &[String], bound: (u32, u32)) -> Vec<String> {
    let mut names: Vec<String> = vars.to_vec();
    for k in 0..bound.0 {
        let mut s = String::from("y");
        push_index(k, &mut s);
        names.push(s);
    }
    for k in 0..bound.1 {
        let mut s = String::from("z");
        push_index(k, &mut s);
        names.push(s);
    }
    names
}

fn push_index(k: u32, out: &mut String) {
    use core::fmt::Write;
    let _ = write!(out, "{k}");
}

fn lower_expr(se: &SymExpr, n: usize, uni_count: u32) -> Expr {
    match se {
        SymExpr::Const(c) => Expr::Const(c.clone()),
        SymExpr::Var(v) => Expr::Var(*v),
        SymExpr::Sample(Dist::Uniform, k) => Expr::Var(VarId(n as u32 + k)),
        SymExpr::Sample(Dist::StdNormal, k) => Expr::Var(VarId(n as u32 + uni_count + k)),
        SymExpr::Bin(op, l, r) => Expr::Bin(
            *op,
            Box::new(lower_expr(l, n, uni_count)),
            Box::new(lower_expr(r, n, uni_count)),
        ),
        SymExpr::Neg(e) => Expr::Neg(Box::new(lower_expr(e, n, uni_count))),
        SymExpr::Sqrt(e) => Expr::Sqrt(Box::new(lower_expr(e, n, uni_count))),
    }
}

fn lower_bool(sb: &SymBool, n: usize, uni_count: u32) -> BoolExpr {
    match sb {
        SymBool::Const(b) => BoolExpr::Const(*b),
        SymBool::Cmp(rel, l, r) => {
            BoolExpr::Cmp(*rel, lower_expr(l, n, uni_count), lower_expr(r, n, uni_count))
        }
        SymBool::And(l, r) => {
            BoolExpr::and(lower_bool(l, n, uni_count), lower_bool(r, n, uni_count))
        }
        SymBool::Or(l, r) => {
            BoolExpr::or(lower_bool(l, n, uni_count), lower_bool(r, n, uni_count))
        }
        SymBool::Not(inner) => BoolExpr::not(lower_bool(inner, n, uni_count)),
    }
}

/// Render a symbolic expression, naming samples `y0, y1, …` and `z0, z1, …`.
pub fn print_sym_expr(se: &SymExpr, vars: &[String]) -> String {
    let bound = se.sample_bounds();
    let names = extended_names(vars, bound);
    syntax::print_expr(&lower_expr(se, vars.len(), bound.0), &names)
}

/// Render a symbolic Boolean expression.
pub fn print_sym_bool(sb: &SymBool, vars: &[String]) -> String {
    let bound = sb.sample_bounds();
    let names = extended_names(vars, bound);
    syntax::print_bool(&lower_bool(sb, vars.len(), bound.0), &names)
}
