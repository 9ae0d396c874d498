//! Closed-form mass of separable path formulas.
//!
//! A conjunction of path atoms is separable when every comparison in it,
//! after moving everything to one side, is affine in at most one atom (a
//! free program variable or one stream entry). The atoms then induce a
//! finite partition of each axis into open intervals and breakpoints; every
//! literal has constant truth on each cell, and because the inputs are
//! independent the formula's mass is a sum of products of one-dimensional
//! cell masses. The result is exact whenever all bounds stay rational and
//! no normal factor needs the CDF; otherwise the value is still computed in
//! closed form but only as a double.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{One, Zero};

use crate::affine::{extract_affine, AffineForm, AtomVar, Coef};
use crate::concrete::VarMeasure;
use crate::interp::SymBool;
use crate::math;
use crate::rat::{self, Rat};
use crate::syntax::RelOp;

use super::{MassEstimate, MassWarning};

/// `v rel bound`, the normalized shape of a usable comparison.
struct Lit {
    var: AtomVar,
    rel: RelOp,
    bound: Coef,
}

/// The path formula with comparisons replaced by literal indices.
enum Node {
    Const(bool),
    Lit(usize),
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(alloc::boxed::Box<Node>),
}

/// One cell of an axis partition: a breakpoint or an open interval between
/// adjacent breakpoints (`None` edge = unbounded).
enum Cell {
    Point(Coef),
    Span(Option<Coef>, Option<Coef>),
}

struct Ctx {
    /// False once any decision leaned on floating point; exact values are
    /// only reported while this holds.
    rat_only: bool,
}

impl Ctx {
    fn cmp(&mut self, a: &Coef, b: &Coef) -> Option<Ordering> {
        if a.as_rat().is_none() || b.as_rat().is_none() {
            self.rat_only = false;
        }
        a.cmp_value(b)
    }
}

fn rel_holds(rel: RelOp, ord: Ordering) -> bool {
    match rel {
        RelOp::Lt => ord == Ordering::Less,
        RelOp::Le => ord != Ordering::Greater,
        RelOp::Gt => ord == Ordering::Greater,
        RelOp::Ge => ord != Ordering::Less,
        RelOp::Eq => ord == Ordering::Equal,
        RelOp::Ne => ord != Ordering::Equal,
    }
}

/// Mirror a comparison when both sides are scaled by a negative factor.
fn rel_mirrored(rel: RelOp) -> RelOp {
    match rel {
        RelOp::Lt => RelOp::Gt,
        RelOp::Le => RelOp::Ge,
        RelOp::Gt => RelOp::Lt,
        RelOp::Ge => RelOp::Le,
        RelOp::Eq => RelOp::Eq,
        RelOp::Ne => RelOp::Ne,
    }
}

/// Replace program variables that carry a point measure by their (exactly
/// embedded) value: they are constants, not axes.
fn substitute_points(mut f: AffineForm, mu: &[VarMeasure]) -> Option<AffineForm> {
    let pinned: Vec<AtomVar> = f
        .coeffs
        .keys()
        .copied()
        .filter(|v| matches!(v, AtomVar::Var(x) if matches!(mu[x.0 as usize], VarMeasure::Point(_))))
        .collect();
    for v in pinned {
        let AtomVar::Var(x) = v else { unreachable!() };
        let VarMeasure::Point(val) = mu[x.0 as usize] else {
            unreachable!()
        };
        let c = f.coeffs.remove(&v).expect("key came from the map");
        let pv = Coef::Rat(rat::from_f64_exact(val)?);
        f.constant = f.constant.add(&c.mul(&pv));
    }
    Some(f)
}

/// Translate one symbolic Boolean into a formula node, registering
/// literals. `None` means the conjunction is outside the separable class.
fn build(b: &SymBool, mu: &[VarMeasure], lits: &mut Vec<Lit>, ctx: &mut Ctx) -> Option<Node> {
    match b {
        SymBool::Const(v) => Some(Node::Const(*v)),
        SymBool::Not(inner) => match build(inner, mu, lits, ctx)? {
            Node::Const(v) => Some(Node::Const(!v)),
            n => Some(Node::Not(alloc::boxed::Box::new(n))),
        },
        SymBool::And(l, r) => {
            let (l, r) = (build(l, mu, lits, ctx)?, build(r, mu, lits, ctx)?);
            Some(match (l, r) {
                (Node::Const(false), _) | (_, Node::Const(false)) => Node::Const(false),
                (Node::Const(true), n) | (n, Node::Const(true)) => n,
                (l, r) => Node::And(vec![l, r]),
            })
        }
        SymBool::Or(l, r) => {
            let (l, r) = (build(l, mu, lits, ctx)?, build(r, mu, lits, ctx)?);
            Some(match (l, r) {
                (Node::Const(true), _) | (_, Node::Const(true)) => Node::Const(true),
                (Node::Const(false), n) | (n, Node::Const(false)) => n,
                (l, r) => Node::Or(vec![l, r]),
            })
        }
        SymBool::Cmp(rel, lhs, rhs) => {
            let diff = substitute_points(extract_affine(lhs)?.sub(&extract_affine(rhs)?), mu)?;
            if let Some(c) = diff.as_constant() {
                let ord = ctx.cmp(&c, &Coef::zero())?;
                return Some(Node::Const(rel_holds(*rel, ord)));
            }
            let (var, coeff) = diff.single_atom()?;
            let coeff = coeff.clone();
            // a*v + c rel 0  <=>  v rel' -c/a, mirrored when a < 0.
            let bound = diff.constant.neg().div(&coeff).expect("nonzero coefficient");
            if coeff.as_rat().is_none() {
                ctx.rat_only = false;
            }
            let rel = if coeff.is_negative() { rel_mirrored(*rel) } else { *rel };
            lits.push(Lit { var, rel, bound });
            Some(Node::Lit(lits.len() - 1))
        }
    }
}

fn eval(n: &Node, truth: &[bool]) -> bool {
    match n {
        Node::Const(v) => *v,
        Node::Lit(i) => truth[*i],
        Node::And(ns) => ns.iter().all(|n| eval(n, truth)),
        Node::Or(ns) => ns.iter().any(|n| eval(n, truth)),
        Node::Not(n) => !eval(n, truth),
    }
}

fn used_lits(n: &Node, out: &mut Vec<bool>) {
    match n {
        Node::Const(_) => {}
        Node::Lit(i) => out[*i] = true,
        Node::And(ns) | Node::Or(ns) => ns.iter().for_each(|n| used_lits(n, out)),
        Node::Not(n) => used_lits(n, out),
    }
}

fn measure_of(v: AtomVar, mu: &[VarMeasure]) -> VarMeasure {
    match v {
        AtomVar::Var(x) => mu[x.0 as usize],
        AtomVar::Uni(_) => VarMeasure::Uniform01,
        AtomVar::Nrm(_) => VarMeasure::StdNormal,
    }
}

/// Sorted, deduplicated breakpoints. Ties between a rational and an equal
/// float keep the rational representative.
fn breakpoints(bounds: &[&Coef], ctx: &mut Ctx) -> Option<Vec<Coef>> {
    let mut out: Vec<Coef> = Vec::new();
    for b in bounds {
        let mut pos = out.len();
        let mut dup = false;
        for (i, cur) in out.iter().enumerate() {
            match ctx.cmp(b, cur)? {
                Ordering::Less => {
                    pos = i;
                    break;
                }
                Ordering::Equal => {
                    dup = true;
                    if cur.as_rat().is_none() && b.as_rat().is_some() {
                        out[i] = (*b).clone();
                    }
                    break;
                }
                Ordering::Greater => {}
            }
        }
        if !dup {
            out.insert(pos, (*b).clone());
        }
    }
    Some(out)
}

fn cells_of(breaks: &[Coef]) -> Vec<Cell> {
    if breaks.is_empty() {
        return vec![Cell::Span(None, None)];
    }
    let mut cells = Vec::with_capacity(2 * breaks.len() + 1);
    cells.push(Cell::Span(None, Some(breaks[0].clone())));
    for (i, b) in breaks.iter().enumerate() {
        cells.push(Cell::Point(b.clone()));
        let hi = breaks.get(i + 1).cloned();
        cells.push(Cell::Span(Some(b.clone()), hi));
    }
    cells
}

/// Truth of `v rel bound` on a cell. Every literal bound on this axis is a
/// breakpoint, so each span lies entirely on one side of it.
fn cell_truth(lit: &Lit, cell: &Cell, ctx: &mut Ctx) -> Option<bool> {
    let ord = match cell {
        Cell::Point(p) => ctx.cmp(p, &lit.bound)?,
        Cell::Span(lo, hi) => {
            if let Some(h) = hi {
                if ctx.cmp(h, &lit.bound)? != Ordering::Greater {
                    return Some(rel_holds(lit.rel, Ordering::Less));
                }
            }
            if let Some(l) = lo {
                if ctx.cmp(l, &lit.bound)? != Ordering::Less {
                    return Some(rel_holds(lit.rel, Ordering::Greater));
                }
            }
            return None;
        }
    };
    Some(rel_holds(lit.rel, ord))
}

/// Mass of one cell under one input measure: `(double, exact)` with the
/// exact rational present only when it is honest.
fn cell_mass(cell: &Cell, m: VarMeasure, ctx: &mut Ctx) -> Option<(f64, Option<Rat>)> {
    match m {
        VarMeasure::Point(v) => {
            let pv = Coef::Rat(rat::from_f64_exact(v)?);
            let inside = match cell {
                Cell::Point(p) => ctx.cmp(p, &pv)? == Ordering::Equal,
                Cell::Span(lo, hi) => {
                    let above = match lo {
                        None => true,
                        Some(l) => ctx.cmp(&pv, l)? == Ordering::Greater,
                    };
                    let below = match hi {
                        None => true,
                        Some(h) => ctx.cmp(&pv, h)? == Ordering::Less,
                    };
                    above && below
                }
            };
            let r = if inside { Rat::one() } else { Rat::zero() };
            Some((rat::to_f64(&r), Some(r)))
        }
        VarMeasure::Uniform01 => match cell {
            Cell::Point(_) => Some((0.0, Some(Rat::zero()))),
            Cell::Span(lo, hi) => {
                let zero = Coef::Rat(Rat::zero());
                let one = Coef::Rat(Rat::one());
                let lo = match lo {
                    Some(l) if ctx.cmp(l, &zero)? == Ordering::Greater => l.clone(),
                    _ => zero,
                };
                let hi = match hi {
                    Some(h) if ctx.cmp(h, &one)? == Ordering::Less => h.clone(),
                    _ => one,
                };
                if ctx.cmp(&hi, &lo)? != Ordering::Greater {
                    return Some((0.0, Some(Rat::zero())));
                }
                match (hi.as_rat(), lo.as_rat()) {
                    (Some(h), Some(l)) => {
                        let len = h - l;
                        Some((rat::to_f64(&len), Some(len)))
                    }
                    _ => Some((hi.to_f64() - lo.to_f64(), None)),
                }
            }
        },
        VarMeasure::StdNormal => match cell {
            Cell::Point(_) => Some((0.0, Some(Rat::zero()))),
            Cell::Span(lo, hi) => Some(match (lo, hi) {
                (None, None) => (1.0, Some(Rat::one())),
                (None, Some(h)) => (math::normal_cdf(h.to_f64()), None),
                (Some(l), None) => (math::normal_sf(l.to_f64()), None),
                (Some(l), Some(h)) => (
                    math::max(0.0, math::normal_cdf(h.to_f64()) - math::normal_cdf(l.to_f64())),
                    None,
                ),
            }),
        },
    }
}

/// One axis of the grid: its cells with per-cell literal truths and masses.
/// Cells of mass zero are dropped up front; they cannot contribute.
struct Axis {
    cells: Vec<(Vec<(usize, bool)>, f64, Option<Rat>)>,
}

/// Exact (closed-form) mass of the conjunction of `atoms` under the product
/// of `mu` and the stream measures, or `None` when the formula is not
/// separable and the caller must fall back to sampling.
pub(super) fn separable_mass(atoms: &[SymBool], mu: &[VarMeasure]) -> Option<MassEstimate> {
    let mut lits = Vec::new();
    let mut ctx = Ctx { rat_only: true };
    let mut clauses = Vec::with_capacity(atoms.len());
    for a in atoms {
        clauses.push(build(a, mu, &mut lits, &mut ctx)?);
    }
    let root = if clauses.iter().any(|c| matches!(c, Node::Const(false))) {
        Node::Const(false)
    } else {
        clauses.retain(|c| !matches!(c, Node::Const(true)));
        if clauses.is_empty() {
            Node::Const(true)
        } else {
            Node::And(clauses)
        }
    };

    match &root {
        Node::Const(false) => return Some(finish(0.0, Some(Rat::zero()), &ctx, Vec::new())),
        Node::Const(true) => return Some(finish(1.0, Some(Rat::one()), &ctx, Vec::new())),
        _ => {}
    }

    let mut used = vec![false; lits.len()];
    used_lits(&root, &mut used);

    // Group the used literals by axis and warn about equalities on
    // continuous inputs: those force probability zero.
    let mut warnings = Vec::new();
    let mut by_var: BTreeMap<AtomVar, Vec<usize>> = BTreeMap::new();
    for (i, lit) in lits.iter().enumerate() {
        if !used[i] {
            continue;
        }
        by_var.entry(lit.var).or_default().push(i);
        if lit.rel == RelOp::Eq {
            if let VarMeasure::Uniform01 | VarMeasure::StdNormal = measure_of(lit.var, mu) {
                warnings.push(MassWarning::ContinuousEquality);
            }
        }
    }

    let mut axes: Vec<Axis> = Vec::with_capacity(by_var.len());
    for (var, lit_ids) in &by_var {
        let m = measure_of(*var, mu);
        let bounds: Vec<&Coef> = lit_ids.iter().map(|&i| &lits[i].bound).collect();
        let breaks = breakpoints(&bounds, &mut ctx)?;
        let mut cells = Vec::new();
        for cell in cells_of(&breaks) {
            let (value, exact) = cell_mass(&cell, m, &mut ctx)?;
            let zero = match &exact {
                Some(r) => r.is_zero(),
                None => value == 0.0,
            };
            if zero {
                continue;
            }
            let mut truths = Vec::with_capacity(lit_ids.len());
            for &i in lit_ids {
                truths.push((i, cell_truth(&lits[i], &cell, &mut ctx)?));
            }
            cells.push((truths, value, exact));
        }
        axes.push(Axis { cells });
    }

    // Walk the product of per-axis cells, adding the mass of every tuple on
    // which the formula holds.
    let mut truth = vec![false; lits.len()];
    let mut total_f = 0.0;
    let mut total_rat: Option<Rat> = Some(Rat::zero());
    fn walk(
        axes: &[Axis],
        root: &Node,
        truth: &mut [bool],
        acc_f: f64,
        acc_rat: Option<Rat>,
        total_f: &mut f64,
        total_rat: &mut Option<Rat>,
    ) {
        match axes.split_first() {
            None => {
                if eval(root, truth) {
                    *total_f += acc_f;
                    *total_rat = match (total_rat.take(), acc_rat) {
                        (Some(t), Some(a)) => Some(t + a),
                        _ => None,
                    };
                }
            }
            Some((axis, rest)) => {
                for (truths, value, exact) in &axis.cells {
                    for &(i, t) in truths {
                        truth[i] = t;
                    }
                    let next_rat = match (&acc_rat, exact) {
                        (Some(a), Some(e)) => Some(a * e),
                        _ => None,
                    };
                    walk(rest, root, truth, acc_f * value, next_rat, total_f, total_rat);
                }
            }
        }
    }
    walk(
        &axes,
        &root,
        &mut truth,
        1.0,
        Some(Rat::one()),
        &mut total_f,
        &mut total_rat,
    );

    Some(finish(total_f, total_rat, &ctx, warnings))
}

fn finish(value: f64, exact: Option<Rat>, ctx: &Ctx, mut warnings: Vec<MassWarning>) -> MassEstimate {
    warnings.sort_unstable();
    warnings.dedup();
    let exact_value = if ctx.rat_only { exact } else { None };
    MassEstimate {
        value: match &exact_value {
            Some(r) => rat::to_f64(r),
            None => value,
        },
        method: super::Method::Exact,
        stderr: 0.0,
        samples_used: 0,
        exact_value,
        warnings,
    }
}
