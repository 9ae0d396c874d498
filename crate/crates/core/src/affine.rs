//! Affine views of symbolic terms.
//!
//! A symbolic term is affine when it is a sum of scaled atoms (program
//! variables and stream entries) plus a constant. Terms in that shape admit
//! closed-form treatment: a comparison between two affine terms collapses to
//! a one-sided bound on a single atom whenever only one atom survives the
//! subtraction, which is what the interval presolver and the exact measure
//! computation consume.

use alloc::collections::BTreeMap;
use core::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::interp::{rational_sqrt, Dist, SymExpr};
use crate::math;
use crate::rat::Rat;
use crate::syntax::{Op, VarId};

/// An atom a term can be affine in: a free program variable or one entry of
/// a sample stream. Ordered so coefficient maps have a canonical layout.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum AtomVar {
    Var(VarId),
    Uni(u32),
    Nrm(u32),
}

/// A coefficient: exact while the arithmetic stays rational, floating point
/// once an irrational square root enters. Any operation touching a `Flt`
/// yields a `Flt`.
#[derive(Clone, PartialEq, Debug)]
pub enum Coef {
    Rat(Rat),
    Flt(f64),
}

impl Coef {
    pub fn zero() -> Coef {
        Coef::Rat(Rat::zero())
    }

    pub fn from_int(n: i64) -> Coef {
        Coef::Rat(crate::rat::rat_int(n))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coef::Rat(r) => crate::rat::to_f64(r),
            Coef::Flt(f) => *f,
        }
    }

    /// The exact value, when this coefficient never left the rationals.
    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Coef::Rat(r) => Some(r),
            Coef::Flt(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coef::Rat(r) => r.is_zero(),
            Coef::Flt(f) => *f == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Coef::Rat(r) => r.is_negative(),
            Coef::Flt(f) => *f < 0.0,
        }
    }

    pub fn add(&self, other: &Coef) -> Coef {
        match (self, other) {
            (Coef::Rat(a), Coef::Rat(b)) => Coef::Rat(a + b),
            _ => Coef::Flt(self.to_f64() + other.to_f64()),
        }
    }

    pub fn sub(&self, other: &Coef) -> Coef {
        match (self, other) {
            (Coef::Rat(a), Coef::Rat(b)) => Coef::Rat(a - b),
            _ => Coef::Flt(self.to_f64() - other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Coef) -> Coef {
        match (self, other) {
            (Coef::Rat(a), Coef::Rat(b)) => Coef::Rat(a * b),
            _ => Coef::Flt(self.to_f64() * other.to_f64()),
        }
    }

    pub fn neg(&self) -> Coef {
        match self {
            Coef::Rat(r) => Coef::Rat(-r),
            Coef::Flt(f) => Coef::Flt(-f),
        }
    }

    /// Division, unless the divisor is zero.
    pub fn div(&self, other: &Coef) -> Option<Coef> {
        if other.is_zero() {
            return None;
        }
        Some(match (self, other) {
            (Coef::Rat(a), Coef::Rat(b)) => Coef::Rat(a / b),
            _ => Coef::Flt(self.to_f64() / other.to_f64()),
        })
    }

    /// Square root. Exact when the value is a perfect rational square,
    /// floating point otherwise; `None` on negative values.
    pub fn sqrt(&self) -> Option<Coef> {
        match self {
            Coef::Rat(r) => {
                if r.is_negative() {
                    None
                } else if let Some(root) = rational_sqrt(r) {
                    Some(Coef::Rat(root))
                } else {
                    Some(Coef::Flt(math::sqrt(crate::rat::to_f64(r))))
                }
            }
            Coef::Flt(f) => {
                if *f < 0.0 {
                    None
                } else {
                    Some(Coef::Flt(math::sqrt(*f)))
                }
            }
        }
    }

    /// Value comparison across representations. Mixed comparisons happen in
    /// floating point; `None` only if a non-finite float sneaks in.
    pub fn cmp_value(&self, other: &Coef) -> Option<Ordering> {
        match (self, other) {
            (Coef::Rat(a), Coef::Rat(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

/// Sum of scaled atoms plus a constant. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct AffineForm {
    pub coeffs: BTreeMap<AtomVar, Coef>,
    pub constant: Coef,
}

impl AffineForm {
    pub fn constant(c: Coef) -> AffineForm {
        AffineForm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn atom(v: AtomVar) -> AffineForm {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Coef::from_int(1));
        AffineForm {
            coeffs,
            constant: Coef::zero(),
        }
    }

    /// The constant value, when no atom has a residual coefficient.
    pub fn as_constant(&self) -> Option<Coef> {
        if self.coeffs.is_empty() {
            Some(self.constant.clone())
        } else {
            None
        }
    }

    /// The single `(atom, coefficient)` pair, when exactly one atom occurs.
    pub fn single_atom(&self) -> Option<(AtomVar, &Coef)> {
        if self.coeffs.len() == 1 {
            let (v, c) = self.coeffs.iter().next().unwrap();
            Some((*v, c))
        } else {
            None
        }
    }

    fn merge(&self, other: &AffineForm, combine: impl Fn(&Coef, &Coef) -> Coef) -> AffineForm {
        let mut coeffs = self.coeffs.clone();
        for (v, c) in &other.coeffs {
            let merged = match coeffs.get(v) {
                Some(cur) => combine(cur, c),
                None => combine(&Coef::zero(), c),
            };
            if merged.is_zero() {
                coeffs.remove(v);
            } else {
                coeffs.insert(*v, merged);
            }
        }
        AffineForm {
            coeffs,
            constant: combine(&self.constant, &other.constant),
        }
    }

    pub fn add(&self, other: &AffineForm) -> AffineForm {
        self.merge(other, Coef::add)
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        self.merge(other, Coef::sub)
    }

    pub fn scale(&self, k: &Coef) -> AffineForm {
        if k.is_zero() {
            return AffineForm::constant(Coef::zero());
        }
        AffineForm {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (*v, c.mul(k)))
                .collect(),
            constant: self.constant.mul(k),
        }
    }

    pub fn neg(&self) -> AffineForm {
        self.scale(&Coef::from_int(-1))
    }
}

/// Decompose a symbolic term as an affine combination of atoms, or report
/// that it is not affine. Products need a constant side; square roots need a
/// constant, nonnegative argument.
pub fn extract_affine(e: &SymExpr) -> Option<AffineForm> {
    match e {
        SymExpr::Const(c) => Some(AffineForm::constant(Coef::Rat(c.clone()))),
        SymExpr::Var(x) => Some(AffineForm::atom(AtomVar::Var(*x))),
        SymExpr::Sample(Dist::Uniform, k) => Some(AffineForm::atom(AtomVar::Uni(*k))),
        SymExpr::Sample(Dist::StdNormal, k) => Some(AffineForm::atom(AtomVar::Nrm(*k))),
        SymExpr::Bin(op, a, b) => {
            let fa = extract_affine(a)?;
            let fb = extract_affine(b)?;
            match op {
                Op::Add => Some(fa.add(&fb)),
                Op::Sub => Some(fa.sub(&fb)),
                Op::Mul => {
                    if let Some(c) = fb.as_constant() {
                        Some(fa.scale(&c))
                    } else {
                        fa.as_constant().map(|c| fb.scale(&c))
                    }
                }
            }
        }
        SymExpr::Neg(a) => Some(extract_affine(a)?.neg()),
        SymExpr::Sqrt(a) => {
            let inner = extract_affine(a)?.as_constant()?;
            inner.sqrt().map(AffineForm::constant)
        }
    }
}
