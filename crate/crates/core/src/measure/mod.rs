//! Path-mass quantification.
//!
//! Every explored path carries a set-description of the runs that follow it
//! (its condition and observation atoms over the program inputs and sample
//! streams). This module turns those descriptions into numbers: a
//! closed-form lane for separable formulas, a Monte Carlo fallback for the
//! rest, and on top of both the per-program sums, the truncation bound from
//! unroll-exhausted paths, and posterior ratios.

use alloc::vec::Vec;

use crate::concrete::VarMeasure;
use crate::interp::{Substitution, SymBool, SymExpr};
use crate::math;
use crate::rat::{self, Rat};
use crate::symexec::{explore, EngineError, ExploreParams, PathOutcome, PathStatus};
use crate::syntax::{BoolExpr, Program, VarId};

pub mod discrete;
mod exact;
mod mc;

/// How a mass value was obtained.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Method {
    /// Closed form: exact interval/cell arithmetic, with normal-CDF factors
    /// evaluated in floating point.
    Exact,
    MonteCarlo,
}

/// Caveat attached to a mass value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum MassWarning {
    /// An equality constraint on a continuous quantity: such an atom
    /// contributes probability zero.
    ContinuousEquality,
}

impl core::fmt::Display for MassWarning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MassWarning::ContinuousEquality => {
                f.write_str("equality on a continuous quantity has probability zero")
            }
        }
    }
}

/// A probability mass with provenance: how it was computed, its sampling
/// error if any, and the exact rational value when the whole computation
/// stayed in the rationals.
#[derive(Clone, PartialEq, Debug)]
pub struct MassEstimate {
    pub value: f64,
    pub method: Method,
    /// Zero for the closed-form lane.
    pub stderr: f64,
    /// Monte Carlo trials consumed (zero for the closed-form lane).
    pub samples_used: u64,
    pub exact_value: Option<Rat>,
    pub warnings: Vec<MassWarning>,
}

impl MassEstimate {
    /// Additive identity for summing path masses.
    fn zero_sum() -> MassEstimate {
        MassEstimate {
            value: 0.0,
            method: Method::Exact,
            stderr: 0.0,
            samples_used: 0,
            exact_value: Some(rat::rat_int(0)),
            warnings: Vec::new(),
        }
    }

    /// Add another estimate (independent, so standard errors combine in
    /// quadrature). Exactness survives only if both sides are exact.
    fn accumulate(&mut self, other: &MassEstimate) {
        self.value += other.value;
        self.stderr = math::sqrt(self.stderr * self.stderr + other.stderr * other.stderr);
        self.samples_used += other.samples_used;
        if other.method == Method::MonteCarlo {
            self.method = Method::MonteCarlo;
        }
        self.exact_value = match (self.exact_value.take(), &other.exact_value) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        for w in &other.warnings {
            if !self.warnings.contains(w) {
                self.warnings.push(*w);
            }
        }
    }

    /// Recompute the double from the exact sum, when there is one.
    fn settle(mut self) -> MassEstimate {
        if let Some(r) = &self.exact_value {
            self.value = rat::to_f64(r);
        }
        self
    }
}

/// Monte Carlo budget.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct McParams {
    pub trials: u64,
    pub seed: u64,
}

impl Default for McParams {
    fn default() -> McParams {
        McParams {
            trials: 100_000,
            seed: 0,
        }
    }
}

/// Budgets for quantification: exploration bounds plus the Monte Carlo
/// fallback budget.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct QuantParams {
    pub explore: ExploreParams,
    pub mc: McParams,
}

/// Mass of the conjunction of `atoms` under the product of the input
/// measure `mu` (one entry per program variable) and the sample-stream
/// measures: closed form when separable, Monte Carlo otherwise.
pub fn path_mass(atoms: &[SymBool], mu: &[VarMeasure], mc: &McParams) -> MassEstimate {
    let pinned = pin_points(atoms, mu);
    let atoms = pinned.as_deref().unwrap_or(atoms);
    match exact::separable_mass(atoms, mu) {
        Some(est) => est,
        None => mc::mc_mass(atoms, mu, mc),
    }
}

/// Replace variables carrying a point measure by their exactly embedded
/// value. Under `mu` such a variable is that constant, and folding it in up
/// front keeps atoms that mention it nonlinearly inside the closed-form
/// lane's affine fragment. Returns `None` when nothing is pinned.
fn pin_points(atoms: &[SymBool], mu: &[VarMeasure]) -> Option<Vec<SymBool>> {
    let mut sub = Substitution::identity(mu.len());
    let mut any = false;
    for (i, m) in mu.iter().enumerate() {
        if let VarMeasure::Point(v) = m {
            if let Some(r) = rat::from_f64_exact(*v) {
                sub.set(VarId(i as u32), SymExpr::Const(r));
                any = true;
            }
        }
    }
    any.then(|| atoms.iter().map(|a| sub.apply_sym_bool(a)).collect())
}

/// One explored path with its quantified masses.
#[derive(Clone, PartialEq, Debug)]
pub struct PathMassReport {
    pub outcome: PathOutcome,
    /// Mass of the path condition alone: the prior probability of taking
    /// this path.
    pub prior: MassEstimate,
    /// Mass of condition and observations together: this path's
    /// contribution to the evidence.
    pub joint: MassEstimate,
    /// Mass of condition, observations, and the pulled-back event. Equals
    /// `joint` when no event was given.
    pub event: MassEstimate,
}

/// Program-level quantification result.
#[derive(Clone, PartialEq, Debug)]
pub struct QuantReport {
    /// Sum over final paths of the event-lane mass: the unnormalized
    /// probability of "terminates, passes all observes, satisfies the
    /// event".
    pub event_total: MassEstimate,
    /// Sum over final paths of the joint mass (the event taken as `true`).
    pub evidence_total: MassEstimate,
    /// Sum of joint masses of unroll-exhausted paths: an upper bound on
    /// what the cut loops can still carry. Not part of the totals above.
    pub truncation_bound: MassEstimate,
    pub paths: Vec<PathMassReport>,
}

/// Quantification failure.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MeasureError {
    /// The evidence is zero; no posterior exists.
    ZeroEvidence,
    Engine(EngineError),
}

impl core::fmt::Display for MeasureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MeasureError::ZeroEvidence => {
                f.write_str("evidence has probability zero; no posterior exists")
            }
            MeasureError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MeasureError {}

impl From<EngineError> for MeasureError {
    fn from(e: EngineError) -> MeasureError {
        MeasureError::Engine(e)
    }
}

/// Explore all paths of `p` and quantify each one: prior, joint, and (when
/// `event` is given) the event-restricted mass, pulled back through the
/// path's substitution. Returns the per-path reports and the three sums.
pub fn quantify(
    p: &Program,
    mu: &[VarMeasure],
    event: Option<&BoolExpr>,
    params: &QuantParams,
) -> Result<QuantReport, EngineError> {
    assert_eq!(mu.len(), p.n(), "one input measure per program variable");
    let outcomes = explore(p, &params.explore)?;
    let mut paths = Vec::with_capacity(outcomes.len());
    let mut event_total = MassEstimate::zero_sum();
    let mut evidence_total = MassEstimate::zero_sum();
    let mut truncation_bound = MassEstimate::zero_sum();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        // Each lane of each path samples independently.
        let lane = |tag: u64| McParams {
            trials: params.mc.trials,
            seed: math::derive_seed(params.mc.seed, tag, i as u64),
        };
        let cfg = &outcome.cfg;
        let prior = path_mass(&cfg.pc, mu, &lane(4));
        let mut joint_atoms = cfg.pc.clone();
        joint_atoms.extend(cfg.po.iter().cloned());
        let joint = path_mass(&joint_atoms, mu, &lane(5));
        let event_mass = match event {
            Some(a) if outcome.status == PathStatus::Final => {
                joint_atoms.push(cfg.sub.apply_bool(a));
                path_mass(&joint_atoms, mu, &lane(6))
            }
            _ => joint.clone(),
        };
        match outcome.status {
            PathStatus::Final => {
                evidence_total.accumulate(&joint);
                event_total.accumulate(&event_mass);
            }
            PathStatus::UnrollExhausted => truncation_bound.accumulate(&joint),
        }
        paths.push(PathMassReport {
            outcome,
            prior,
            joint,
            event: event_mass,
        });
    }
    Ok(QuantReport {
        event_total: event_total.settle(),
        evidence_total: evidence_total.settle(),
        truncation_bound: truncation_bound.settle(),
        paths,
    })
}

/// Normalized ratio of two mass sums, with the standard error propagated by
/// the delta method when sampling was involved. Exact when both sides are.
pub fn ratio(numer: &MassEstimate, denom: &MassEstimate) -> Result<MassEstimate, MeasureError> {
    if denom.value <= 0.0 {
        return Err(MeasureError::ZeroEvidence);
    }
    let mut warnings = numer.warnings.clone();
    for w in &denom.warnings {
        if !warnings.contains(w) {
            warnings.push(*w);
        }
    }
    if let (Some(q), Some(e)) = (&numer.exact_value, &denom.exact_value) {
        let r = q / e;
        return Ok(MassEstimate {
            value: rat::to_f64(&r),
            method: Method::Exact,
            stderr: 0.0,
            samples_used: numer.samples_used + denom.samples_used,
            exact_value: Some(r),
            warnings,
        });
    }
    let r = numer.value / denom.value;
    let stderr = math::sqrt(
        numer.stderr * numer.stderr + r * r * denom.stderr * denom.stderr,
    ) / denom.value;
    let method = if numer.method == Method::Exact && denom.method == Method::Exact {
        Method::Exact
    } else {
        Method::MonteCarlo
    };
    Ok(MassEstimate {
        value: r.clamp(0.0, 1.0),
        method,
        stderr,
        samples_used: numer.samples_used + denom.samples_used,
        exact_value: None,
        warnings,
    })
}

/// A posterior with the quantification it came from.
#[derive(Clone, PartialEq, Debug)]
pub struct PosteriorReport {
    pub posterior: MassEstimate,
    pub quant: QuantReport,
}

/// Posterior probability of `event` given that the program terminates and
/// passes its observations: the ratio of the event sum to the evidence sum.
pub fn posterior(
    p: &Program,
    mu: &[VarMeasure],
    event: &BoolExpr,
    params: &QuantParams,
) -> Result<PosteriorReport, MeasureError> {
    let quant = quantify(p, mu, Some(event), params)?;
    let posterior = ratio(&quant.event_total, &quant.evidence_total)?;
    Ok(PosteriorReport { posterior, quant })
}
