//! Monte Carlo mass of a path formula.

use alloc::vec::Vec;

use crate::concrete::{draw_vars, VarMeasure};
use crate::interp::{eval_sym_bool, SymBool, Valuation};
use crate::math;

use super::{MassEstimate, McParams, Method};

/// Estimate the mass of the conjunction of `atoms` by sampling fresh
/// valuations. A trial whose evaluation hits a domain error counts as
/// outside the set, matching the simulator, which never scores such runs.
pub(super) fn mc_mass(atoms: &[SymBool], mu: &[VarMeasure], params: &McParams) -> MassEstimate {
    let trials = params.trials.max(1);
    let mut hits = 0u64;
    for trial in 0..trials {
        let trial_seed = math::derive_seed(params.seed, 2, trial);
        let mut rho = Valuation::new(draw_vars(mu, trial_seed), trial_seed);
        if atoms
            .iter()
            .all(|a| matches!(eval_sym_bool(a, &mut rho), Ok(true)))
        {
            hits += 1;
        }
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    MassEstimate {
        value: p,
        method: Method::MonteCarlo,
        stderr: math::sqrt(p * (1.0 - p) / n),
        samples_used: trials,
        exact_value: None,
        warnings: Vec::new(),
    }
}
