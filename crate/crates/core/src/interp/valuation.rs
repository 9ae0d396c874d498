//! Valuations: program-variable values plus two lazily drawn sample streams.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eval_sym_expr, DomainError, Substitution};
use crate::math;

/// A point of the semantic state space: `n` variable values and one infinite
/// stream per primitive distribution, realized lazily. Entries are drawn
/// once and never change, so a clone taken at any moment sees the same
/// stream forever after (both copies extend identically).
#[derive(Clone, Debug)]
pub struct Valuation {
    pub vars: Vec<f64>,
    uni: Vec<f64>,
    nrm: Vec<f64>,
    rng_uni: ChaCha8Rng,
    rng_nrm: ChaCha8Rng,
}

impl Valuation {
    /// Fresh valuation; the streams are determined by `seed`.
    pub fn new(vars: Vec<f64>, seed: u64) -> Valuation {
        Valuation::with_prefixes(vars, Vec::new(), Vec::new(), seed)
    }

    /// Valuation with fixed stream prefixes; draws past the prefixes are
    /// determined by `seed`. Lets tests pin the entries a run will read.
    pub fn with_prefixes(vars: Vec<f64>, uni: Vec<f64>, nrm: Vec<f64>, seed: u64) -> Valuation {
        let mut rng_uni = ChaCha8Rng::seed_from_u64(seed);
        rng_uni.set_stream(0);
        let mut rng_nrm = ChaCha8Rng::seed_from_u64(seed);
        rng_nrm.set_stream(1);
        Valuation {
            vars,
            uni,
            nrm,
            rng_uni,
            rng_nrm,
        }
    }

    /// The k-th uniform draw, in `[0, 1)`.
    pub fn uni(&mut self, k: u32) -> f64 {
        while self.uni.len() <= k as usize {
            let bits = self.rng_uni.next_u64();
            self.uni.push(math::bits_to_unit(bits));
        }
        self.uni[k as usize]
    }

    /// The k-th standard normal draw (inverse-CDF transform of a uniform).
    pub fn nrm(&mut self, k: u32) -> f64 {
        while self.nrm.len() <= k as usize {
            let bits = self.rng_nrm.next_u64();
            self.nrm.push(math::normal_inv_cdf(math::bits_to_open_unit(bits)));
        }
        self.nrm[k as usize]
    }

    /// Drop the first `k_y` uniform and `k_z` normal entries: the result's
    /// stream `j` equals this one's `j + k`. The underlying generators are
    /// shared by state, so the equality extends to entries not yet drawn.
    pub fn shifted(&mut self, k_y: u32, k_z: u32) -> Valuation {
        if k_y > 0 {
            self.uni(k_y - 1);
        }
        if k_z > 0 {
            self.nrm(k_z - 1);
        }
        Valuation {
            vars: self.vars.clone(),
            uni: self.uni[k_y as usize..].to_vec(),
            nrm: self.nrm[k_z as usize..].to_vec(),
            rng_uni: self.rng_uni.clone(),
            rng_nrm: self.rng_nrm.clone(),
        }
    }

    /// Materialized uniform prefix (for tests).
    pub fn uni_prefix(&self) -> &[f64] {
        &self.uni
    }

    /// Materialized normal prefix (for tests).
    pub fn nrm_prefix(&self) -> &[f64] {
        &self.nrm
    }
}

/// Interpret a substitution at sampling indices `(k_y, k_z)` as a state
/// transformer: variable `i` of the result is the value of `sub`'s term for
/// `i` at `rho`, and the streams are left-shifted by `k_y` and `k_z`.
pub fn interpret_subst(
    sub: &Substitution,
    k_y: u32,
    k_z: u32,
    rho: &mut Valuation,
) -> Result<Valuation, DomainError> {
    let mut vars = Vec::with_capacity(sub.n());
    for term in sub.terms() {
        vars.push(eval_sym_expr(term, rho)?);
    }
    let mut out = rho.shifted(k_y, k_z);
    out.vars = vars;
    Ok(out)
}
