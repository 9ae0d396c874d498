//! Core engine for symbolic execution and path quantification of a small
//! imperative probabilistic language.
//!
//! The language has real-valued variables, `x ~ rnd` (uniform on `[0,1]`) and
//! `x ~ stdnorm` (standard normal) sampling, Boolean `observe` statements,
//! and the usual sequencing, branching, and looping. Bernoulli and general
//! normal sampling are surface sugar that [`syntax::desugar`] removes.
//!
//! A symbolic run of a program yields one configuration per control-flow
//! path: a substitution mapping every program variable to a term over the
//! inputs and the sampled values, two sample counters, a path condition, and
//! a path observation. [`symexec`] produces these configurations, [`interp`]
//! gives them meaning as functions of a concrete input valuation, and
//! [`measure`] turns them into path probabilities, either in closed form or
//! by Monte Carlo estimation.
//!
//! The crate is `no_std` (with `alloc`); everything that needs an operating
//! system (processes, files, clocks) lives in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod affine;
pub mod concrete;
pub mod gen;
pub mod interp;
pub mod math;
pub mod measure;
pub mod rat;
pub mod symexec;
pub mod syntax;
