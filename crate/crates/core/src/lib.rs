//! Exact finite-horizon planning on discrete MDPs and POMDPs.
//!
//! The crate implements classical backward induction next to the standard
//! and sophisticated active-inference planners, so that the two families can
//! be compared state by state. Everything here is pure computation over
//! immutable models: no IO, no threads, `alloc` only.
//!
//! Layout:
//!
//! - [`model`]: validated generative models, policies, trajectories.
//! - [`rollout`]: seeded episode sampling around a planner callback.
//! - [`dp`]: policy evaluation, the policy partial order, backward induction
//!   and a brute-force optimality oracle.
//! - [`aif`]: preferences, expected free energy, standard and sophisticated
//!   planners for fully observed models.
//! - [`pomdp`]: exact state inference, variational free energy, risk plus
//!   ambiguity, and belief-space planners.
//! - [`learning`]: Dirichlet accumulation of the observation likelihood.
//! - [`envs`]: seeded benchmark generators.
#![no_std]
#![deny(unused_must_use, rust_2018_idioms)]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod aif;
pub mod dist;
pub mod dp;
pub mod envs;
pub mod error;
pub mod learning;
pub mod math;
pub mod model;
pub mod pomdp;
pub mod rollout;

pub use dist::{Categorical, TrajectoryDist};
pub use error::{Error, Result};
pub use model::{
    ActionSequence, Episode, FiniteMdp, FinitePomdp, Labels, RawModel, StateActionPolicy,
};

/// Input tolerance on probability rows before renormalization.
pub const INPUT_PROB_TOL: f64 = 1e-9;
/// Tolerance on probability rows after internal renormalization.
pub const PROB_TOL: f64 = 1e-12;
/// Default absolute tolerance for argmax/argmin tie sets.
pub const TIE_TOL: f64 = 1e-9;

/// Maximum number of explicit trajectories any exact joint may enumerate.
pub const MAX_TRAJECTORIES: u128 = 10_000_000;
/// Maximum number of deterministic policies the brute-force oracle enumerates.
pub const MAX_POLICIES: u128 = 10_000_000;

/// Enumeration limits that callers may tune (exposed on the command line).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Guards {
    /// Upper bound on the number of action sequences a standard planner enumerates.
    pub sequences: u128,
    /// Upper bound on belief-tree size `|S| (|A| |O|)^depth` for the sophisticated POMDP planner.
    pub tree: u128,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            sequences: 1_000_000,
            tree: 10_000_000,
        }
    }
}

/// `base^exp` saturating at `u128::MAX`, used for guard checks.
pub(crate) fn saturating_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}
