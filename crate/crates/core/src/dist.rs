use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::{INPUT_PROB_TOL, PROB_TOL};

/// A categorical distribution over `0..len`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Categorical {
    probs: Vec<f64>,
}

impl Categorical {
    /// Accepts `probs` if it is non-empty, non-negative and sums to one within [`PROB_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_row("distribution", &probs, PROB_TOL)?;
        Ok(Self { probs })
    }

    /// Accepts rows within [`INPUT_PROB_TOL`] of normalization. Rows off by
    /// more than [`PROB_TOL`] are renormalized; others are kept bit-for-bit.
    pub fn from_input(what: &str, probs: Vec<f64>) -> Result<Self> {
        Ok(Self {
            probs: normalize_input(what, probs)?,
        })
    }

    /// Normalizes non-negative weights. Fails if they sum to zero.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
        if weights.is_empty() || !(sum > 0.0) || !sum.is_finite() || min < 0.0 {
            return Err(Error::NotADistribution {
                what: "weights".into(),
                sum,
                min,
            });
        }
        for w in weights.iter_mut() {
            *w /= sum;
        }
        Ok(Self { probs: weights })
    }

    pub fn dirac(len: usize, at: usize) -> Self {
        let mut probs = alloc::vec![0.0; len];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            probs: alloc::vec![1.0 / len as f64; len],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn entropy(&self) -> f64 {
        math::entropy(&self.probs)
    }

    /// Inverse-CDF sample from a uniform draw `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        sample_row(&self.probs, u)
    }

    /// Total variation distance `0.5 * sum |p - q|`.
    pub fn total_variation(&self, other: &Self) -> f64 {
        total_variation(&self.probs, &other.probs)
    }
}

/// Inverse-CDF sampling over a probability row; zero-mass entries are never returned.
pub fn sample_row(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Total variation distance between two rows of equal length.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub(crate) fn normalize_input(what: &str, mut row: Vec<f64>) -> Result<Vec<f64>> {
    check_row(what, &row, INPUT_PROB_TOL)?;
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        for p in row.iter_mut() {
            *p /= sum;
        }
    }
    Ok(row)
}

pub(crate) fn check_row(what: &str, row: &[f64], tol: f64) -> Result<()> {
    let sum: f64 = row.iter().sum();
    let min = row.iter().copied().fold(f64::INFINITY, f64::min);
    if row.is_empty() || min < 0.0 || !min.is_finite() || !((sum - 1.0).abs() <= tol) {
        return Err(Error::NotADistribution {
            what: what.into(),
            sum,
            min,
        });
    }
    Ok(())
}

/// An exact joint distribution over state trajectories of fixed length.
///
/// Trajectory `k` is the mixed-radix decoding of `k` in base `n_states`, with
/// the earliest time step as the most significant digit. Enumeration order is
/// therefore lexicographic.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDist {
    n_states: usize,
    steps: usize,
    probs: Vec<f64>,
}

impl TrajectoryDist {
    pub(crate) fn from_parts(n_states: usize, steps: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len() as u128, crate::saturating_pow(n_states, steps));
        Self {
            n_states,
            steps,
            probs,
        }
    }

    /// Builds a joint from explicit probabilities; they must sum to one.
    pub fn new(n_states: usize, steps: usize, probs: Vec<f64>) -> Result<Self> {
        let expected = crate::saturating_pow(n_states, steps);
        if probs.len() as u128 != expected {
            return Err(Error::dims("trajectory joint", expected as usize, probs.len()));
        }
        check_row("trajectory joint", &probs, 1e-10)?;
        Ok(Self::from_parts(n_states, steps, probs))
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Number of time steps in each trajectory.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        decode(index, self.n_states, self.steps)
    }

    pub fn encode(&self, traj: &[usize]) -> usize {
        traj.iter().fold(0, |acc, &s| acc * self.n_states + s)
    }

    pub fn prob_of(&self, traj: &[usize]) -> f64 {
        self.probs[self.encode(traj)]
    }

    /// Iterates `(trajectory, probability)` over trajectories with positive mass.
    pub fn support(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(k, &p)| (self.decode(k), p))
    }

    pub fn entropy(&self) -> f64 {
        math::entropy(&self.probs)
    }

    /// Marginal at step `k` (0-based within the trajectory).
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.n_states];
        let stride = crate::saturating_pow(self.n_states, self.steps - 1 - k) as usize;
        for (idx, &p) in self.probs.iter().enumerate() {
            out[(idx / stride) % self.n_states] += p;
        }
        out
    }

    /// Sum of marginal entropies minus joint entropy (total correlation).
    pub fn multi_information(&self) -> f64 {
        let marg: f64 = (0..self.steps)
            .map(|k| math::entropy(&self.marginal(k)))
            .sum();
        marg - self.entropy()
    }
}

pub(crate) fn decode(mut index: usize, n_states: usize, steps: usize) -> Vec<usize> {
    let mut out = alloc::vec![0; steps];
    for slot in out.iter_mut().rev() {
        *slot = index % n_states;
        index /= n_states;
    }
    out
}
