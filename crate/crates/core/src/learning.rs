//! Likelihood learning by Dirichlet accumulation.
//!
//! Concentrations are stored `[obs][state]`; a column is the vector of counts
//! for one hidden state. Episodes are folded in once each, after inference
//! with the exact smoothed posterior.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::model::FinitePomdp;
use crate::pomdp::{exact_posterior, BeliefState};
use crate::rollout::rollout_pomdp;

/// Dirichlet concentration parameters over the observation likelihood.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DirichletPrior {
    /// `a[o][s]`.
    a: Vec<Vec<f64>>,
}

impl DirichletPrior {
    pub fn new(a: Vec<Vec<f64>>) -> Result<Self> {
        check_matrix(&a)?;
        for s in 0..a[0].len() {
            if !a.iter().any(|row| row[s] > 0.0) {
                return Err(Error::ZeroColumn { state: s });
            }
        }
        Ok(Self { a })
    }

    /// Every entry equal to `concentration`.
    pub fn uniform(n_obs: usize, n_states: usize, concentration: f64) -> Result<Self> {
        if !(concentration > 0.0 && concentration.is_finite()) {
            return Err(Error::OutOfRange {
                param: "prior concentration",
                value: concentration,
            });
        }
        Self::new(alloc::vec![alloc::vec![concentration; n_states]; n_obs])
    }

    pub fn n_obs(&self) -> usize {
        self.a.len()
    }

    pub fn n_states(&self) -> usize {
        self.a[0].len()
    }

    pub fn get(&self, obs: usize, state: usize) -> f64 {
        self.a[obs][state]
    }

    pub fn counts(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn into_counts(self) -> Vec<Vec<f64>> {
        self.a
    }

    pub fn total_mass(&self) -> f64 {
        self.a.iter().flatten().sum()
    }

    /// Mass in the column of `state`.
    pub fn column_mass(&self, state: usize) -> f64 {
        self.a.iter().map(|row| row[state]).sum()
    }
}

fn check_matrix(a: &[Vec<f64>]) -> Result<()> {
    let Some(first) = a.first() else {
        return Err(Error::dims("concentration rows", 1, 0));
    };
    if first.is_empty() {
        return Err(Error::dims("concentration columns", 1, 0));
    }
    for row in a {
        if row.len() != first.len() {
            return Err(Error::dims("concentration columns", first.len(), row.len()));
        }
        for &x in row {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::OutOfRange {
                    param: "concentration",
                    value: x,
                });
            }
        }
    }
    Ok(())
}

fn accumulate(a: &mut [Vec<f64>], observations: &[usize], posteriors: &[BeliefState]) -> Result<()> {
    if observations.len() != posteriors.len() {
        return Err(Error::len("state posteriors", observations.len(), posteriors.len()));
    }
    let n_states = a[0].len();
    for (&o, q) in observations.iter().zip(posteriors) {
        if o >= a.len() {
            return Err(Error::IndexOutOfRange {
                what: "observation",
                index: o,
                bound: a.len(),
            });
        }
        if q.probs.len() != n_states {
            return Err(Error::dims("state posterior", n_states, q.probs.len()));
        }
        for (slot, &p) in a[o].iter_mut().zip(&q.probs) {
            *slot += p;
        }
    }
    Ok(())
}

/// `a + sum_tau onehot(o_tau) (x) Q(s_tau | o_0..o_T)`.
pub fn dirichlet_update(
    prior: &DirichletPrior,
    observations: &[usize],
    posteriors: &[BeliefState],
) -> Result<DirichletPrior> {
    let mut a = prior.a.clone();
    accumulate(&mut a, observations, posteriors)?;
    Ok(DirichletPrior { a })
}

/// Same increments on a raw `[obs][state]` count matrix (zeros allowed).
pub fn count_update(counts: &[Vec<f64>], observations: &[usize], posteriors: &[BeliefState]) -> Result<Vec<Vec<f64>>> {
    check_matrix(counts)?;
    let mut a = counts.to_vec();
    accumulate(&mut a, observations, posteriors)?;
    Ok(a)
}

/// Column-normalizes an `[obs][state]` matrix into a `[state][obs]` likelihood.
pub fn normalize_columns(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    check_matrix(a)?;
    let n_states = a[0].len();
    (0..n_states)
        .map(|s| {
            let z: f64 = a.iter().map(|row| row[s]).sum();
            if !(z > 0.0) {
                return Err(Error::ZeroColumn { state: s });
            }
            Ok(a.iter().map(|row| row[s] / z).collect())
        })
        .collect()
}

/// Dirichlet mean `a[o][s] / sum_o a[o][s]`, returned as `[state][obs]`.
pub fn expected_likelihood(prior: &DirichletPrior) -> Result<Vec<Vec<f64>>> {
    normalize_columns(&prior.a)
}

/// Total variation per state between two `[state][obs]` likelihoods.
pub fn column_tv(estimate: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<f64> {
    estimate
        .iter()
        .zip(truth)
        .map(|(e, t)| crate::dist::total_variation(e, t))
        .collect()
}

/// Mean entropy of the per-state observation distributions.
pub fn mean_column_entropy(likelihood: &[Vec<f64>]) -> f64 {
    likelihood.iter().map(|row| math::entropy(row)).sum::<f64>() / likelihood.len() as f64
}

/// Median of a non-empty slice (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Samples `episodes` episodes from `truth` under a uniformly random
/// admissible policy and folds each one into the prior. `on_episode(k, prior)`
/// runs after episode `k` (1-based).
pub fn learn_likelihood<F>(
    truth: &FinitePomdp,
    prior: DirichletPrior,
    episodes: usize,
    seed: u64,
    mut on_episode: F,
) -> Result<DirichletPrior>
where
    F: FnMut(usize, &DirichletPrior) -> Result<()>,
{
    if prior.n_obs() != truth.n_obs() || prior.n_states() != truth.n_states() {
        return Err(Error::dims("prior", truth.n_obs() * truth.n_states(), prior.n_obs() * prior.n_states()));
    }
    let mdp = truth.mdp();
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut current = prior;
    for k in 1..=episodes {
        let episode_seed: u64 = master.random();
        let mut agent_rng = ChaCha8Rng::seed_from_u64(master.random());
        let episode = rollout_pomdp(
            truth,
            |ctx| {
                // admissible in every state consistent with the history
                let post = exact_posterior(truth, ctx.actions, ctx.observations)?;
                let allowed: Vec<usize> = (0..mdp.n_actions())
                    .filter(|&a| post.current().support().all(|s| mdp.is_allowed(s, a)))
                    .collect();
                Ok(allowed[agent_rng.random_range(0..allowed.len())])
            },
            episode_seed,
        )?;
        let observations = episode.observations.as_deref().unwrap_or_default();
        let post = exact_posterior(truth, &episode.actions, observations)?;
        current = dirichlet_update(&current, observations, &post.smoothed)?;
        on_episode(k, &current)?;
    }
    Ok(current)
}
