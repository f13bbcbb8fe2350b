//! Likelihood learning runs and their metrics.

use efe_core::learning::{column_tv, expected_likelihood, learn_likelihood, mean_column_entropy, median, DirichletPrior};
use efe_core::{FinitePomdp, RawModel};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::csv_with_schema;

pub const LEARN_SCHEMA: &str = "efe-planner learn v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningMetric {
    pub episode: usize,
    /// Median over states of the total variation to the true observation distribution.
    pub tv_distance_to_truth: f64,
    pub mean_column_entropy: f64,
}

/// The input model with its likelihood replaced by the learned estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedModel {
    #[serde(flatten)]
    pub model: RawModel,
    /// Final concentrations, `[obs][state]`.
    pub dirichlet: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutcome {
    pub learned: LearnedModel,
    pub metrics: Vec<LearningMetric>,
}

impl LearnOutcome {
    pub fn metrics_csv(&self) -> Result<String> {
        csv_with_schema(LEARN_SCHEMA, &self.metrics)
    }
}

/// Episodes `1, 10, 100, ...` and the final one.
fn is_checkpoint(k: usize, total: usize) -> bool {
    let mut d = 1;
    while d < k {
        d *= 10;
    }
    d == k || k == total
}

fn metric(episode: usize, prior: &DirichletPrior, truth: &[Vec<f64>]) -> efe_core::Result<LearningMetric> {
    let estimate = expected_likelihood(prior)?;
    Ok(LearningMetric {
        episode,
        tv_distance_to_truth: median(&column_tv(&estimate, truth)),
        mean_column_entropy: mean_column_entropy(&estimate),
    })
}

/// Learns the likelihood of `truth` from a flat prior, recording metrics at
/// episode 0, every power of ten, and the final episode.
pub fn run_learn(truth: &FinitePomdp, concentration: f64, episodes: usize, seed: u64) -> Result<LearnOutcome> {
    let target: Vec<Vec<f64>> = (0..truth.n_states()).map(|s| truth.likelihood_row(s).to_vec()).collect();
    let prior = DirichletPrior::uniform(truth.n_obs(), truth.n_states(), concentration)?;
    let mut metrics = vec![metric(0, &prior, &target)?];
    let posterior = learn_likelihood(truth, prior, episodes, seed, |k, current| {
        if is_checkpoint(k, episodes) {
            metrics.push(metric(k, current, &target)?);
        }
        Ok(())
    })?;
    let model = truth.with_likelihood(expected_likelihood(&posterior)?)?.to_raw();
    Ok(LearnOutcome {
        learned: LearnedModel {
            model,
            dirichlet: posterior.into_counts(),
        },
        metrics,
    })
}
