//! Seeded episode sampling.
//!
//! The generator is ChaCha8 seeded from a `u64`, so an episode is a pure
//! function of (model, agent, seed).

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::sample_row;
use crate::error::{Error, Result};
use crate::model::{Episode, FiniteMdp, FinitePomdp};

/// What a partially observing agent sees when asked to act at time `t`.
#[derive(Debug, Clone, Copy)]
pub struct ObservationContext<'a> {
    pub time: usize,
    /// `o_0 .. o_t`
    pub observations: &'a [usize],
    /// `a_0 .. a_{t-1}`
    pub actions: &'a [usize],
}

fn check_agent_action(mdp: &FiniteMdp, time: usize, state: usize, action: usize) -> Result<()> {
    if action >= mdp.n_actions() || !mdp.is_allowed(state, action) {
        return Err(Error::AgentOutOfRange { time, action });
    }
    Ok(())
}

/// Samples one episode of a fully observed model. `agent(t, s)` returns the action.
pub fn rollout_mdp<F>(mdp: &FiniteMdp, mut agent: F, seed: u64) -> Result<Episode>
where
    F: FnMut(usize, usize) -> Result<usize>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_max = mdp.horizon();
    let mut states = Vec::with_capacity(t_max + 1);
    let mut actions = Vec::with_capacity(t_max);
    let mut rewards = Vec::with_capacity(t_max);
    let mut s = mdp.initial().sample_with(rng.random::<f64>());
    states.push(s);
    for t in 0..t_max {
        let a = agent(t, s)?;
        check_agent_action(mdp, t, s, a)?;
        s = sample_row(mdp.transition_row(a, s), rng.random::<f64>());
        actions.push(a);
        states.push(s);
        rewards.push(mdp.reward()[s]);
    }
    Ok(Episode {
        states,
        actions,
        observations: None,
        rewards,
    })
}

/// Samples one episode of a partially observed model. The agent only sees
/// the observation and action history; admissibility is checked against the
/// true hidden state.
pub fn rollout_pomdp<F>(pomdp: &FinitePomdp, mut agent: F, seed: u64) -> Result<Episode>
where
    F: FnMut(ObservationContext<'_>) -> Result<usize>,
{
    let mdp = pomdp.mdp();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_max = mdp.horizon();
    let mut states = Vec::with_capacity(t_max + 1);
    let mut observations = Vec::with_capacity(t_max + 1);
    let mut actions = Vec::with_capacity(t_max);
    let mut rewards = Vec::with_capacity(t_max);
    let mut s = mdp.initial().sample_with(rng.random::<f64>());
    states.push(s);
    observations.push(sample_row(pomdp.likelihood_row(s), rng.random::<f64>()));
    for t in 0..t_max {
        let a = agent(ObservationContext {
            time: t,
            observations: &observations,
            actions: &actions,
        })?;
        check_agent_action(mdp, t, s, a)?;
        s = sample_row(mdp.transition_row(a, s), rng.random::<f64>());
        actions.push(a);
        states.push(s);
        observations.push(sample_row(pomdp.likelihood_row(s), rng.random::<f64>()));
        rewards.push(mdp.reward()[s]);
    }
    Ok(Episode {
        states,
        actions,
        observations: Some(observations),
        rewards,
    })
}
