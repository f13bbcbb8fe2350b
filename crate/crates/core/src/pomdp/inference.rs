use alloc::vec::Vec;

use crate::dist::TrajectoryDist;
use crate::error::{Error, Result};
use crate::math;
use crate::model::FinitePomdp;
use crate::{saturating_pow, MAX_TRAJECTORIES};

/// Belief over the hidden state at a given time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BeliefState {
    pub time: usize,
    pub probs: Vec<f64>,
}

impl BeliefState {
    pub fn new(time: usize, probs: Vec<f64>) -> Self {
        Self { time, probs }
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + Clone + '_ {
        self.probs.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(s, _)| s)
    }

    pub fn entropy(&self) -> f64 {
        math::entropy(&self.probs)
    }
}

/// Exact posterior quantities given `o_0..o_t` and `a_0..a_{t-1}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PosteriorBundle {
    /// `P(s_tau | o_0..o_tau)`.
    pub filtered: Vec<BeliefState>,
    /// `P(s_tau | o_0..o_t)`.
    pub smoothed: Vec<BeliefState>,
    /// `ln P(o_0..o_t | a_0..a_{t-1})`.
    pub log_evidence: f64,
}

impl PosteriorBundle {
    pub fn time(&self) -> usize {
        self.filtered.len() - 1
    }

    /// Filtered belief at the latest time.
    pub fn current(&self) -> &BeliefState {
        self.filtered.last().unwrap()
    }
}

fn check_history(pomdp: &FinitePomdp, actions: &[usize], observations: &[usize]) -> Result<()> {
    if observations.is_empty() {
        return Err(Error::len("observations", actions.len() + 1, 0));
    }
    if observations.len() != actions.len() + 1 {
        return Err(Error::len("observations", actions.len() + 1, observations.len()));
    }
    if actions.len() > pomdp.horizon() {
        return Err(Error::TimeOutOfRange {
            time: actions.len(),
            horizon: pomdp.horizon(),
        });
    }
    for &a in actions {
        pomdp.mdp().check_action(a)?;
    }
    for &o in observations {
        pomdp.check_obs(o)?;
    }
    Ok(())
}

/// Multiplies `pred` by the likelihood of `obs` and normalizes. Returns the
/// normalizer, or `None` if it is zero.
pub(crate) fn condition(pomdp: &FinitePomdp, pred: &[f64], obs: usize) -> Option<(Vec<f64>, f64)> {
    let mut post: Vec<f64> = pred
        .iter()
        .enumerate()
        .map(|(s, &p)| pomdp.likelihood(s, obs) * p)
        .collect();
    let z: f64 = post.iter().sum();
    if !(z > 0.0) {
        return None;
    }
    for p in post.iter_mut() {
        *p /= z;
    }
    Some((post, z))
}

/// One Bayes filter step: predict with `action`, condition on `obs`.
pub fn belief_update(pomdp: &FinitePomdp, belief: &BeliefState, action: usize, obs: usize) -> Result<BeliefState> {
    pomdp.mdp().check_action(action)?;
    pomdp.check_obs(obs)?;
    if belief.probs.len() != pomdp.n_states() {
        return Err(Error::dims("belief", pomdp.n_states(), belief.probs.len()));
    }
    let pred = pomdp.mdp().push_forward(&belief.probs, action);
    let time = belief.time + 1;
    let (probs, _) = condition(pomdp, &pred, obs).ok_or(Error::ImpossibleObservation { time })?;
    Ok(BeliefState { time, probs })
}

/// Forward-backward inference over the hidden states.
pub fn exact_posterior(pomdp: &FinitePomdp, actions: &[usize], observations: &[usize]) -> Result<PosteriorBundle> {
    check_history(pomdp, actions, observations)?;
    let mdp = pomdp.mdp();
    let n = pomdp.n_states();
    let mut filtered = Vec::with_capacity(observations.len());
    let mut norms = Vec::with_capacity(observations.len());
    let (first, z0) =
        condition(pomdp, mdp.initial().probs(), observations[0]).ok_or(Error::ImpossibleObservation { time: 0 })?;
    filtered.push(BeliefState::new(0, first));
    norms.push(z0);
    for (k, &a) in actions.iter().enumerate() {
        let pred = mdp.push_forward(&filtered[k].probs, a);
        let (post, z) =
            condition(pomdp, &pred, observations[k + 1]).ok_or(Error::ImpossibleObservation { time: k + 1 })?;
        filtered.push(BeliefState::new(k + 1, post));
        norms.push(z);
    }
    let log_evidence = norms.iter().map(|&z| math::ln(z)).sum();

    let t = actions.len();
    let mut beta = alloc::vec![1.0; n];
    let mut smoothed = alloc::vec![BeliefState::new(t, filtered[t].probs.clone()); t + 1];
    for k in (0..t).rev() {
        let o = observations[k + 1];
        let mut prev = alloc::vec![0.0; n];
        for (s, slot) in prev.iter_mut().enumerate() {
            let row = mdp.transition_row(actions[k], s);
            let mut acc = 0.0;
            for s2 in 0..n {
                acc += row[s2] * pomdp.likelihood(s2, o) * beta[s2];
            }
            *slot = acc / norms[k + 1];
        }
        beta = prev;
        let mut gamma: Vec<f64> = filtered[k].probs.iter().zip(&beta).map(|(f, b)| f * b).collect();
        let z: f64 = gamma.iter().sum();
        for g in gamma.iter_mut() {
            *g /= z;
        }
        smoothed[k] = BeliefState::new(k, gamma);
    }
    Ok(PosteriorBundle {
        filtered,
        smoothed,
        log_evidence,
    })
}

/// `ln P(o_0..o_t, s_0..s_t | a_0..a_{t-1})`.
pub fn joint_log_prob(pomdp: &FinitePomdp, actions: &[usize], observations: &[usize], states: &[usize]) -> Result<f64> {
    check_history(pomdp, actions, observations)?;
    if states.len() != observations.len() {
        return Err(Error::len("states", observations.len(), states.len()));
    }
    for &s in states {
        pomdp.mdp().check_state(s)?;
    }
    let mdp = pomdp.mdp();
    let mut lp = math::ln(mdp.initial().probs()[states[0]]) + math::ln(pomdp.likelihood(states[0], observations[0]));
    for k in 0..actions.len() {
        lp += math::ln(mdp.transition(actions[k], states[k], states[k + 1]));
        lp += math::ln(pomdp.likelihood(states[k + 1], observations[k + 1]));
    }
    Ok(lp)
}

fn trajectory_guard(n: usize, steps: usize) -> Result<()> {
    let size = saturating_pow(n, steps);
    if size > MAX_TRAJECTORIES {
        return Err(Error::TooLarge {
            what: "state trajectories",
            size,
            limit: MAX_TRAJECTORIES,
        });
    }
    Ok(())
}

/// Exact posterior over whole state paths `s_0..s_t`, by enumeration.
pub fn exact_trajectory_posterior(
    pomdp: &FinitePomdp,
    actions: &[usize],
    observations: &[usize],
) -> Result<TrajectoryDist> {
    check_history(pomdp, actions, observations)?;
    let n = pomdp.n_states();
    trajectory_guard(n, observations.len())?;
    let mdp = pomdp.mdp();
    let mut probs: Vec<f64> = (0..n)
        .map(|s| mdp.initial().probs()[s] * pomdp.likelihood(s, observations[0]))
        .collect();
    for (k, &a) in actions.iter().enumerate() {
        let o = observations[k + 1];
        let mut next = alloc::vec![0.0; probs.len() * n];
        for (idx, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = mdp.transition_row(a, idx % n);
            for s2 in 0..n {
                next[idx * n + s2] = p * row[s2] * pomdp.likelihood(s2, o);
            }
        }
        probs = next;
    }
    let z: f64 = probs.iter().sum();
    if !(z > 0.0) {
        return Err(Error::ImpossibleObservation { time: actions.len() });
    }
    for p in probs.iter_mut() {
        *p /= z;
    }
    Ok(TrajectoryDist::from_parts(n, observations.len(), probs))
}

/// `F[q] = E_q[ln q(s) - ln P(o, s | a)]` over state paths `s_0..s_t`.
/// Infinite when `q` puts mass on a path the model rules out.
pub fn variational_free_energy(
    pomdp: &FinitePomdp,
    q: &TrajectoryDist,
    actions: &[usize],
    observations: &[usize],
) -> Result<f64> {
    check_history(pomdp, actions, observations)?;
    if q.n_states() != pomdp.n_states() {
        return Err(Error::dims("candidate posterior states", pomdp.n_states(), q.n_states()));
    }
    if q.steps() != observations.len() {
        return Err(Error::len("candidate posterior steps", observations.len(), q.steps()));
    }
    let mut f = 0.0;
    for (path, p) in q.support() {
        let lp = joint_log_prob(pomdp, actions, observations, &path)?;
        if lp == f64::NEG_INFINITY {
            return Ok(f64::INFINITY);
        }
        f += p * (math::ln(p) - lp);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FiniteMdp;
    use alloc::vec;

    fn noisy() -> FinitePomdp {
        let mdp = FiniteMdp::new(
            vec![vec![vec![0.9, 0.1], vec![0.2, 0.8]]],
            vec![0.5, 0.5],
            vec![0.0, 1.0],
            2,
        )
        .unwrap();
        FinitePomdp::new(mdp, vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap()
    }

    #[test]
    fn evidence_and_vfe_agree() {
        let m = noisy();
        let post = exact_posterior(&m, &[0, 0], &[0, 1, 1]).unwrap();
        let q = exact_trajectory_posterior(&m, &[0, 0], &[0, 1, 1]).unwrap();
        let f = variational_free_energy(&m, &q, &[0, 0], &[0, 1, 1]).unwrap();
        assert!((f + post.log_evidence).abs() < 1e-12);
        for k in 0..3 {
            let marg = q.marginal(k);
            for s in 0..2 {
                assert!((marg[s] - post.smoothed[k].probs[s]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_observation_posterior() {
        let m = noisy();
        let post = exact_posterior(&m, &[], &[0]).unwrap();
        let expect = 0.35 / (0.35 + 0.2);
        assert!((post.current().probs[0] - expect).abs() < 1e-15);
        assert!((post.log_evidence - math::ln(0.55)).abs() < 1e-15);
    }

    #[test]
    fn impossible_observation() {
        let mdp = FiniteMdp::new(vec![vec![vec![1.0]]], vec![1.0], vec![0.0], 1).unwrap();
        let m = FinitePomdp::new(mdp, vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(exact_posterior(&m, &[0], &[0, 1]), Err(Error::ImpossibleObservation { time: 1 }));
    }
}
