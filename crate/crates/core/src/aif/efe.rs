use super::{EfeScore, Preferences};
use crate::dist::TrajectoryDist;
use crate::error::{Error, Result};
use crate::math;
use crate::model::FiniteMdp;
use crate::{saturating_pow, MAX_TRAJECTORIES};

/// Early abandonment of a mean-field score once its running sum exceeds
/// `best_seen + threshold`. Only applies at finite beta, and only once
/// `best_seen` is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prune {
    pub threshold: f64,
    pub best_seen: f64,
}

pub(crate) fn check_sequence(mdp: &FiniteMdp, actions: &[usize]) -> Result<()> {
    if actions.is_empty() || actions.len() > mdp.horizon() {
        return Err(Error::TimeOutOfRange {
            time: mdp.horizon().saturating_sub(actions.len()),
            horizon: mdp.horizon(),
        });
    }
    for &a in actions {
        mdp.check_action(a)?;
    }
    Ok(())
}

/// Joint over future states `s_{t+1..T}` given a belief over `s_t`.
pub(crate) fn predictive_from_belief(mdp: &FiniteMdp, actions: &[usize], belief: &[f64]) -> Result<TrajectoryDist> {
    let n = mdp.n_states();
    let size = saturating_pow(n, actions.len());
    if size > MAX_TRAJECTORIES {
        return Err(Error::TooLarge {
            what: "trajectory joint",
            size,
            limit: MAX_TRAJECTORIES,
        });
    }
    let mut probs = mdp.push_forward(belief, actions[0]);
    for &a in &actions[1..] {
        let mut next = alloc::vec![0.0; probs.len() * n];
        for (idx, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = mdp.transition_row(a, idx % n);
            for (slot, &t) in next[idx * n..(idx + 1) * n].iter_mut().zip(row) {
                *slot = p * t;
            }
        }
        probs = next;
    }
    Ok(TrajectoryDist::from_parts(n, actions.len(), probs))
}

/// Predictive joint `Q(s_{t+1..T} | a_{t..T-1}, s_t)`; `t = T - len(actions)`.
pub fn predictive_dist(mdp: &FiniteMdp, actions: &[usize], s_t: usize) -> Result<TrajectoryDist> {
    check_sequence(mdp, actions)?;
    mdp.check_state(s_t)?;
    let belief = crate::Categorical::dirac(mdp.n_states(), s_t);
    predictive_from_belief(mdp, actions, belief.probs())
}

/// Risk of a predictive joint against the preferences: `KL[Q || C]` with
/// `C` factorized over time at finite beta, or the pair
/// `(E_Q[sum R], E_Q[ln Q])` in the limit.
pub fn score_joint(prefs: &Preferences, joint: &TrajectoryDist) -> EfeScore {
    let n = joint.n_states();
    let steps = joint.steps();
    let per_state: &[f64] = match prefs.log_c() {
        Some(log_c) => log_c,
        None => prefs.reward(),
    };
    let mut along = 0.0;
    let mut neg_entropy = 0.0;
    let mut path = alloc::vec![0usize; steps];
    for (idx, &p) in joint.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut rest = idx;
        for k in (0..steps).rev() {
            path[k] = rest % n;
            rest /= n;
        }
        let sum: f64 = path.iter().map(|&s| per_state[s]).sum();
        along += p * sum;
        neg_entropy += p * math::ln(p);
    }
    if prefs.is_limit() {
        EfeScore::limit(along, neg_entropy)
    } else {
        EfeScore::finite(neg_entropy - along)
    }
}

/// Exact expected free energy of an open-loop sequence from `s_t`.
pub fn efe_exact(mdp: &FiniteMdp, prefs: &Preferences, actions: &[usize], s_t: usize) -> Result<EfeScore> {
    prefs.check_states(mdp.n_states())?;
    let joint = predictive_dist(mdp, actions, s_t)?;
    Ok(score_joint(prefs, &joint))
}

/// Mean-field expected free energy `sum_tau KL[Q_tau || C]` from `s_t`.
pub fn efe_mean_field(
    mdp: &FiniteMdp,
    prefs: &Preferences,
    actions: &[usize],
    s_t: usize,
    prune: Option<Prune>,
) -> Result<EfeScore> {
    prefs.check_states(mdp.n_states())?;
    check_sequence(mdp, actions)?;
    mdp.check_state(s_t)?;
    let belief = crate::Categorical::dirac(mdp.n_states(), s_t);
    Ok(mean_field_terms(mdp, prefs, actions, belief.probs(), None, prune))
}

/// Mean-field score from a belief, with an optional per-state ambiguity
/// `H[P(o | s)]` folded into every step.
pub(crate) fn mean_field_terms(
    mdp: &FiniteMdp,
    prefs: &Preferences,
    actions: &[usize],
    belief: &[f64],
    obs_entropy: Option<&[f64]>,
    prune: Option<Prune>,
) -> EfeScore {
    let bound = match prune {
        Some(p) if !prefs.is_limit() && p.best_seen.is_finite() => Some(p.best_seen + p.threshold),
        _ => None,
    };
    let mut marginal = belief.to_vec();
    let mut g = 0.0;
    let mut reward = 0.0;
    let mut residual = 0.0;
    for &a in actions {
        marginal = mdp.push_forward(&marginal, a);
        let amb = obs_entropy.map(|h| math::expect(&marginal, h));
        match prefs.log_c() {
            Some(log_c) => {
                let mut step = math::kl_log(&marginal, log_c);
                if let Some(amb) = amb {
                    step += amb;
                }
                g += step;
                if let Some(b) = bound {
                    if g > b {
                        return EfeScore::Pruned;
                    }
                }
            }
            None => {
                reward += math::expect(&marginal, prefs.reward());
                let mut step = -math::entropy(&marginal);
                if let Some(amb) = amb {
                    step += amb;
                }
                residual += step;
            }
        }
    }
    if prefs.is_limit() {
        EfeScore::limit(reward, residual)
    } else {
        EfeScore::finite(g)
    }
}
