use alloc::vec::Vec;

use super::efe::{mean_field_terms, predictive_from_belief, score_joint, Prune};
use super::{EfeScore, Preferences};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{ActionSequence, FiniteMdp};
use crate::{saturating_pow, Categorical, Guards, TIE_TOL};

/// How each open-loop sequence is scored.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "efe", rename_all = "snake_case"))]
pub enum EfeMode {
    /// Risk against the exact predictive joint.
    Exact,
    /// Sum of per-step risks. With `prune = Some(threshold)`, sequences whose
    /// running sum exceeds the best complete score plus `threshold` are abandoned.
    MeanField { prune: Option<f64> },
}

/// Zero-temperature summary of every sequence sharing one first action.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FirstActionLimit {
    /// Best expected reward over sequences starting with this action.
    pub max_expected_reward: f64,
    /// `ln sum exp(-residual)` over the sequences attaining that reward.
    pub log_mass: f64,
}

/// Result of planning over all open-loop sequences.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StandardPlan {
    /// Posterior over the first action (zero for inadmissible actions).
    pub action_posterior: Vec<f64>,
    /// Lowest index in `winning_set`.
    pub chosen: usize,
    /// First actions carrying maximal posterior mass.
    pub winning_set: Vec<usize>,
    /// Every admissible sequence with its score, in lexicographic order.
    pub per_sequence: Vec<(ActionSequence, EfeScore)>,
    /// Per first action, only in the zero-temperature limit.
    pub limit_scores: Option<Vec<Option<FirstActionLimit>>>,
}

/// Softmax of `-G` over sequences, summed by first action. Pruned and
/// infinite scores get zero weight.
pub fn marginalize_first_action(n_actions: usize, per_sequence: &[(ActionSequence, EfeScore)]) -> Vec<f64> {
    let g_min = per_sequence
        .iter()
        .filter_map(|(_, s)| s.g())
        .fold(f64::INFINITY, f64::min);
    let mut mass = alloc::vec![0.0; n_actions];
    if !g_min.is_finite() {
        return mass;
    }
    for (seq, score) in per_sequence {
        if let Some(g) = score.g() {
            if g.is_finite() {
                mass[seq.0[0]] += math::exp(-(g - g_min));
            }
        }
    }
    let total: f64 = mass.iter().sum();
    for m in mass.iter_mut() {
        *m /= total;
    }
    mass
}

fn limit_summary(n_actions: usize, per_sequence: &[(ActionSequence, EfeScore)]) -> Vec<Option<FirstActionLimit>> {
    let mut best = alloc::vec![f64::NEG_INFINITY; n_actions];
    for (seq, score) in per_sequence {
        if let EfeScore::Limit { expected_reward, .. } = *score {
            let a = seq.0[0];
            best[a] = best[a].max(expected_reward);
        }
    }
    let mut terms: Vec<Vec<f64>> = alloc::vec![Vec::new(); n_actions];
    for (seq, score) in per_sequence {
        if let EfeScore::Limit {
            expected_reward,
            residual,
        } = *score
        {
            let a = seq.0[0];
            if expected_reward >= best[a] - TIE_TOL {
                terms[a].push(-residual);
            }
        }
    }
    (0..n_actions)
        .map(|a| {
            if terms[a].is_empty() {
                None
            } else {
                Some(FirstActionLimit {
                    max_expected_reward: best[a],
                    log_mass: math::log_sum_exp(&terms[a]),
                })
            }
        })
        .collect()
}

/// Enumerates sequences of length `len` and builds the plan. `score` receives
/// the sequence and the best finite score seen so far.
pub(crate) fn plan_over_sequences<A, S>(
    n_actions: usize,
    len: usize,
    limit: bool,
    guards: &Guards,
    mut admissible: A,
    mut score: S,
) -> Result<StandardPlan>
where
    A: FnMut(&[usize]) -> bool,
    S: FnMut(&[usize], f64) -> Result<EfeScore>,
{
    let size = saturating_pow(n_actions, len);
    if size > guards.sequences {
        return Err(Error::TooLarge {
            what: "action sequences",
            size,
            limit: guards.sequences,
        });
    }
    let mut per_sequence = Vec::new();
    let mut best_seen = f64::INFINITY;
    for seq in ActionSequence::enumerate(n_actions, len) {
        if !admissible(&seq.0) {
            continue;
        }
        let s = score(&seq.0, best_seen)?;
        if let Some(g) = s.g() {
            best_seen = best_seen.min(g);
        }
        per_sequence.push((seq, s));
    }
    if per_sequence.is_empty() {
        return Err(Error::NoAdmissibleSequence);
    }

    let (action_posterior, winning_set, limit_scores) = if limit {
        let summary = limit_summary(n_actions, &per_sequence);
        let top = summary
            .iter()
            .flatten()
            .map(|s| s.max_expected_reward)
            .fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = (0..n_actions)
            .filter(|&a| matches!(summary[a], Some(s) if s.max_expected_reward >= top - TIE_TOL))
            .collect();
        let logs: Vec<f64> = tied.iter().map(|&a| summary[a].unwrap().log_mass).collect();
        let z = math::log_sum_exp(&logs);
        let best_log = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut posterior = alloc::vec![0.0; n_actions];
        let mut winners = Vec::new();
        for (&a, &l) in tied.iter().zip(&logs) {
            posterior[a] = math::exp(l - z);
            if l >= best_log - TIE_TOL {
                winners.push(a);
            }
        }
        (posterior, winners, Some(summary))
    } else {
        let posterior = marginalize_first_action(n_actions, &per_sequence);
        let top = posterior.iter().copied().fold(0.0, f64::max);
        let winners = if top > 0.0 {
            (0..n_actions)
                .filter(|&a| posterior[a] > 0.0 && posterior[a] >= top * (1.0 - 1e-12))
                .collect()
        } else {
            // every score infinite: fall back to the admissible first actions
            let mut firsts: Vec<usize> = per_sequence.iter().map(|(s, _)| s.0[0]).collect();
            firsts.dedup();
            firsts
        };
        (posterior, winners, None)
    };
    Ok(StandardPlan {
        action_posterior,
        chosen: winning_set[0],
        winning_set,
        per_sequence,
        limit_scores,
    })
}

/// True if every action is admissible at every state reachable with positive
/// probability when it is applied.
pub(crate) fn sequence_admissible(mdp: &FiniteMdp, belief: &[f64], actions: &[usize]) -> bool {
    if !mdp.has_mask() {
        return true;
    }
    let mut dist = belief.to_vec();
    for &a in actions {
        if dist
            .iter()
            .enumerate()
            .any(|(s, &p)| p > 0.0 && !mdp.is_allowed(s, a))
        {
            return false;
        }
        dist = mdp.push_forward(&dist, a);
    }
    true
}

pub(crate) fn score_sequence(
    mdp: &FiniteMdp,
    prefs: &Preferences,
    belief: &[f64],
    actions: &[usize],
    mode: EfeMode,
    obs_entropy: Option<&[f64]>,
    best_seen: f64,
) -> Result<EfeScore> {
    match mode {
        EfeMode::Exact => {
            let joint = predictive_from_belief(mdp, actions, belief)?;
            let risk = score_joint(prefs, &joint);
            Ok(match obs_entropy {
                None => risk,
                Some(h) => {
                    let mut marginal = belief.to_vec();
                    let mut amb = 0.0;
                    for &a in actions {
                        marginal = mdp.push_forward(&marginal, a);
                        amb += math::expect(&marginal, h);
                    }
                    match risk {
                        EfeScore::Finite { g } => EfeScore::finite(g + amb),
                        EfeScore::Limit {
                            expected_reward,
                            residual,
                        } => EfeScore::limit(expected_reward, residual + amb),
                        EfeScore::Pruned => EfeScore::Pruned,
                    }
                }
            })
        }
        EfeMode::MeanField { prune } => {
            let prune = prune.map(|threshold| Prune { threshold, best_seen });
            Ok(mean_field_terms(mdp, prefs, actions, belief, obs_entropy, prune))
        }
    }
}

/// Standard (open-loop) active-inference planning from state `s_t` at time `t`.
pub fn standard_plan(
    mdp: &FiniteMdp,
    prefs: &Preferences,
    s_t: usize,
    t: usize,
    mode: EfeMode,
    guards: &Guards,
) -> Result<StandardPlan> {
    prefs.check_states(mdp.n_states())?;
    mdp.check_state(s_t)?;
    if t >= mdp.horizon() {
        return Err(Error::TimeOutOfRange {
            time: t,
            horizon: mdp.horizon(),
        });
    }
    let belief = Categorical::dirac(mdp.n_states(), s_t);
    let belief = belief.probs();
    plan_over_sequences(
        mdp.n_actions(),
        mdp.horizon() - t,
        prefs.is_limit(),
        guards,
        |seq| sequence_admissible(mdp, belief, seq),
        |seq, best| score_sequence(mdp, prefs, belief, seq, mode, None, best),
    )
}
