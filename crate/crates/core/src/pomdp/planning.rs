use alloc::boxed::Box;
use alloc::vec::Vec;

use super::inference::{condition, exact_posterior, BeliefState};
use crate::aif::{
    argmin_set, mean_over, plan_over_sequences, predictive_from_belief, score_joint, EfeMode, EfeScore, Preferences,
    StandardPlan,
};
use crate::error::{Error, Result};
use crate::math;
use crate::model::FinitePomdp;
use crate::{saturating_pow, Guards, TIE_TOL};

/// Expected free energy of a sequence under partial observability.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PomdpEfe {
    /// `risk + ambiguity`.
    pub score: EfeScore,
    /// Risk of the predictive joint over future states.
    pub risk: EfeScore,
    /// `sum_tau E_Q[H[P(o | s_tau)]]` over future states.
    pub ambiguity: f64,
}

fn check_belief(pomdp: &FinitePomdp, belief: &BeliefState) -> Result<()> {
    if belief.probs.len() != pomdp.n_states() {
        return Err(Error::dims("belief", pomdp.n_states(), belief.probs.len()));
    }
    if belief.time >= pomdp.horizon() {
        return Err(Error::TimeOutOfRange {
            time: belief.time,
            horizon: pomdp.horizon(),
        });
    }
    Ok(())
}

fn add_ambiguity(risk: EfeScore, ambiguity: f64) -> EfeScore {
    match risk {
        EfeScore::Finite { g } => EfeScore::finite(g + ambiguity),
        EfeScore::Limit {
            expected_reward,
            residual,
        } => EfeScore::limit(expected_reward, residual + ambiguity),
        EfeScore::Pruned => EfeScore::Pruned,
    }
}

/// Risk plus ambiguity of `actions` (length `T - belief.time`) from `belief`.
pub fn efe_pomdp(pomdp: &FinitePomdp, prefs: &Preferences, actions: &[usize], belief: &BeliefState) -> Result<PomdpEfe> {
    prefs.check_states(pomdp.n_states())?;
    check_belief(pomdp, belief)?;
    let len = pomdp.horizon() - belief.time;
    if actions.len() != len {
        return Err(Error::len("action sequence", len, actions.len()));
    }
    for &a in actions {
        pomdp.mdp().check_action(a)?;
    }
    let mdp = pomdp.mdp();
    let joint = predictive_from_belief(mdp, actions, &belief.probs)?;
    let risk = score_joint(prefs, &joint);
    let mut marginal = belief.probs.clone();
    let mut ambiguity = 0.0;
    for &a in actions {
        marginal = mdp.push_forward(&marginal, a);
        ambiguity += math::expect(&marginal, pomdp.observation_entropy());
    }
    Ok(PomdpEfe {
        score: add_ambiguity(risk, ambiguity),
        risk,
        ambiguity,
    })
}

/// Standard planning from an explicit belief.
pub fn standard_plan_from_belief(
    pomdp: &FinitePomdp,
    prefs: &Preferences,
    belief: &BeliefState,
    mode: EfeMode,
    guards: &Guards,
) -> Result<StandardPlan> {
    prefs.check_states(pomdp.n_states())?;
    check_belief(pomdp, belief)?;
    let mdp = pomdp.mdp();
    let h = pomdp.observation_entropy();
    plan_over_sequences(
        mdp.n_actions(),
        pomdp.horizon() - belief.time,
        prefs.is_limit(),
        guards,
        |seq| crate::aif::sequence_admissible(mdp, &belief.probs, seq),
        |seq, best| crate::aif::score_sequence(mdp, prefs, &belief.probs, seq, mode, Some(h), best),
    )
}

/// Standard planning after conditioning on the observation and action history.
pub fn standard_plan_pomdp(
    pomdp: &FinitePomdp,
    prefs: &Preferences,
    actions: &[usize],
    observations: &[usize],
    mode: EfeMode,
    guards: &Guards,
) -> Result<StandardPlan> {
    let post = exact_posterior(pomdp, actions, observations)?;
    standard_plan_from_belief(pomdp, prefs, post.current(), mode, guards)
}

/// One node of the belief tree.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefNode {
    pub belief: BeliefState,
    /// `G(a | belief)`; inadmissible actions hold [`EfeScore::Pruned`].
    pub scores: Vec<EfeScore>,
    pub argmin: Vec<usize>,
    /// Children for every admissible action and positive-probability observation.
    pub children: Vec<BeliefBranch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeliefBranch {
    pub action: usize,
    pub observation: usize,
    pub prob: f64,
    pub node: Box<BeliefNode>,
}

impl BeliefNode {
    pub fn child(&self, action: usize, observation: usize) -> Option<&BeliefNode> {
        self.children
            .iter()
            .find(|b| b.action == action && b.observation == observation)
            .map(|b| &*b.node)
    }

    /// Number of nodes in the subtree, this one included.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|b| b.node.size()).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SophisticatedPomdpPlan {
    pub chosen: usize,
    pub argmin_set: Vec<usize>,
    pub root: BeliefNode,
}

/// Sophisticated planning over the tree of reachable beliefs.
pub fn sophisticated_plan_pomdp(
    pomdp: &FinitePomdp,
    prefs: &Preferences,
    belief: &BeliefState,
    guards: &Guards,
) -> Result<SophisticatedPomdpPlan> {
    prefs.check_states(pomdp.n_states())?;
    check_belief(pomdp, belief)?;
    let depth = pomdp.horizon() - belief.time;
    let size = saturating_pow(pomdp.n_actions() * pomdp.n_obs(), depth).saturating_mul(pomdp.n_states() as u128);
    if size > guards.tree {
        return Err(Error::TooLarge {
            what: "belief tree",
            size,
            limit: guards.tree,
        });
    }
    let root = build_node(pomdp, prefs, belief.clone())?;
    Ok(SophisticatedPomdpPlan {
        chosen: root.argmin[0],
        argmin_set: root.argmin.clone(),
        root,
    })
}

fn admissible_at(pomdp: &FinitePomdp, belief: &BeliefState) -> Vec<usize> {
    let mdp = pomdp.mdp();
    (0..mdp.n_actions())
        .filter(|&a| belief.support().all(|s| mdp.is_allowed(s, a)))
        .collect()
}

fn build_node(pomdp: &FinitePomdp, prefs: &Preferences, belief: BeliefState) -> Result<BeliefNode> {
    let mdp = pomdp.mdp();
    let h = pomdp.observation_entropy();
    let leaf = belief.time + 1 == pomdp.horizon();
    let allowed = admissible_at(pomdp, &belief);
    if allowed.is_empty() {
        return Err(Error::NoAdmissibleAction {
            state: belief.support().next().unwrap_or(0),
        });
    }
    let mut scores = alloc::vec![EfeScore::Pruned; mdp.n_actions()];
    let mut children = Vec::new();
    for &a in &allowed {
        let pred = mdp.push_forward(&belief.probs, a);
        let mut cont = match prefs.log_c() {
            Some(_) => EfeScore::finite(0.0),
            None => EfeScore::limit(0.0, 0.0),
        };
        if !leaf {
            for o in 0..pomdp.n_obs() {
                let Some((post, p_o)) = condition(pomdp, &pred, o) else {
                    continue;
                };
                let node = build_node(pomdp, prefs, BeliefState::new(belief.time + 1, post))?;
                let m = mean_over(&node.scores, &node.argmin);
                cont = match (cont, m) {
                    (EfeScore::Finite { g }, EfeScore::Finite { g: gm }) => EfeScore::finite(g + p_o * gm),
                    (
                        EfeScore::Limit {
                            expected_reward,
                            residual,
                        },
                        EfeScore::Limit {
                            expected_reward: rm,
                            residual: hm,
                        },
                    ) => EfeScore::limit(expected_reward + p_o * rm, residual + p_o * hm),
                    _ => EfeScore::Pruned,
                };
                children.push(BeliefBranch {
                    action: a,
                    observation: o,
                    prob: p_o,
                    node: Box::new(node),
                });
            }
        }
        scores[a] = match (prefs.log_c(), cont) {
            (Some(log_c), EfeScore::Finite { g }) => {
                let immediate = math::kl_log(&pred, log_c) + math::expect(&pred, h);
                EfeScore::finite(immediate + g)
            }
            (None, EfeScore::Limit {
                expected_reward,
                residual,
            }) => {
                let immediate_r = math::expect(&pred, prefs.reward());
                let immediate_h = -math::entropy(&pred) + math::expect(&pred, h);
                EfeScore::limit(immediate_r + expected_reward, immediate_h + residual)
            }
            _ => EfeScore::Pruned,
        };
    }
    let argmin = argmin_set(&scores, allowed.iter().copied(), TIE_TOL);
    Ok(BeliefNode {
        belief,
        scores,
        argmin,
        children,
    })
}
