//! Classical finite-horizon dynamic programming.
//!
//! Values follow the undiscounted convention `v(s, t) = E[R(s_{t+1}) + ... + R(s_T) | s_t = s]`,
//! so `v(., T) = 0`. All computations are exact backward sums; nothing is sampled.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::argmax_set;
use crate::model::{ActionSets, FiniteMdp, StateActionPolicy};
use crate::MAX_POLICIES;

/// `v[t][s]` for `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    horizon: usize,
    n_states: usize,
    values: Vec<f64>,
}

impl ValueFunction {
    fn zeros(horizon: usize, n_states: usize) -> Self {
        Self {
            horizon,
            n_states,
            values: alloc::vec![0.0; (horizon + 1) * n_states],
        }
    }

    #[inline]
    pub fn get(&self, t: usize, s: usize) -> f64 {
        self.values[t * self.n_states + s]
    }

    #[inline]
    fn set(&mut self, t: usize, s: usize, v: f64) {
        self.values[t * self.n_states + s] = v;
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Row of values at time `t`.
    pub fn at(&self, t: usize) -> &[f64] {
        &self.values[t * self.n_states..(t + 1) * self.n_states]
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n_states).map(|r| r.to_vec()).collect()
    }

    /// Largest `|self - other|` over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `q[t][s][a]` for `t = 0..T-1`. Entries are defined for every action,
/// admissible or not.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    q: Vec<f64>,
}

impl QTable {
    #[inline]
    pub fn get(&self, t: usize, s: usize, a: usize) -> f64 {
        self.q[(t * self.n_states + s) * self.n_actions + a]
    }

    pub fn row(&self, t: usize, s: usize) -> &[f64] {
        let start = (t * self.n_states + s) * self.n_actions;
        &self.q[start..start + self.n_actions]
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        self.q
            .chunks(self.n_states * self.n_actions)
            .map(|slab| slab.chunks(self.n_actions).map(|r| r.to_vec()).collect())
            .collect()
    }
}

/// `sum_{s'} P(s'|s,a) (R(s') + next(s'))`
#[inline]
pub(crate) fn backup(mdp: &FiniteMdp, next: &[f64], s: usize, a: usize) -> f64 {
    let reward = mdp.reward();
    mdp.transition_row(a, s)
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(s2, &p)| p * (reward[s2] + next[s2]))
        .sum()
}

/// Exact policy evaluation by backward recursion.
pub fn evaluate_policy(mdp: &FiniteMdp, policy: &StateActionPolicy) -> Result<ValueFunction> {
    policy.check_against(mdp)?;
    let (t_max, ns) = (mdp.horizon(), mdp.n_states());
    let mut v = ValueFunction::zeros(t_max, ns);
    for t in (0..t_max).rev() {
        let next = v.at(t + 1).to_vec();
        for s in 0..ns {
            let value = policy
                .row(t, s)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(a, &p)| p * backup(mdp, &next, s, a))
                .sum();
            v.set(t, s, value);
        }
    }
    Ok(v)
}

/// Outcome of comparing two policies under the pointwise value order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyRelation {
    Better,
    Worse,
    Equal,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialOrderResult {
    pub relation: PolicyRelation,
    /// `(state, time)`. For `Better`/`Worse`, the first point with a strict
    /// difference; for `Incomparable`, the first point whose strict difference
    /// contradicts an earlier one. Scan order is time-major, then state.
    pub witness: Option<(usize, usize)>,
}

/// Compares `p1` against `p2`: `Better` means `v_{p1} >= v_{p2}` everywhere
/// (within `tol`) and strictly greater somewhere.
pub fn compare_policies(
    mdp: &FiniteMdp,
    p1: &StateActionPolicy,
    p2: &StateActionPolicy,
    tol: f64,
) -> Result<PartialOrderResult> {
    let v1 = evaluate_policy(mdp, p1)?;
    let v2 = evaluate_policy(mdp, p2)?;
    let mut first_better = None;
    let mut first_worse = None;
    let mut conflict = None;
    for t in 0..mdp.horizon() {
        for s in 0..mdp.n_states() {
            let d = v1.get(t, s) - v2.get(t, s);
            if d > tol {
                if first_better.is_none() {
                    first_better = Some((s, t));
                    if first_worse.is_some() && conflict.is_none() {
                        conflict = Some((s, t));
                    }
                }
            } else if d < -tol && first_worse.is_none() {
                first_worse = Some((s, t));
                if first_better.is_some() && conflict.is_none() {
                    conflict = Some((s, t));
                }
            }
        }
    }
    let result = match (first_better, first_worse) {
        (None, None) => PartialOrderResult {
            relation: PolicyRelation::Equal,
            witness: None,
        },
        (Some(w), None) => PartialOrderResult {
            relation: PolicyRelation::Better,
            witness: Some(w),
        },
        (None, Some(w)) => PartialOrderResult {
            relation: PolicyRelation::Worse,
            witness: Some(w),
        },
        (Some(_), Some(_)) => PartialOrderResult {
            relation: PolicyRelation::Incomparable,
            witness: conflict,
        },
    };
    Ok(result)
}

/// Output of [`backward_induction`].
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardInduction {
    /// Uniform over each argmax set.
    pub policy: StateActionPolicy,
    pub values: ValueFunction,
    pub q: QTable,
    pub argmax_sets: ActionSets,
}

impl BackwardInduction {
    /// Lowest-index optimal action at `(t, s)`.
    pub fn canonical_action(&self, t: usize, s: usize) -> usize {
        self.argmax_sets.canonical(t, s)
    }

    /// The deterministic policy that always takes the canonical action.
    pub fn canonical_policy(&self, mdp: &FiniteMdp) -> StateActionPolicy {
        StateActionPolicy::deterministic(mdp, |t, s| self.canonical_action(t, s))
    }
}

/// Backward induction: `q[t][s][a] = sum P(s'|s,a)(R(s') + v[t+1][s'])`,
/// `v[t][s] = max_a q`, argmax sets taken within `tie_tol` over admissible actions.
pub fn backward_induction(mdp: &FiniteMdp, tie_tol: f64) -> BackwardInduction {
    let (t_max, ns, na) = (mdp.horizon(), mdp.n_states(), mdp.n_actions());
    let mut values = ValueFunction::zeros(t_max, ns);
    let mut q = alloc::vec![0.0; t_max * ns * na];
    let mut sets = alloc::vec![Vec::new(); t_max * ns];
    for t in (0..t_max).rev() {
        let next = values.at(t + 1).to_vec();
        for s in 0..ns {
            let row = &mut q[(t * ns + s) * na..(t * ns + s + 1) * na];
            for (a, slot) in row.iter_mut().enumerate() {
                *slot = backup(mdp, &next, s, a);
            }
            let best = mdp
                .allowed_actions(s)
                .map(|a| row[a])
                .fold(f64::NEG_INFINITY, f64::max);
            values.set(t, s, best);
            sets[t * ns + s] = argmax_set(row, mdp.allowed_actions(s), tie_tol);
        }
    }
    let argmax_sets = ActionSets::new(t_max, ns, sets);
    BackwardInduction {
        policy: StateActionPolicy::from_sets(mdp, &argmax_sets),
        values,
        q: QTable {
            n_states: ns,
            n_actions: na,
            q,
        },
        argmax_sets,
    }
}

/// Number of deterministic state-action policies of `mdp`.
pub fn deterministic_policy_count(mdp: &FiniteMdp) -> u128 {
    let per_slice = (0..mdp.n_states()).fold(1u128, |acc, s| {
        acc.saturating_mul(mdp.allowed_actions(s).count() as u128)
    });
    (0..mdp.horizon()).fold(1u128, |acc, _| acc.saturating_mul(per_slice))
}

/// Optimal values by exhaustion: the pointwise maximum of `evaluate_policy`
/// over every deterministic state-action policy.
///
/// Independent of [`backward_induction`]; used as ground truth in tests.
pub fn brute_force_optimal_values(mdp: &FiniteMdp) -> Result<ValueFunction> {
    let count = deterministic_policy_count(mdp);
    if count > MAX_POLICIES {
        return Err(Error::TooLarge {
            what: "deterministic policy enumeration",
            size: count,
            limit: MAX_POLICIES,
        });
    }
    let (t_max, ns) = (mdp.horizon(), mdp.n_states());
    let allowed: Vec<Vec<usize>> = (0..ns).map(|s| mdp.allowed_actions(s).collect()).collect();
    // odometer over choice indices, one digit per (t, s)
    let mut digits = alloc::vec![0usize; t_max * ns];
    let mut best = ValueFunction::zeros(t_max, ns);
    let mut first = true;
    loop {
        let policy = StateActionPolicy::deterministic(mdp, |t, s| allowed[s][digits[t * ns + s]]);
        let v = evaluate_policy(mdp, &policy)?;
        for (b, &x) in best.values.iter_mut().zip(&v.values) {
            if first || x > *b {
                *b = x;
            }
        }
        first = false;
        let mut k = 0;
        loop {
            if k == digits.len() {
                return Ok(best);
            }
            digits[k] += 1;
            if digits[k] < allowed[k % ns].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Result of [`check_bellman_optimal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BellmanCheck {
    pub optimal: bool,
    /// First `(state, time)` where the policy puts mass outside the argmax of
    /// its own continuation values, scanning from `T-1` backwards.
    pub violation: Option<(usize, usize)>,
}

/// Checks Bellman optimality recursively: at every `(t, s)` the policy's
/// support must lie inside `argmax_a q_policy[t][s][a]` (within `tol`), where
/// `q_policy` uses the policy's own continuation values.
pub fn check_bellman_optimal(
    mdp: &FiniteMdp,
    policy: &StateActionPolicy,
    tol: f64,
) -> Result<BellmanCheck> {
    let v = evaluate_policy(mdp, policy)?;
    let (t_max, ns, na) = (mdp.horizon(), mdp.n_states(), mdp.n_actions());
    let mut q = alloc::vec![0.0; na];
    for t in (0..t_max).rev() {
        let next = v.at(t + 1);
        for s in 0..ns {
            for (a, slot) in q.iter_mut().enumerate() {
                *slot = backup(mdp, next, s, a);
            }
            let best = mdp
                .allowed_actions(s)
                .map(|a| q[a])
                .fold(f64::NEG_INFINITY, f64::max);
            if policy.support(t, s).any(|a| q[a] < best - tol) {
                return Ok(BellmanCheck {
                    optimal: false,
                    violation: Some((s, t)),
                });
            }
        }
    }
    Ok(BellmanCheck {
        optimal: true,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Actions: 0 = stay, 1 = go to state 1.
    fn stay_or_go(horizon: usize) -> FiniteMdp {
        FiniteMdp::new(
            vec![
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            ],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            horizon,
        )
        .unwrap()
    }

    #[test]
    fn single_state_values_are_linear() {
        let c = 2.5;
        let m = FiniteMdp::new(vec![vec![vec![1.0]]], vec![1.0], vec![c], 3).unwrap();
        let v = evaluate_policy(&m, &StateActionPolicy::uniform(&m)).unwrap();
        for t in 0..=3 {
            assert_eq!(v.get(t, 0), (3 - t) as f64 * c);
        }
    }

    #[test]
    fn go_dominates_stay() {
        let m = stay_or_go(2);
        let go = StateActionPolicy::deterministic(&m, |_, _| 1);
        let stay = StateActionPolicy::deterministic(&m, |_, _| 0);
        let r = compare_policies(&m, &go, &stay, 1e-9).unwrap();
        assert_eq!(r.relation, PolicyRelation::Better);
        assert_eq!(r.witness, Some((0, 0)));
        let r = compare_policies(&m, &stay, &go, 1e-9).unwrap();
        assert_eq!(r.relation, PolicyRelation::Worse);
        let r = compare_policies(&m, &go, &go, 1e-9).unwrap();
        assert_eq!(r, PartialOrderResult { relation: PolicyRelation::Equal, witness: None });
    }

    #[test]
    fn backward_induction_on_stay_or_go() {
        let m = stay_or_go(2);
        let bi = backward_induction(&m, 1e-9);
        assert_eq!(bi.values.get(0, 0), 2.0);
        // in state 1 both actions keep the agent at 1: a tie
        assert_eq!(bi.argmax_sets.get(0, 0), &[1]);
        assert_eq!(bi.argmax_sets.get(1, 1), &[0, 1]);
        assert_eq!(bi.policy.row(1, 1), &[0.5, 0.5]);
        assert_eq!(bi.canonical_action(1, 1), 0);
        assert!(check_bellman_optimal(&m, &bi.policy, 1e-9).unwrap().optimal);
    }

    #[test]
    fn identical_rows_tie() {
        let m = FiniteMdp::new(
            vec![
                vec![vec![0.3, 0.7], vec![0.6, 0.4]],
                vec![vec![0.3, 0.7], vec![0.6, 0.4]],
            ],
            vec![0.5, 0.5],
            vec![0.2, 0.9],
            3,
        )
        .unwrap();
        let bi = backward_induction(&m, 1e-9);
        for t in 0..3 {
            for s in 0..2 {
                assert_eq!(bi.argmax_sets.get(t, s), &[0, 1]);
                assert_eq!(bi.policy.row(t, s), &[0.5, 0.5]);
            }
        }
        // every policy is optimal when all actions are equivalent
        let p = StateActionPolicy::deterministic(&m, |t, s| (t + s) % 2);
        assert!(check_bellman_optimal(&m, &p, 1e-9).unwrap().optimal);
    }

    #[test]
    fn dominated_action_is_reported() {
        let m = stay_or_go(3);
        let p = StateActionPolicy::deterministic(&m, |t, s| if (t, s) == (1, 0) { 0 } else { 1 });
        let check = check_bellman_optimal(&m, &p, 1e-9).unwrap();
        assert_eq!(check, BellmanCheck { optimal: false, violation: Some((0, 1)) });
    }

    #[test]
    fn oracle_guard() {
        let rows = vec![vec![0.25; 4]; 4];
        let m = FiniteMdp::new(vec![rows; 4], vec![0.25; 4], vec![0.0; 4], 10).unwrap();
        assert!(matches!(brute_force_optimal_values(&m), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn oracle_single_action() {
        let m = FiniteMdp::new(
            vec![vec![vec![0.5, 0.5], vec![0.1, 0.9]]],
            vec![1.0, 0.0],
            vec![1.0, -1.0],
            3,
        )
        .unwrap();
        let v = brute_force_optimal_values(&m).unwrap();
        let u = evaluate_policy(&m, &StateActionPolicy::uniform(&m)).unwrap();
        assert!(v.max_abs_diff(&u) == 0.0);
    }

    #[test]
    fn masked_actions_are_excluded() {
        let mut raw = stay_or_go(2).to_raw();
        raw.action_mask = Some(vec![vec![true, false], vec![true, true]]);
        let m = crate::model::validate_mdp(&raw).unwrap();
        let bi = backward_induction(&m, 1e-9);
        assert_eq!(bi.argmax_sets.get(0, 0), &[0]);
        assert_eq!(bi.values.get(0, 0), 0.0);
        assert_eq!(brute_force_optimal_values(&m).unwrap().max_abs_diff(&bi.values), 0.0);
        let go = StateActionPolicy::deterministic(&stay_or_go(2), |_, _| 1);
        assert!(matches!(evaluate_policy(&m, &go), Err(Error::InadmissibleAction { .. })));
    }
}
