use alloc::vec::Vec;

use super::{argmin_set, mean_over, EfeScore, Preferences};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{ActionSets, FiniteMdp};
use crate::{MAX_TRAJECTORIES, TIE_TOL};

/// Recursive expected free energy `G(a | s, tau)` for `tau >= start_time`.
/// Inadmissible entries hold [`EfeScore::Pruned`].
#[derive(Debug, Clone, PartialEq)]
pub struct EfeTable {
    start_time: usize,
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    scores: Vec<EfeScore>,
    argmin: Vec<Vec<usize>>,
}

impl EfeTable {
    pub fn start_time(&self) -> usize {
        self.start_time
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn slot(&self, t: usize, s: usize) -> usize {
        assert!(t >= self.start_time && t < self.horizon, "time {t} outside table");
        (t - self.start_time) * self.n_states + s
    }

    pub fn get(&self, t: usize, s: usize, a: usize) -> EfeScore {
        self.scores[self.slot(t, s) * self.n_actions + a]
    }

    pub fn row(&self, t: usize, s: usize) -> &[EfeScore] {
        let i = self.slot(t, s) * self.n_actions;
        &self.scores[i..i + self.n_actions]
    }

    pub fn argmin(&self, t: usize, s: usize) -> &[usize] {
        &self.argmin[self.slot(t, s)]
    }

    /// Lowest-index minimizer.
    pub fn canonical(&self, t: usize, s: usize) -> usize {
        self.argmin(t, s)[0]
    }

    /// Argmin sets for every `(t, s)`; only for tables starting at time 0.
    pub fn action_sets(&self) -> Option<ActionSets> {
        (self.start_time == 0).then(|| ActionSets::new(self.horizon, self.n_states, self.argmin.clone()))
    }
}

/// Sophisticated planning result at one `(t, s_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SophisticatedPlan {
    pub chosen: usize,
    pub argmin_set: Vec<usize>,
    pub table: EfeTable,
}

/// Backward recursion over all states from `T - 1` down to `from_time`.
pub fn sophisticated_table(mdp: &FiniteMdp, prefs: &Preferences, from_time: usize) -> Result<EfeTable> {
    prefs.check_states(mdp.n_states())?;
    let t_max = mdp.horizon();
    if from_time >= t_max {
        return Err(Error::TimeOutOfRange {
            time: from_time,
            horizon: t_max,
        });
    }
    let (n, k) = (mdp.n_states(), mdp.n_actions());
    let depth = t_max - from_time;
    let mut scores = alloc::vec![EfeScore::Pruned; depth * n * k];
    let mut argmin: Vec<Vec<usize>> = alloc::vec![Vec::new(); depth * n];
    let mut next_mean: Option<Vec<EfeScore>> = None;
    for t in (from_time..t_max).rev() {
        let base = (t - from_time) * n;
        for s in 0..n {
            let row_scores = &mut scores[(base + s) * k..(base + s + 1) * k];
            for a in mdp.allowed_actions(s) {
                let row = mdp.transition_row(a, s);
                row_scores[a] = one_step(mdp, prefs, row, next_mean.as_deref());
            }
            let set = argmin_set(row_scores, mdp.allowed_actions(s), TIE_TOL);
            if set.is_empty() {
                return Err(Error::NoAdmissibleAction { state: s });
            }
            argmin[base + s] = set;
        }
        next_mean = Some(
            (0..n)
                .map(|s| mean_over(&scores[(base + s) * k..(base + s + 1) * k], &argmin[base + s]))
                .collect(),
        );
    }
    Ok(EfeTable {
        start_time: from_time,
        horizon: t_max,
        n_states: n,
        n_actions: k,
        scores,
        argmin,
    })
}

fn one_step(mdp: &FiniteMdp, prefs: &Preferences, row: &[f64], next: Option<&[EfeScore]>) -> EfeScore {
    match prefs.log_c() {
        Some(log_c) => {
            let immediate = math::kl_log(row, log_c);
            let mut cont = 0.0;
            if let Some(next) = next {
                for (s2, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        cont += p * next[s2].g().unwrap_or(f64::INFINITY);
                    }
                }
            }
            EfeScore::finite(immediate + cont)
        }
        None => {
            let immediate_r = math::expect(row, mdp.reward());
            let immediate_h = -math::entropy(row);
            let (mut cont_r, mut cont_h) = (0.0, 0.0);
            if let Some(next) = next {
                for (s2, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        if let EfeScore::Limit {
                            expected_reward,
                            residual,
                        } = next[s2]
                        {
                            cont_r += p * expected_reward;
                            cont_h += p * residual;
                        }
                    }
                }
            }
            EfeScore::limit(immediate_r + cont_r, immediate_h + cont_h)
        }
    }
}

/// Sophisticated planning from `s_t` at time `t`.
pub fn sophisticated_plan(mdp: &FiniteMdp, prefs: &Preferences, t: usize, s_t: usize) -> Result<SophisticatedPlan> {
    mdp.check_state(s_t)?;
    let table = sophisticated_table(mdp, prefs, t)?;
    let argmin_set = table.argmin(t, s_t).to_vec();
    Ok(SophisticatedPlan {
        chosen: argmin_set[0],
        argmin_set,
        table,
    })
}

/// Recomputes `G(a_t | s_t, t)` by forward enumeration of every
/// (state, action) path under the uniform-over-argmin continuation,
/// accumulating `ln Q(path) - ln C(path)` (or the reward and `ln Q` pair in
/// the limit). Independent of the backward recursion apart from the argmin sets.
pub fn unroll_efe_check(mdp: &FiniteMdp, prefs: &Preferences, t: usize, s_t: usize, a_t: usize) -> Result<EfeScore> {
    prefs.check_states(mdp.n_states())?;
    mdp.check_state(s_t)?;
    mdp.check_action(a_t)?;
    let t_max = mdp.horizon();
    if t >= t_max {
        return Err(Error::TimeOutOfRange { time: t, horizon: t_max });
    }
    let table = if t + 1 < t_max {
        Some(sophisticated_table(mdp, prefs, t + 1)?)
    } else {
        None
    };
    let per_state: &[f64] = prefs.log_c().unwrap_or(prefs.reward());

    struct Frame {
        time: usize,
        state: usize,
        action: usize,
        weight: f64,
        log_q: f64,
        along: f64,
    }
    let mut stack = alloc::vec![Frame {
        time: t,
        state: s_t,
        action: a_t,
        weight: 1.0,
        log_q: 0.0,
        along: 0.0,
    }];
    let (mut acc_q, mut acc_along) = (0.0, 0.0);
    let mut visited: u128 = 0;
    while let Some(f) = stack.pop() {
        for (s2, &p) in mdp.transition_row(f.action, f.state).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            visited += 1;
            if visited > MAX_TRAJECTORIES {
                return Err(Error::TooLarge {
                    what: "unrolled paths",
                    size: visited,
                    limit: MAX_TRAJECTORIES,
                });
            }
            let weight = f.weight * p;
            let log_q = f.log_q + math::ln(p);
            let along = f.along + per_state[s2];
            if f.time + 1 == t_max {
                acc_q += weight * log_q;
                acc_along += weight * along;
                continue;
            }
            let set = table.as_ref().unwrap().argmin(f.time + 1, s2);
            let share = 1.0 / set.len() as f64;
            for &a in set {
                stack.push(Frame {
                    time: f.time + 1,
                    state: s2,
                    action: a,
                    weight: weight * share,
                    log_q,
                    along,
                });
            }
        }
    }
    Ok(if prefs.is_limit() {
        EfeScore::limit(acc_along, acc_q)
    } else {
        EfeScore::finite(acc_q - acc_along)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    // state 0 -> action 1 reaches the rewarding state 1, which is absorbing
    fn go() -> FiniteMdp {
        FiniteMdp::new(
            vec![
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            ],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            3,
        )
        .unwrap()
    }

    #[test]
    fn limit_picks_reward() {
        let m = go();
        let p = Preferences::limit(m.reward()).unwrap();
        let plan = sophisticated_plan(&m, &p, 0, 0).unwrap();
        assert_eq!(plan.chosen, 1);
        assert_eq!(plan.table.get(0, 0, 1), EfeScore::limit(3.0, 0.0));
        assert_eq!(plan.table.argmin(1, 1), &[0, 1]);
    }

    #[test]
    fn unroll_matches_recursion() {
        let m = go();
        for p in [Preferences::limit(m.reward()).unwrap(), Preferences::finite(m.reward(), 0.7).unwrap()] {
            let table = sophisticated_table(&m, &p, 0).unwrap();
            for a in 0..2 {
                let u = unroll_efe_check(&m, &p, 0, 0, a).unwrap();
                assert!(u.max_abs_diff(&table.get(0, 0, a)) < 1e-12);
            }
        }
    }
}
