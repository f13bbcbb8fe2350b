//! Brute-force references shared by the integration tests. Everything here
//! is written directly from the definitions with nested loops, without going
//! through the library's own joint or recursion code.
#![allow(dead_code)]

use efe_core::envs::{gen_random, RandomSpec};
use efe_core::model::Model;
use efe_core::{FiniteMdp, FinitePomdp};

pub fn mdp(seed: u64, n_states: usize, n_actions: usize, horizon: usize) -> FiniteMdp {
    match gen_random(&RandomSpec::new(seed, n_states, n_actions, horizon)).unwrap() {
        Model::Mdp(m) => m,
        Model::Pomdp(_) => unreachable!(),
    }
}

pub fn pomdp(seed: u64, n_states: usize, n_actions: usize, n_obs: usize, horizon: usize) -> FinitePomdp {
    match gen_random(&RandomSpec::new(seed, n_states, n_actions, horizon).with_obs(n_obs)).unwrap() {
        Model::Pomdp(m) => m,
        Model::Mdp(_) => unreachable!(),
    }
}

/// All index tuples of length `len` over `0..n`, lexicographic.
pub fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * n);
        for prefix in &out {
            for i in 0..n {
                let mut p = prefix.clone();
                p.push(i);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Probability of the future path `path` from `s_t` under `actions`.
pub fn path_prob(m: &FiniteMdp, s_t: usize, actions: &[usize], path: &[usize]) -> f64 {
    let mut p = 1.0;
    let mut prev = s_t;
    for (k, &s) in path.iter().enumerate() {
        p *= m.transition(actions[k], prev, s);
        prev = s;
    }
    p
}

/// `(path, prob)` for every future path with positive probability.
pub fn future_paths(m: &FiniteMdp, s_t: usize, actions: &[usize]) -> Vec<(Vec<usize>, f64)> {
    tuples(m.n_states(), actions.len())
        .into_iter()
        .map(|path| {
            let p = path_prob(m, s_t, actions, &path);
            (path, p)
        })
        .filter(|(_, p)| *p > 0.0)
        .collect()
}

pub fn expected_path_reward(m: &FiniteMdp, s_t: usize, actions: &[usize]) -> f64 {
    future_paths(m, s_t, actions)
        .iter()
        .map(|(path, p)| p * path.iter().map(|&s| m.reward()[s]).sum::<f64>())
        .sum()
}

pub fn path_entropy(m: &FiniteMdp, s_t: usize, actions: &[usize]) -> f64 {
    -future_paths(m, s_t, actions).iter().map(|(_, p)| p * p.ln()).sum::<f64>()
}

/// `ln C_beta(s)` from the softmax definition, with max subtraction.
pub fn log_pref(reward: &[f64], beta: f64) -> Vec<f64> {
    let m = reward.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = reward.iter().map(|r| (beta * (r - m)).exp()).sum();
    reward.iter().map(|r| beta * (r - m) - z.ln()).collect()
}

/// Optimal values by exhaustive search over open-loop-free deterministic
/// closed-loop strategies, written as a direct max-expectimax recursion.
pub fn expectimax(m: &FiniteMdp, t: usize, s: usize) -> f64 {
    if t == m.horizon() {
        return 0.0;
    }
    m.allowed_actions(s)
        .map(|a| {
            (0..m.n_states())
                .map(|s2| {
                    let p = m.transition(a, s, s2);
                    if p == 0.0 {
                        0.0
                    } else {
                        p * (m.reward()[s2] + expectimax(m, t + 1, s2))
                    }
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
