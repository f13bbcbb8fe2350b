//! Seeded benchmark generators.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{FiniteMdp, FinitePomdp, Labels, Model};

/// Parameters for one of the built-in generators.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum EnvSpec {
    Gridworld {
        width: usize,
        height: usize,
        reward_cell: usize,
        slip: f64,
        horizon: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        start: usize,
    },
    Tmaze {
        cue_reliability: f64,
        #[cfg_attr(feature = "serde", serde(default = "default_tmaze_horizon"))]
        horizon: usize,
        #[cfg_attr(feature = "serde", serde(default))]
        identity_likelihood: bool,
    },
    Random(RandomSpec),
}

#[cfg(feature = "serde")]
fn default_tmaze_horizon() -> usize {
    3
}

/// Sizes and options for [`gen_random`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RandomSpec {
    pub seed: u64,
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub n_obs: Option<usize>,
    /// Draw rewards from `{0, 1}` instead of `[0, 1]`, so ties are common.
    #[cfg_attr(feature = "serde", serde(default))]
    pub reward_ties: bool,
    /// Probability that a transition or likelihood entry is forced to zero
    /// (each row keeps at least one positive entry).
    #[cfg_attr(feature = "serde", serde(default))]
    pub sparsity: f64,
}

impl RandomSpec {
    pub fn new(seed: u64, n_states: usize, n_actions: usize, horizon: usize) -> Self {
        Self {
            seed,
            n_states,
            n_actions,
            horizon,
            n_obs: None,
            reward_ties: false,
            sparsity: 0.0,
        }
    }

    pub fn with_obs(mut self, n_obs: usize) -> Self {
        self.n_obs = Some(n_obs);
        self
    }

    pub fn with_reward_ties(mut self) -> Self {
        self.reward_ties = true;
        self
    }

    pub fn with_sparsity(mut self, sparsity: f64) -> Self {
        self.sparsity = sparsity;
        self
    }
}

impl EnvSpec {
    pub fn build(&self) -> Result<Model> {
        match self {
            EnvSpec::Gridworld {
                width,
                height,
                reward_cell,
                slip,
                horizon,
                start,
            } => gen_gridworld_from(*width, *height, *reward_cell, *slip, *horizon, *start).map(Model::Mdp),
            EnvSpec::Tmaze {
                cue_reliability,
                horizon,
                identity_likelihood,
            } => {
                let m = gen_tmaze(*cue_reliability, *horizon)?;
                Ok(Model::Pomdp(if *identity_likelihood {
                    FinitePomdp::fully_observed(m.mdp().clone())
                } else {
                    m
                }))
            }
            EnvSpec::Random(spec) => gen_random(spec),
        }
    }
}

fn out_of_range(param: &'static str, value: f64) -> Error {
    Error::OutOfRange { param, value }
}

/// Grid with cells numbered row-major from the top-left; the agent starts in cell 0.
pub fn gen_gridworld(width: usize, height: usize, reward_cell: usize, slip: f64, horizon: usize) -> Result<FiniteMdp> {
    gen_gridworld_from(width, height, reward_cell, slip, horizon, 0)
}

/// As [`gen_gridworld`] with an explicit start cell.
pub fn gen_gridworld_from(
    width: usize,
    height: usize,
    reward_cell: usize,
    slip: f64,
    horizon: usize,
    start: usize,
) -> Result<FiniteMdp> {
    if width == 0 {
        return Err(out_of_range("width", 0.0));
    }
    if height == 0 {
        return Err(out_of_range("height", 0.0));
    }
    let n = width * height;
    if n > 100 {
        return Err(out_of_range("width * height", n as f64));
    }
    if !(0.0..=0.5).contains(&slip) {
        return Err(out_of_range("slip", slip));
    }
    if reward_cell >= n {
        return Err(out_of_range("reward_cell", reward_cell as f64));
    }
    if start >= n {
        return Err(out_of_range("start", start as f64));
    }
    if horizon == 0 {
        return Err(out_of_range("horizon", 0.0));
    }
    // N, E, S, W
    const MOVES: [(i64, i64); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];
    let target = |cell: usize, dir: usize| -> usize {
        let (x, y) = ((cell % width) as i64, (cell / width) as i64);
        let (nx, ny) = (x + MOVES[dir].0, y + MOVES[dir].1);
        if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
            cell
        } else {
            ny as usize * width + nx as usize
        }
    };
    let mut transition = alloc::vec![alloc::vec![alloc::vec![0.0; n]; n]; 4];
    for (a, slice) in transition.iter_mut().enumerate() {
        for (s, row) in slice.iter_mut().enumerate() {
            row[target(s, a)] += 1.0 - slip;
            row[target(s, (a + 1) % 4)] += slip / 2.0;
            row[target(s, (a + 3) % 4)] += slip / 2.0;
        }
    }
    let mut initial = alloc::vec![0.0; n];
    initial[start] = 1.0;
    let mut reward = alloc::vec![0.0; n];
    reward[reward_cell] = 1.0;
    let labels = Labels {
        states: Some((0..n).map(|s| format!("({},{})", s % width, s / width)).collect()),
        actions: Some(["N", "E", "S", "W"].iter().map(|s| String::from(*s)).collect()),
        observations: None,
    };
    Ok(FiniteMdp::new(transition, initial, reward, horizon)?.with_labels(labels))
}

const LOCATIONS: [&str; 5] = ["start", "cue", "left", "right", "done"];
const TMAZE_ACTIONS: [&str; 4] = ["to-start", "to-cue", "to-left", "to-right"];
const TMAZE_OBS: [&str; 6] = ["start", "cue-left", "cue-right", "left-arm", "right-arm", "done"];

/// Cue-then-choose maze. States are `location x context` with locations
/// start, cue, left arm, right arm and a terminal `done` reached one step
/// after entering an arm, so the arm reward is collected once. The cue
/// reports the context correctly with probability `cue_reliability`.
/// Waiting is not admissible: from start only the cue or an arm, from the
/// cue only an arm.
pub fn gen_tmaze(cue_reliability: f64, horizon: usize) -> Result<FinitePomdp> {
    if !(0.5..=1.0).contains(&cue_reliability) {
        return Err(out_of_range("cue_reliability", cue_reliability));
    }
    if horizon == 0 {
        return Err(out_of_range("horizon", 0.0));
    }
    let (start, cue, left, right, done) = (0usize, 1usize, 2usize, 3usize, 4usize);
    let idx = |loc: usize, ctx: usize| loc * 2 + ctx;
    let n = LOCATIONS.len() * 2;
    let dest = |loc: usize, a: usize| -> usize {
        match loc {
            l if l == left || l == right || l == done => done,
            _ => a,
        }
    };
    let mut transition = alloc::vec![alloc::vec![alloc::vec![0.0; n]; n]; 4];
    for (a, slice) in transition.iter_mut().enumerate() {
        for loc in 0..LOCATIONS.len() {
            for ctx in 0..2 {
                slice[idx(loc, ctx)][idx(dest(loc, a), ctx)] = 1.0;
            }
        }
    }
    let mut initial = alloc::vec![0.0; n];
    initial[idx(start, 0)] = 0.5;
    initial[idx(start, 1)] = 0.5;
    let mut reward = alloc::vec![0.0; n];
    reward[idx(left, 0)] = 1.0;
    reward[idx(right, 1)] = 1.0;
    let mut mask = alloc::vec![alloc::vec![true; 4]; n];
    for ctx in 0..2 {
        mask[idx(start, ctx)] = alloc::vec![false, true, true, true];
        mask[idx(cue, ctx)] = alloc::vec![false, false, true, true];
    }
    let mut likelihood = alloc::vec![alloc::vec![0.0; TMAZE_OBS.len()]; n];
    for ctx in 0..2 {
        likelihood[idx(start, ctx)][0] = 1.0;
        likelihood[idx(cue, ctx)][1 + ctx] = cue_reliability;
        likelihood[idx(cue, ctx)][2 - ctx] += 1.0 - cue_reliability;
        likelihood[idx(left, ctx)][3] = 1.0;
        likelihood[idx(right, ctx)][4] = 1.0;
        likelihood[idx(done, ctx)][5] = 1.0;
    }
    let labels = Labels {
        states: Some(
            (0..n)
                .map(|s| format!("{}/{}", LOCATIONS[s / 2], if s % 2 == 0 { "L" } else { "R" }))
                .collect(),
        ),
        actions: Some(TMAZE_ACTIONS.iter().map(|s| String::from(*s)).collect()),
        observations: Some(TMAZE_OBS.iter().map(|s| String::from(*s)).collect()),
    };
    let mdp = FiniteMdp::new(transition, initial, reward, horizon)?
        .with_mask(mask)?
        .with_labels(labels);
    FinitePomdp::new(mdp, likelihood)
}

fn dirichlet_row(rng: &mut ChaCha8Rng, len: usize, sparsity: f64) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len)
        .map(|_| -crate::math::ln(1.0 - rng.random::<f64>()))
        .collect();
    if sparsity > 0.0 {
        let keep = rng.random_range(0..len);
        for (i, x) in row.iter_mut().enumerate() {
            if i != keep && rng.random::<f64>() < sparsity {
                *x = 0.0;
            }
        }
    }
    let total: f64 = row.iter().sum();
    if total > 0.0 {
        for x in row.iter_mut() {
            *x /= total;
        }
    } else {
        row[0] = 1.0;
    }
    row
}

/// Random model with Dirichlet(1) rows and uniform rewards, reproducible per seed.
pub fn gen_random(spec: &RandomSpec) -> Result<Model> {
    for (param, v) in [
        ("n_states", spec.n_states),
        ("n_actions", spec.n_actions),
        ("horizon", spec.horizon),
    ] {
        if v == 0 {
            return Err(out_of_range(param, 0.0));
        }
    }
    if spec.n_obs == Some(0) {
        return Err(out_of_range("n_obs", 0.0));
    }
    if !(0.0..1.0).contains(&spec.sparsity) {
        return Err(out_of_range("sparsity", spec.sparsity));
    }
    let n = spec.n_states;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let transition: Vec<Vec<Vec<f64>>> = (0..spec.n_actions)
        .map(|_| (0..n).map(|_| dirichlet_row(&mut rng, n, spec.sparsity)).collect())
        .collect();
    let initial = dirichlet_row(&mut rng, n, 0.0);
    let reward: Vec<f64> = (0..n)
        .map(|_| {
            if spec.reward_ties {
                if rng.random::<bool>() {
                    1.0
                } else {
                    0.0
                }
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    let mdp = FiniteMdp::new(transition, initial, reward, spec.horizon)?;
    match spec.n_obs {
        None => Ok(Model::Mdp(mdp)),
        Some(n_obs) => {
            let likelihood = (0..n).map(|_| dirichlet_row(&mut rng, n_obs, spec.sparsity)).collect();
            Ok(Model::Pomdp(FinitePomdp::new(mdp, likelihood)?))
        }
    }
}

/// [`gen_random`] for fully observed models.
pub fn random_mdp(seed: u64, n_states: usize, n_actions: usize, horizon: usize) -> Result<FiniteMdp> {
    match gen_random(&RandomSpec::new(seed, n_states, n_actions, horizon))? {
        Model::Mdp(m) => Ok(m),
        Model::Pomdp(p) => Ok(p.mdp().clone()),
    }
}

/// [`gen_random`] for partially observed models.
pub fn random_pomdp(seed: u64, n_states: usize, n_actions: usize, n_obs: usize, horizon: usize) -> Result<FinitePomdp> {
    match gen_random(&RandomSpec::new(seed, n_states, n_actions, horizon).with_obs(n_obs))? {
        Model::Pomdp(p) => Ok(p),
        Model::Mdp(_) => unreachable!("n_obs was set"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_grid_self_loops() {
        let m = gen_gridworld(1, 1, 0, 0.3, 2).unwrap();
        for a in 0..4 {
            assert_eq!(m.transition_row(a, 0), &[1.0]);
        }
    }

    #[test]
    fn slip_splits_laterally() {
        let m = gen_gridworld(3, 3, 8, 0.2, 2).unwrap();
        // east from the center: intended 5, lateral north 1 and south 7
        let row = m.transition_row(1, 4);
        assert!((row[5] - 0.8).abs() < 1e-15);
        assert!((row[1] - 0.1).abs() < 1e-15);
        assert!((row[7] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(gen_gridworld(11, 10, 0, 0.0, 1), Err(Error::OutOfRange { .. })));
        assert!(matches!(gen_gridworld(2, 2, 0, 0.6, 1), Err(Error::OutOfRange { .. })));
        assert!(matches!(gen_tmaze(0.4, 3), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn random_is_reproducible() {
        let spec = RandomSpec::new(7, 4, 3, 3).with_obs(2).with_sparsity(0.3);
        assert_eq!(gen_random(&spec).unwrap(), gen_random(&spec).unwrap());
        let other = RandomSpec { seed: 8, ..spec };
        assert_ne!(gen_random(&other).unwrap(), gen_random(&RandomSpec::new(7, 4, 3, 3).with_obs(2)).unwrap());
    }

    #[test]
    fn tmaze_cue_is_noisy() {
        let m = gen_tmaze(0.8, 3).unwrap();
        let close = |row: &[f64], want: [f64; 6]| row.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-15);
        assert!(close(m.likelihood_row(2), [0.0, 0.8, 0.2, 0.0, 0.0, 0.0]));
        assert!(close(m.likelihood_row(3), [0.0, 0.2, 0.8, 0.0, 0.0, 0.0]));
    }
}
