//! Seeded rollouts of any planner in any environment.

use std::collections::HashMap;
use std::time::Instant;

use efe_core::aif::{EfeMode, PreferenceMode, Preferences};
use efe_core::model::Model;
use efe_core::pomdp::{exact_posterior, sophisticated_plan_pomdp, standard_plan_pomdp, BeliefNode};
use efe_core::rollout::{rollout_mdp, rollout_pomdp};
use efe_core::{Episode, FinitePomdp, Guards};
use serde::{Deserialize, Serialize};

use crate::config::{beta_of, ExperimentConfig, Scheme};
use crate::error::{PlannerError, Result};
use crate::io::{csv_with_schema, write_json, write_jsonl, write_text};
use crate::policy::induced_policy;

pub const SIMULATE_SCHEMA: &str = "efe-planner simulate v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRow {
    pub model: String,
    pub scheme: Scheme,
    pub beta: Option<f64>,
    pub episodes: usize,
    pub mean_reward: f64,
    /// Sample standard deviation of the total reward.
    pub std_reward: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub model: String,
    pub scheme: Scheme,
    pub beta: Option<f64>,
    pub seed: u64,
    #[serde(flatten)]
    pub episode: Episode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema: String,
    pub rows: Vec<SimulationRow>,
    #[serde(skip)]
    pub episodes: Vec<EpisodeRecord>,
}

impl SimulationReport {
    pub fn to_csv(&self) -> Result<String> {
        csv_with_schema(SIMULATE_SCHEMA, &self.rows)
    }
}

/// Seed of episode `k` under base seed `seed`.
pub fn episode_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64)
}

/// Plays the sophisticated POMDP policy by walking the belief tree rooted
/// at the posterior after the first observation.
struct TreeAgent<'a> {
    pomdp: &'a FinitePomdp,
    prefs: &'a Preferences,
    guards: Guards,
    roots: HashMap<usize, BeliefNode>,
}

impl TreeAgent<'_> {
    fn act(&mut self, observations: &[usize], actions: &[usize]) -> efe_core::Result<usize> {
        let o0 = observations[0];
        if !self.roots.contains_key(&o0) {
            let post = exact_posterior(self.pomdp, &[], &observations[..1])?;
            let plan = sophisticated_plan_pomdp(self.pomdp, self.prefs, post.current(), &self.guards)?;
            self.roots.insert(o0, plan.root);
        }
        let mut node = &self.roots[&o0];
        for (k, &a) in actions.iter().enumerate() {
            node = node
                .child(a, observations[k + 1])
                .ok_or(efe_core::Error::ImpossibleObservation { time: k + 1 })?;
        }
        Ok(node.argmin[0])
    }
}

fn mean_std(totals: &[f64]) -> (f64, f64) {
    let n = totals.len() as f64;
    let mean = totals.iter().sum::<f64>() / n;
    if totals.len() < 2 {
        return (mean, 0.0);
    }
    let var = totals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Episodes of one scheme in one model, `episodes` per seed.
pub fn simulate_scheme(
    model: &Model,
    scheme: Scheme,
    mode: PreferenceMode,
    efe: EfeMode,
    guards: &Guards,
    seeds: &[u64],
    episodes: usize,
) -> Result<Vec<(u64, Episode)>> {
    let mut out = Vec::with_capacity(seeds.len() * episodes);
    let seeds_iter = || seeds.iter().flat_map(|&seed| (0..episodes).map(move |k| episode_seed(seed, k)));
    match model {
        Model::Mdp(m) => {
            let pol = induced_policy(m, scheme, mode, efe, guards)?;
            for seed in seeds_iter() {
                out.push((seed, rollout_mdp(m, |t, s| Ok(pol.action(t, s)), seed)?));
            }
        }
        Model::Pomdp(p) => {
            let prefs = Preferences::new(p.mdp().reward(), mode)?;
            match scheme {
                Scheme::BackwardInduction => {
                    return Err(PlannerError::config(
                        "backward induction needs the true state; use it on fully observed models",
                    ))
                }
                Scheme::Standard => {
                    let mut cache: HashMap<(Vec<usize>, Vec<usize>), usize> = HashMap::new();
                    for seed in seeds_iter() {
                        let ep = rollout_pomdp(
                            p,
                            |ctx| {
                                let key = (ctx.actions.to_vec(), ctx.observations.to_vec());
                                if let Some(&a) = cache.get(&key) {
                                    return Ok(a);
                                }
                                let plan = standard_plan_pomdp(p, &prefs, ctx.actions, ctx.observations, efe, guards)?;
                                cache.insert(key, plan.chosen);
                                Ok(plan.chosen)
                            },
                            seed,
                        )?;
                        out.push((seed, ep));
                    }
                }
                Scheme::Sophisticated => {
                    let mut agent = TreeAgent {
                        pomdp: p,
                        prefs: &prefs,
                        guards: *guards,
                        roots: HashMap::new(),
                    };
                    for seed in seeds_iter() {
                        let ep = rollout_pomdp(p, |ctx| agent.act(ctx.observations, ctx.actions), seed)?;
                        out.push((seed, ep));
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn run_simulate(cfg: &ExperimentConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    if cfg.episodes == 0 || cfg.seeds.is_empty() {
        return Err(PlannerError::config("simulate needs at least one seed and one episode"));
    }
    let models = cfg.load_models()?;
    let mut report = SimulationReport {
        schema: SIMULATE_SCHEMA.to_string(),
        rows: Vec::new(),
        episodes: Vec::new(),
    };
    for (name, model) in &models {
        for &scheme in &cfg.schemes {
            let modes = if scheme == Scheme::BackwardInduction {
                vec![PreferenceMode::ZeroTempLimit]
            } else {
                cfg.preference_modes()
            };
            for mode in modes {
                let start = Instant::now();
                let eps = simulate_scheme(model, scheme, mode, cfg.efe, &cfg.guards, &cfg.seeds, cfg.episodes)?;
                let elapsed = start.elapsed().as_secs_f64() * 1e3;
                let totals: Vec<f64> = eps.iter().map(|(_, e)| e.total_reward()).collect();
                let (mean, std) = mean_std(&totals);
                let beta = if scheme == Scheme::BackwardInduction { None } else { beta_of(mode) };
                report.rows.push(SimulationRow {
                    model: name.clone(),
                    scheme,
                    beta,
                    episodes: totals.len(),
                    mean_reward: mean,
                    std_reward: std,
                    runtime_ms: cfg.record_runtime.then_some(elapsed),
                });
                report.episodes.extend(eps.into_iter().map(|(seed, episode)| EpisodeRecord {
                    model: name.clone(),
                    scheme,
                    beta,
                    seed,
                    episode,
                }));
            }
        }
    }
    if let Some(p) = &cfg.output.csv {
        write_text(p, &report.to_csv()?)?;
    }
    if let Some(p) = &cfg.output.json {
        write_json(p, &report)?;
    }
    if let Some(p) = &cfg.output.episodes {
        write_jsonl(p, &report.episodes)?;
    }
    Ok(report)
}
