//! Experiment configuration files.

use std::path::{Path, PathBuf};

use efe_core::aif::{EfeMode, PreferenceMode, Preferences};
use efe_core::envs::{EnvSpec, RandomSpec};
use efe_core::model::Model;
use efe_core::Guards;
use serde::{Deserialize, Serialize};

use crate::error::{PlannerError, Result};
use crate::io::read_model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Standard,
    Sophisticated,
    BackwardInduction,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Standard => "standard",
            Scheme::Sophisticated => "sophisticated",
            Scheme::BackwardInduction => "backward_induction",
        }
    }
}

/// `count` random models with consecutive seeds from `first_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSuite {
    #[serde(default)]
    pub first_seed: u64,
    pub count: usize,
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    #[serde(default)]
    pub n_obs: Option<usize>,
    #[serde(default)]
    pub reward_ties: bool,
    #[serde(default)]
    pub sparsity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    Path(PathBuf),
    Env(EnvSpec),
    RandomSuite(RandomSuite),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
    /// Episode stream (simulate only).
    #[serde(default)]
    pub episodes: Option<PathBuf>,
}

fn default_efe() -> EfeMode {
    EfeMode::Exact
}

fn default_limit() -> bool {
    true
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_episodes() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub models: Vec<ModelSource>,
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_efe")]
    pub efe: EfeMode,
    /// Finite inverse temperatures, run in addition to the limit when `limit` is set.
    #[serde(default)]
    pub betas: Vec<f64>,
    #[serde(default = "default_limit")]
    pub limit: bool,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub guards: Guards,
    /// Adds wall-clock columns; reports are then no longer reproducible byte for byte.
    #[serde(default)]
    pub record_runtime: bool,
}

impl ExperimentConfig {
    pub fn new(models: Vec<ModelSource>, schemes: Vec<Scheme>) -> Self {
        Self {
            models,
            schemes,
            efe: default_efe(),
            betas: Vec::new(),
            limit: true,
            seeds: default_seeds(),
            episodes: default_episodes(),
            output: OutputPaths::default(),
            guards: Guards::default(),
            record_runtime: false,
        }
    }

    /// Relative model and output paths resolve against the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: Self = crate::io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for m in cfg.models.iter_mut() {
            if let ModelSource::Path(p) = m {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        let out = &mut cfg.output;
        for p in [&mut out.csv, &mut out.json, &mut out.episodes].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(PlannerError::config("at least one scheme is required"));
        }
        if self.models.is_empty() {
            return Err(PlannerError::config("at least one model is required"));
        }
        if !self.limit && self.betas.is_empty() {
            return Err(PlannerError::config("enable the limit or give at least one beta"));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(PlannerError::config(format!("beta must be positive and finite, got {b}")));
        }
        if self.guards.sequences == 0 || self.guards.tree == 0 {
            return Err(PlannerError::config("guards must be positive"));
        }
        if let EfeMode::MeanField { prune: Some(t) } = self.efe {
            if !(t >= 0.0) {
                return Err(PlannerError::config(format!("pruning threshold must be non-negative, got {t}")));
            }
        }
        Ok(())
    }

    /// Preference settings in report order: the limit first, then betas ascending.
    pub fn preference_modes(&self) -> Vec<PreferenceMode> {
        let mut betas = self.betas.clone();
        betas.sort_by(f64::total_cmp);
        betas.dedup();
        let mut out = Vec::new();
        if self.limit {
            out.push(PreferenceMode::ZeroTempLimit);
        }
        out.extend(betas.into_iter().map(|beta| PreferenceMode::Finite { beta }));
        out
    }

    /// Every model in order, with a display name.
    pub fn load_models(&self) -> Result<Vec<(String, Model)>> {
        let mut out = Vec::new();
        for source in &self.models {
            match source {
                ModelSource::Path(p) => out.push((p.display().to_string(), read_model(p)?)),
                ModelSource::Env(spec) => out.push((env_name(spec), spec.build()?)),
                ModelSource::RandomSuite(suite) => {
                    for k in 0..suite.count {
                        let seed = suite.first_seed + k as u64;
                        let mut spec = RandomSpec::new(seed, suite.n_states, suite.n_actions, suite.horizon);
                        spec.n_obs = suite.n_obs;
                        spec.reward_ties = suite.reward_ties;
                        spec.sparsity = suite.sparsity;
                        let name = format!(
                            "random-s{}-a{}-t{}-seed{}",
                            suite.n_states, suite.n_actions, suite.horizon, seed
                        );
                        out.push((name, efe_core::envs::gen_random(&spec)?));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn env_name(spec: &EnvSpec) -> String {
    match spec {
        EnvSpec::Gridworld {
            width,
            height,
            reward_cell,
            slip,
            horizon,
            ..
        } => format!("gridworld-{width}x{height}-r{reward_cell}-slip{slip}-t{horizon}"),
        EnvSpec::Tmaze {
            cue_reliability,
            horizon,
            identity_likelihood,
        } => {
            let id = if *identity_likelihood { "-identity" } else { "" };
            format!("tmaze-rho{cue_reliability}-t{horizon}{id}")
        }
        EnvSpec::Random(r) => format!("random-s{}-a{}-t{}-seed{}", r.n_states, r.n_actions, r.horizon, r.seed),
    }
}

pub fn preferences(reward: &[f64], mode: PreferenceMode) -> Result<Preferences> {
    Ok(Preferences::new(reward, mode)?)
}

/// `None` for the limit.
pub fn beta_of(mode: PreferenceMode) -> Option<f64> {
    match mode {
        PreferenceMode::Finite { beta } => Some(beta),
        PreferenceMode::ZeroTempLimit => None,
    }
}
