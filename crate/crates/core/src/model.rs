//! Discrete generative models and the index-level objects planners exchange.
//!
//! States, actions and observations are dense 0-based indices. Transition
//! tensors are stored `[action][from][to]`, so each per-action slice is a
//! row-stochastic matrix; likelihoods are stored `[state][observation]`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dist::{normalize_input, Categorical};
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ModelKind {
    Mdp,
    Pomdp,
}

/// Optional human-readable names. Never consulted by the algorithms.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Labels {
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub states: Option<Vec<String>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub actions: Option<Vec<String>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub observations: Option<Vec<String>>,
}

/// An unvalidated model description, as parsed from a model file.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawModel {
    #[cfg_attr(feature = "serde", serde(rename = "type"))]
    pub kind: ModelKind,
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    /// `[action][from][to]`
    pub transition: Vec<Vec<Vec<f64>>>,
    pub initial: Vec<f64>,
    pub reward: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub n_obs: Option<usize>,
    /// `[state][observation]`
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub likelihood: Option<Vec<Vec<f64>>>,
    /// `[state][action]`, `true` where the action is admissible.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub action_mask: Option<Vec<Vec<bool>>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub labels: Option<Labels>,
}

/// A validated finite-horizon MDP with state-dependent reward.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    transition: Vec<f64>,
    initial: Categorical,
    reward: Vec<f64>,
    mask: Option<Vec<bool>>,
    labels: Option<Labels>,
}

/// A validated finite-horizon POMDP: an MDP plus an observation likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePomdp {
    mdp: FiniteMdp,
    n_obs: usize,
    likelihood: Vec<f64>,
    row_entropy: Vec<f64>,
}

/// Either kind of validated model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Mdp(FiniteMdp),
    Pomdp(FinitePomdp),
}

impl Model {
    pub fn mdp(&self) -> &FiniteMdp {
        match self {
            Model::Mdp(m) => m,
            Model::Pomdp(p) => p.mdp(),
        }
    }

    pub fn to_raw(&self) -> RawModel {
        match self {
            Model::Mdp(m) => m.to_raw(),
            Model::Pomdp(p) => p.to_raw(),
        }
    }
}

/// Validates a raw description of either kind.
pub fn validate_model(raw: &RawModel) -> Result<Model> {
    match raw.kind {
        ModelKind::Mdp => validate_mdp(raw).map(Model::Mdp),
        ModelKind::Pomdp => validate_pomdp(raw).map(Model::Pomdp),
    }
}

/// Validates the MDP part of `raw` (observation fields are ignored).
pub fn validate_mdp(raw: &RawModel) -> Result<FiniteMdp> {
    let (ns, na) = (raw.n_states, raw.n_actions);
    if ns == 0 {
        return Err(Error::dims("n_states", 1, 0));
    }
    if na == 0 {
        return Err(Error::dims("n_actions", 1, 0));
    }
    if raw.horizon == 0 {
        return Err(Error::dims("horizon", 1, 0));
    }
    if raw.transition.len() != na {
        return Err(Error::dims("transition actions", na, raw.transition.len()));
    }
    let mut transition = Vec::with_capacity(na * ns * ns);
    for (a, slice) in raw.transition.iter().enumerate() {
        if slice.len() != ns {
            return Err(Error::dims("transition rows", ns, slice.len()));
        }
        for (s, row) in slice.iter().enumerate() {
            if row.len() != ns {
                return Err(Error::dims("transition columns", ns, row.len()));
            }
            let what = alloc::format!("transition[{a}][{s}]");
            transition.extend(normalize_input(&what, row.clone())?);
        }
    }
    if raw.initial.len() != ns {
        return Err(Error::dims("initial", ns, raw.initial.len()));
    }
    let initial = Categorical::from_input("initial", raw.initial.clone())?;
    if raw.reward.len() != ns {
        return Err(Error::dims("reward", ns, raw.reward.len()));
    }
    if let Some(state) = raw.reward.iter().position(|r| !r.is_finite()) {
        return Err(Error::NonFiniteReward { state });
    }
    let mask = match &raw.action_mask {
        None => None,
        Some(rows) => {
            if rows.len() != ns {
                return Err(Error::dims("action_mask rows", ns, rows.len()));
            }
            let mut flat = Vec::with_capacity(ns * na);
            for (s, row) in rows.iter().enumerate() {
                if row.len() != na {
                    return Err(Error::dims("action_mask columns", na, row.len()));
                }
                if !row.iter().any(|&b| b) {
                    return Err(Error::NoAdmissibleAction { state: s });
                }
                flat.extend_from_slice(row);
            }
            // an all-true mask is the same as no mask
            if flat.iter().all(|&b| b) {
                None
            } else {
                Some(flat)
            }
        }
    };
    Ok(FiniteMdp {
        n_states: ns,
        n_actions: na,
        horizon: raw.horizon,
        transition,
        initial,
        reward: raw.reward.clone(),
        mask,
        labels: raw.labels.clone(),
    })
}

pub fn validate_pomdp(raw: &RawModel) -> Result<FinitePomdp> {
    let mdp = validate_mdp(raw)?;
    let n_obs = raw.n_obs.ok_or_else(|| Error::dims("n_obs", 1, 0))?;
    if n_obs == 0 {
        return Err(Error::dims("n_obs", 1, 0));
    }
    let rows = raw
        .likelihood
        .as_ref()
        .ok_or_else(|| Error::dims("likelihood rows", mdp.n_states, 0))?;
    if rows.len() != mdp.n_states {
        return Err(Error::dims("likelihood rows", mdp.n_states, rows.len()));
    }
    let mut likelihood = Vec::with_capacity(mdp.n_states * n_obs);
    for (s, row) in rows.iter().enumerate() {
        if row.len() != n_obs {
            return Err(Error::dims("likelihood columns", n_obs, row.len()));
        }
        let what = alloc::format!("likelihood[{s}]");
        likelihood.extend(normalize_input(&what, row.clone())?);
    }
    Ok(FinitePomdp::assemble(mdp, n_obs, likelihood))
}

impl FiniteMdp {
    /// Convenience constructor from nested `[action][from][to]` rows.
    pub fn new(
        transition: Vec<Vec<Vec<f64>>>,
        initial: Vec<f64>,
        reward: Vec<f64>,
        horizon: usize,
    ) -> Result<Self> {
        let n_states = reward.len();
        let n_actions = transition.len();
        validate_mdp(&RawModel {
            kind: ModelKind::Mdp,
            n_states,
            n_actions,
            horizon,
            transition,
            initial,
            reward,
            n_obs: None,
            likelihood: None,
            action_mask: None,
            labels: None,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial(&self) -> &Categorical {
        &self.initial
    }

    pub fn reward(&self) -> &[f64] {
        &self.reward
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    /// `P(. | s, a)`.
    #[inline]
    pub fn transition_row(&self, action: usize, state: usize) -> &[f64] {
        let start = (action * self.n_states + state) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    #[inline]
    pub fn transition(&self, action: usize, from: usize, to: usize) -> f64 {
        self.transition[(action * self.n_states + from) * self.n_states + to]
    }

    #[inline]
    pub fn is_allowed(&self, state: usize, action: usize) -> bool {
        match &self.mask {
            None => action < self.n_actions,
            Some(m) => action < self.n_actions && m[state * self.n_actions + action],
        }
    }

    pub fn has_mask(&self) -> bool {
        self.mask.is_some()
    }

    /// Admissible actions in `state`, ascending.
    pub fn allowed_actions(&self, state: usize) -> impl Iterator<Item = usize> + Clone + '_ {
        (0..self.n_actions).filter(move |&a| self.is_allowed(state, a))
    }

    /// `sum_s dist(s) P(. | s, a)`.
    pub fn push_forward(&self, dist: &[f64], action: usize) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.n_states];
        for (s, &p) in dist.iter().enumerate() {
            if p > 0.0 {
                for (o, &t) in out.iter_mut().zip(self.transition_row(action, s)) {
                    *o += p * t;
                }
            }
        }
        out
    }

    /// Same model with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::dims("horizon", 1, 0));
        }
        let mut m = self.clone();
        m.horizon = horizon;
        Ok(m)
    }

    /// Same model with a different reward vector.
    pub fn with_reward(&self, reward: Vec<f64>) -> Result<Self> {
        if reward.len() != self.n_states {
            return Err(Error::dims("reward", self.n_states, reward.len()));
        }
        if let Some(state) = reward.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFiniteReward { state });
        }
        let mut m = self.clone();
        m.reward = reward;
        Ok(m)
    }

    /// Same model with an admissibility mask `[state][action]`.
    pub fn with_mask(&self, mask: Vec<Vec<bool>>) -> Result<Self> {
        let mut raw = self.to_raw();
        raw.action_mask = Some(mask);
        validate_mdp(&raw)
    }

    /// Same model with display labels.
    pub fn with_labels(&self, labels: Labels) -> Self {
        let mut m = self.clone();
        m.labels = Some(labels);
        m
    }

    pub fn to_raw(&self) -> RawModel {
        let (ns, na) = (self.n_states, self.n_actions);
        let transition = (0..na)
            .map(|a| (0..ns).map(|s| self.transition_row(a, s).to_vec()).collect())
            .collect();
        RawModel {
            kind: ModelKind::Mdp,
            n_states: ns,
            n_actions: na,
            horizon: self.horizon,
            transition,
            initial: self.initial.probs().to_vec(),
            reward: self.reward.clone(),
            n_obs: None,
            likelihood: None,
            action_mask: self
                .mask
                .as_ref()
                .map(|m| m.chunks(na).map(|r| r.to_vec()).collect()),
            labels: self.labels.clone(),
        }
    }

    pub(crate) fn check_state(&self, state: usize) -> Result<()> {
        if state >= self.n_states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: state,
                bound: self.n_states,
            });
        }
        Ok(())
    }

    pub(crate) fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.n_actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: action,
                bound: self.n_actions,
            });
        }
        Ok(())
    }
}

impl FinitePomdp {
    fn assemble(mdp: FiniteMdp, n_obs: usize, likelihood: Vec<f64>) -> Self {
        let row_entropy = likelihood.chunks(n_obs).map(math::entropy).collect();
        Self {
            mdp,
            n_obs,
            likelihood,
            row_entropy,
        }
    }

    /// Attaches a `[state][observation]` likelihood to an MDP.
    pub fn new(mdp: FiniteMdp, likelihood: Vec<Vec<f64>>) -> Result<Self> {
        let mut raw = mdp.to_raw();
        raw.kind = ModelKind::Pomdp;
        raw.n_obs = likelihood.first().map(|r| r.len());
        raw.likelihood = Some(likelihood);
        validate_pomdp(&raw)
    }

    /// The same MDP observed through an identity likelihood.
    pub fn fully_observed(mdp: FiniteMdp) -> Self {
        let n = mdp.n_states;
        let mut likelihood = alloc::vec![0.0; n * n];
        for s in 0..n {
            likelihood[s * n + s] = 1.0;
        }
        Self::assemble(mdp, n, likelihood)
    }

    pub fn mdp(&self) -> &FiniteMdp {
        &self.mdp
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn n_states(&self) -> usize {
        self.mdp.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.mdp.n_actions
    }

    pub fn horizon(&self) -> usize {
        self.mdp.horizon
    }

    /// `P(. | s)`.
    #[inline]
    pub fn likelihood_row(&self, state: usize) -> &[f64] {
        &self.likelihood[state * self.n_obs..(state + 1) * self.n_obs]
    }

    #[inline]
    pub fn likelihood(&self, state: usize, obs: usize) -> f64 {
        self.likelihood[state * self.n_obs + obs]
    }

    /// `H[P(o | s)]` for every state.
    pub fn observation_entropy(&self) -> &[f64] {
        &self.row_entropy
    }

    /// Same model with a replacement likelihood.
    pub fn with_likelihood(&self, likelihood: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.mdp.clone(), likelihood)
    }

    pub fn to_raw(&self) -> RawModel {
        let mut raw = self.mdp.to_raw();
        raw.kind = ModelKind::Pomdp;
        raw.n_obs = Some(self.n_obs);
        raw.likelihood = Some(self.likelihood.chunks(self.n_obs).map(|r| r.to_vec()).collect());
        raw
    }

    pub(crate) fn check_obs(&self, obs: usize) -> Result<()> {
        if obs >= self.n_obs {
            return Err(Error::IndexOutOfRange {
                what: "observation",
                index: obs,
                bound: self.n_obs,
            });
        }
        Ok(())
    }
}

/// A time-indexed conditional action distribution `Pi(a | s, t)`, `t = 0..T-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateActionPolicy {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    table: Vec<f64>,
}

impl StateActionPolicy {
    /// `table` is flat `[time][state][action]`; every row must be a distribution.
    pub fn new(horizon: usize, n_states: usize, n_actions: usize, table: Vec<f64>) -> Result<Self> {
        let expected = horizon * n_states * n_actions;
        if table.len() != expected || expected == 0 {
            return Err(Error::dims("policy table", expected, table.len()));
        }
        for (i, row) in table.chunks(n_actions).enumerate() {
            let what = alloc::format!("policy row (t={}, s={})", i / n_states, i % n_states);
            crate::dist::check_row(&what, row, crate::PROB_TOL)?;
        }
        Ok(Self {
            horizon,
            n_states,
            n_actions,
            table,
        })
    }

    /// Uniform over admissible actions everywhere.
    pub fn uniform(mdp: &FiniteMdp) -> Self {
        Self::from_fn(mdp, |_, s| mdp.allowed_actions(s).collect())
    }

    /// Deterministic policy choosing `choice(t, s)`.
    pub fn deterministic(mdp: &FiniteMdp, mut choice: impl FnMut(usize, usize) -> usize) -> Self {
        Self::from_fn(mdp, |t, s| alloc::vec![choice(t, s)])
    }

    /// Uniform over `sets(t, s)` at each `(t, s)`. Sets must be non-empty.
    pub fn from_fn(mdp: &FiniteMdp, mut sets: impl FnMut(usize, usize) -> Vec<usize>) -> Self {
        let (t_max, ns, na) = (mdp.horizon, mdp.n_states, mdp.n_actions);
        let mut table = alloc::vec![0.0; t_max * ns * na];
        for t in 0..t_max {
            for s in 0..ns {
                let set = sets(t, s);
                assert!(!set.is_empty(), "empty action set at (t={t}, s={s})");
                let w = 1.0 / set.len() as f64;
                for a in set {
                    table[(t * ns + s) * na + a] += w;
                }
            }
        }
        Self {
            horizon: t_max,
            n_states: ns,
            n_actions: na,
            table,
        }
    }

    pub fn from_sets(mdp: &FiniteMdp, sets: &ActionSets) -> Self {
        Self::from_fn(mdp, |t, s| sets.get(t, s).to_vec())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn row(&self, t: usize, s: usize) -> &[f64] {
        let start = (t * self.n_states + s) * self.n_actions;
        &self.table[start..start + self.n_actions]
    }

    #[inline]
    pub fn prob(&self, t: usize, s: usize, a: usize) -> f64 {
        self.table[(t * self.n_states + s) * self.n_actions + a]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Actions with positive probability at `(t, s)`.
    pub fn support(&self, t: usize, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(t, s)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(a, _)| a)
    }

    /// Checks shape and admissibility against `mdp`.
    pub fn check_against(&self, mdp: &FiniteMdp) -> Result<()> {
        if self.horizon != mdp.horizon {
            return Err(Error::dims("policy horizon", mdp.horizon, self.horizon));
        }
        if self.n_states != mdp.n_states {
            return Err(Error::dims("policy states", mdp.n_states, self.n_states));
        }
        if self.n_actions != mdp.n_actions {
            return Err(Error::dims("policy actions", mdp.n_actions, self.n_actions));
        }
        if mdp.has_mask() {
            for t in 0..self.horizon {
                for s in 0..self.n_states {
                    if let Some(a) = self.support(t, s).find(|&a| !mdp.is_allowed(s, a)) {
                        return Err(Error::InadmissibleAction { state: s, action: a });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-`(time, state)` action sets, e.g. argmax or argmin sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSets {
    horizon: usize,
    n_states: usize,
    sets: Vec<Vec<usize>>,
}

impl ActionSets {
    /// `sets` is indexed `[time * n_states + state]`.
    pub fn new(horizon: usize, n_states: usize, sets: Vec<Vec<usize>>) -> Self {
        assert_eq!(sets.len(), horizon * n_states);
        Self {
            horizon,
            n_states,
            sets,
        }
    }

    pub fn get(&self, t: usize, s: usize) -> &[usize] {
        &self.sets[t * self.n_states + s]
    }

    /// Lowest-index member, used as the canonical deterministic choice.
    pub fn canonical(&self, t: usize, s: usize) -> usize {
        self.get(t, s)[0]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Rows `[time][state] -> set`.
    pub fn to_nested(&self) -> Vec<Vec<Vec<usize>>> {
        self.sets
            .chunks(self.n_states)
            .map(|r| r.to_vec())
            .collect()
    }
}

/// A sequence of future actions `a_t, ..., a_{T-1}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ActionSequence(pub Vec<usize>);

impl ActionSequence {
    pub fn new(actions: Vec<usize>) -> Self {
        Self(actions)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn check_against(&self, mdp: &FiniteMdp) -> Result<()> {
        for &a in &self.0 {
            mdp.check_action(a)?;
        }
        Ok(())
    }

    /// Every sequence of `len` actions over `0..n_actions`, lexicographic.
    pub fn enumerate(n_actions: usize, len: usize) -> impl Iterator<Item = ActionSequence> {
        let total = crate::saturating_pow(n_actions, len) as usize;
        (0..total).map(move |k| ActionSequence(crate::dist::decode(k, n_actions, len)))
    }
}

impl From<Vec<usize>> for ActionSequence {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// One sampled run of a model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Episode {
    /// `s_0 .. s_T`
    pub states: Vec<usize>,
    /// `a_0 .. a_{T-1}`
    pub actions: Vec<usize>,
    /// `o_0 .. o_T`, partially observed models only.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub observations: Option<Vec<usize>>,
    /// `R(s_1) .. R(s_T)`; the initial state earns nothing.
    pub rewards: Vec<f64>,
}

impl Episode {
    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

/// `P(s_0) prod_{tau=1..T} P(s_tau | s_{tau-1}, a_{tau-1})`.
pub fn trajectory_probability(mdp: &FiniteMdp, actions: &[usize], states: &[usize]) -> Result<f64> {
    let t_max = mdp.horizon;
    if actions.len() != t_max {
        return Err(Error::len("action sequence", t_max, actions.len()));
    }
    if states.len() != t_max + 1 {
        return Err(Error::len("state trajectory", t_max + 1, states.len()));
    }
    for &s in states {
        mdp.check_state(s)?;
    }
    for &a in actions {
        mdp.check_action(a)?;
    }
    let mut p = mdp.initial.probs()[states[0]];
    for tau in 0..t_max {
        p *= mdp.transition(actions[tau], states[tau], states[tau + 1]);
    }
    Ok(p)
}
