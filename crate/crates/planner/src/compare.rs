//! Scheme-versus-backward-induction comparison reports.

use std::time::Instant;

use efe_core::aif::PreferenceMode;
use efe_core::dp::{backward_induction, evaluate_policy};
use efe_core::model::Model;
use efe_core::{FiniteMdp, TIE_TOL};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{beta_of, ExperimentConfig, Scheme};
use crate::error::{PlannerError, Result};
use crate::io::{csv_with_schema, write_json, write_text};
use crate::policy::{induced_policy, InducedPolicy};

pub const COMPARE_SCHEMA: &str = "efe-planner compare v1";

/// One `(model, scheme, preference)` summary; also the CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    pub scheme: Scheme,
    /// Empty for the zero-temperature limit.
    pub beta: Option<f64>,
    /// Fraction of `(t, s)` where the chosen action is in the optimal set.
    pub agreement: f64,
    /// `max (v* - v)` over `(t, s)`, `t < T`.
    pub max_gap: f64,
    pub mean_gap: f64,
    pub mean_tie_size: f64,
    pub max_tie_size: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDetail {
    #[serde(flatten)]
    pub summary: ComparisonRow,
    /// `[t][s]`
    pub choices: Vec<Vec<usize>>,
    /// `[t][s]`
    pub tie_sizes: Vec<Vec<usize>>,
    /// Value of the induced policy, `[t][s]` for `t = 0..=T`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    /// `v*`, `[t][s]`
    pub optimal_values: Vec<Vec<f64>>,
    /// Backward-induction argmax sets, `[t][s]`
    pub optimal_sets: Vec<Vec<Vec<usize>>>,
}

/// Smallest configured beta from which every larger configured beta picks
/// the same actions as the limit everywhere; `None` if the largest does not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaThreshold {
    pub model: String,
    pub scheme: Scheme,
    pub threshold: Option<f64>,
    pub largest_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema: String,
    pub models: Vec<ModelSummary>,
    pub rows: Vec<ComparisonDetail>,
    pub beta_thresholds: Vec<BetaThreshold>,
}

impl ComparisonReport {
    pub fn summaries(&self) -> Vec<&ComparisonRow> {
        self.rows.iter().map(|r| &r.summary).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        csv_with_schema(COMPARE_SCHEMA, &self.summaries())
    }
}

struct ModelResult {
    summary: ModelSummary,
    rows: Vec<ComparisonDetail>,
    thresholds: Vec<BetaThreshold>,
}

fn compare_model(cfg: &ExperimentConfig, name: &str, mdp: &FiniteMdp) -> Result<ModelResult> {
    let bi = backward_induction(mdp, TIE_TOL);
    let (t_max, ns) = (mdp.horizon(), mdp.n_states());
    let modes = cfg.preference_modes();
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    for &scheme in &cfg.schemes {
        let scheme_modes: Vec<PreferenceMode> = if scheme == Scheme::BackwardInduction {
            vec![PreferenceMode::ZeroTempLimit]
        } else {
            modes.clone()
        };
        let mut induced: Vec<(PreferenceMode, InducedPolicy)> = Vec::new();
        for mode in scheme_modes {
            let start = Instant::now();
            let pol = induced_policy(mdp, scheme, mode, cfg.efe, &cfg.guards)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let values = evaluate_policy(mdp, &pol.to_policy(mdp))?;
            let mut agree = 0usize;
            let mut max_gap = f64::NEG_INFINITY;
            let mut sum_gap = 0.0;
            for t in 0..t_max {
                for s in 0..ns {
                    if bi.argmax_sets.get(t, s).contains(&pol.action(t, s)) {
                        agree += 1;
                    }
                    let gap = bi.values.get(t, s) - values.get(t, s);
                    max_gap = max_gap.max(gap);
                    sum_gap += gap;
                }
            }
            let cells = (t_max * ns) as f64;
            let ties = pol.tie_sizes.iter().flatten();
            let summary = ComparisonRow {
                model: name.to_string(),
                n_states: ns,
                n_actions: mdp.n_actions(),
                horizon: t_max,
                scheme,
                beta: if scheme == Scheme::BackwardInduction { None } else { beta_of(mode) },
                agreement: agree as f64 / cells,
                max_gap,
                mean_gap: sum_gap / cells,
                mean_tie_size: ties.clone().sum::<usize>() as f64 / cells,
                max_tie_size: ties.copied().max().unwrap_or(0),
                runtime_ms: cfg.record_runtime.then_some(elapsed),
            };
            rows.push(ComparisonDetail {
                summary,
                choices: pol.choices.clone(),
                tie_sizes: pol.tie_sizes.clone(),
                values: values.to_nested(),
            });
            induced.push((mode, pol));
        }
        if let Some(t) = beta_threshold(name, scheme, &induced) {
            thresholds.push(t);
        }
    }
    let summary = ModelSummary {
        name: name.to_string(),
        optimal_values: bi.values.to_nested(),
        optimal_sets: bi.argmax_sets.to_nested(),
    };
    Ok(ModelResult {
        summary,
        rows,
        thresholds,
    })
}

fn beta_threshold(name: &str, scheme: Scheme, induced: &[(PreferenceMode, InducedPolicy)]) -> Option<BetaThreshold> {
    let limit = induced
        .iter()
        .find(|(m, _)| *m == PreferenceMode::ZeroTempLimit)
        .map(|(_, p)| p)?;
    let finite: Vec<(f64, &InducedPolicy)> = induced.iter().filter_map(|(m, p)| beta_of(*m).map(|b| (b, p))).collect();
    let largest_beta = finite.last()?.0;
    let mut threshold = None;
    for &(beta, pol) in finite.iter().rev() {
        if pol.choices != limit.choices {
            break;
        }
        threshold = Some(beta);
    }
    Some(BetaThreshold {
        model: name.to_string(),
        scheme,
        threshold,
        largest_beta,
    })
}

/// Runs every scheme on every model and writes the configured outputs.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    let models = cfg.load_models()?;
    let mut mdps = Vec::with_capacity(models.len());
    for (name, model) in models {
        match model {
            Model::Mdp(m) => mdps.push((name, m)),
            Model::Pomdp(_) => {
                return Err(PlannerError::config(format!(
                    "compare needs fully observed models; {name} is partially observed"
                )))
            }
        }
    }
    let results: Vec<ModelResult> = mdps
        .par_iter()
        .map(|(name, m)| compare_model(cfg, name, m))
        .collect::<Result<_>>()?;
    let mut report = ComparisonReport {
        schema: COMPARE_SCHEMA.to_string(),
        models: Vec::new(),
        rows: Vec::new(),
        beta_thresholds: Vec::new(),
    };
    for r in results {
        report.models.push(r.summary);
        report.rows.extend(r.rows);
        report.beta_thresholds.extend(r.thresholds);
    }
    if let Some(p) = &cfg.output.csv {
        write_text(p, &report.to_csv()?)?;
    }
    if let Some(p) = &cfg.output.json {
        write_json(p, &report)?;
    }
    Ok(report)
}
