//! State-action mappings induced by each planning scheme.

use efe_core::aif::{sophisticated_table, standard_plan, EfeMode, PreferenceMode, Preferences};
use efe_core::dp::backward_induction;
use efe_core::{FiniteMdp, Guards, StateActionPolicy, TIE_TOL};

use crate::config::Scheme;
use crate::error::Result;

/// The action a scheme takes at every `(t, s)`, with the size of the set it chose from.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedPolicy {
    /// `[t][s]`
    pub choices: Vec<Vec<usize>>,
    /// `[t][s]`
    pub tie_sizes: Vec<Vec<usize>>,
}

impl InducedPolicy {
    pub fn action(&self, t: usize, s: usize) -> usize {
        self.choices[t][s]
    }

    pub fn to_policy(&self, mdp: &FiniteMdp) -> StateActionPolicy {
        StateActionPolicy::deterministic(mdp, |t, s| self.choices[t][s])
    }
}

/// Queries the scheme at every `(t, s)`. Backward induction ignores `mode` and `efe`.
pub fn induced_policy(
    mdp: &FiniteMdp,
    scheme: Scheme,
    mode: PreferenceMode,
    efe: EfeMode,
    guards: &Guards,
) -> Result<InducedPolicy> {
    let (t_max, ns) = (mdp.horizon(), mdp.n_states());
    let mut choices = vec![vec![0; ns]; t_max];
    let mut tie_sizes = vec![vec![0; ns]; t_max];
    match scheme {
        Scheme::BackwardInduction => {
            let bi = backward_induction(mdp, TIE_TOL);
            for t in 0..t_max {
                for s in 0..ns {
                    choices[t][s] = bi.canonical_action(t, s);
                    tie_sizes[t][s] = bi.argmax_sets.get(t, s).len();
                }
            }
        }
        Scheme::Sophisticated => {
            let prefs = Preferences::new(mdp.reward(), mode)?;
            let table = sophisticated_table(mdp, &prefs, 0)?;
            for t in 0..t_max {
                for s in 0..ns {
                    choices[t][s] = table.canonical(t, s);
                    tie_sizes[t][s] = table.argmin(t, s).len();
                }
            }
        }
        Scheme::Standard => {
            let prefs = Preferences::new(mdp.reward(), mode)?;
            for t in 0..t_max {
                for s in 0..ns {
                    let plan = standard_plan(mdp, &prefs, s, t, efe, guards)?;
                    choices[t][s] = plan.chosen;
                    tie_sizes[t][s] = plan.winning_set.len();
                }
            }
        }
    }
    Ok(InducedPolicy { choices, tie_sizes })
}
