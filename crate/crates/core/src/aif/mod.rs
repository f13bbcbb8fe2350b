//! Active inference on fully observed models.
//!
//! Expected free energy (EFE) scores come in two flavours. At a finite inverse
//! temperature `beta` the score is a number of nats. In the zero-temperature
//! limit the score is the pair `(expected_reward, residual)` from the
//! asymptotic expansion `G = -beta E[R] + residual + const`, ordered
//! lexicographically: higher expected reward first, then lower residual.
//! This keeps the limit exact instead of approximating it with a large beta.

mod efe;
mod preferences;
mod sophisticated;
mod standard;

use alloc::vec::Vec;
use core::cmp::Ordering;

pub use efe::{efe_exact, efe_mean_field, predictive_dist, score_joint, Prune};
pub(crate) use efe::predictive_from_belief;
pub use preferences::{build_preferences, PreferenceMode, Preferences};
pub use sophisticated::{sophisticated_plan, sophisticated_table, unroll_efe_check, EfeTable, SophisticatedPlan};
pub use standard::{marginalize_first_action, standard_plan, EfeMode, FirstActionLimit, StandardPlan};
pub(crate) use standard::{plan_over_sequences, score_sequence, sequence_admissible};

/// Expected free energy of an action or action sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum EfeScore {
    /// `G` in nats at a finite inverse temperature.
    Finite { g: f64 },
    /// Zero-temperature limit: `G ~ -beta * expected_reward + residual`.
    Limit { expected_reward: f64, residual: f64 },
    /// Abandoned by pruning; ordered above every other score.
    Pruned,
}

impl EfeScore {
    pub fn finite(g: f64) -> Self {
        EfeScore::Finite { g }
    }

    pub fn limit(expected_reward: f64, residual: f64) -> Self {
        EfeScore::Limit {
            expected_reward,
            residual,
        }
    }

    pub fn is_pruned(&self) -> bool {
        matches!(self, EfeScore::Pruned)
    }

    /// The finite value, if any.
    pub fn g(&self) -> Option<f64> {
        match *self {
            EfeScore::Finite { g } => Some(g),
            _ => None,
        }
    }

    /// Orders scores so that `Less` means lower expected free energy.
    /// Components closer than `tol` compare equal.
    pub fn compare(&self, other: &Self, tol: f64) -> Ordering {
        use EfeScore::*;
        match (*self, *other) {
            (Pruned, Pruned) => Ordering::Equal,
            (Pruned, _) => Ordering::Greater,
            (_, Pruned) => Ordering::Less,
            (Finite { g: a }, Finite { g: b }) => cmp_tol(a, b, tol),
            (
                Limit {
                    expected_reward: ra,
                    residual: ha,
                },
                Limit {
                    expected_reward: rb,
                    residual: hb,
                },
            ) => cmp_tol(rb, ra, tol).then_with(|| cmp_tol(ha, hb, tol)),
            (Finite { .. }, Limit { .. }) => Ordering::Less,
            (Limit { .. }, Finite { .. }) => Ordering::Greater,
        }
    }

    /// Componentwise largest absolute difference; infinite for mismatched kinds.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        use EfeScore::*;
        match (*self, *other) {
            (Pruned, Pruned) => 0.0,
            (Finite { g: a }, Finite { g: b }) => diff(a, b),
            (
                Limit {
                    expected_reward: ra,
                    residual: ha,
                },
                Limit {
                    expected_reward: rb,
                    residual: hb,
                },
            ) => diff(ra, rb).max(diff(ha, hb)),
            _ => f64::INFINITY,
        }
    }

    fn add(self, other: Self) -> Self {
        use EfeScore::*;
        match (self, other) {
            (Finite { g: a }, Finite { g: b }) => Finite { g: a + b },
            (
                Limit {
                    expected_reward: ra,
                    residual: ha,
                },
                Limit {
                    expected_reward: rb,
                    residual: hb,
                },
            ) => Limit {
                expected_reward: ra + rb,
                residual: ha + hb,
            },
            _ => Pruned,
        }
    }

    fn scale(self, w: f64) -> Self {
        match self {
            EfeScore::Finite { g } => EfeScore::Finite { g: w * g },
            EfeScore::Limit {
                expected_reward,
                residual,
            } => EfeScore::Limit {
                expected_reward: w * expected_reward,
                residual: w * residual,
            },
            EfeScore::Pruned => EfeScore::Pruned,
        }
    }

    fn zero_like(&self) -> Self {
        match self {
            EfeScore::Finite { .. } => EfeScore::Finite { g: 0.0 },
            _ => EfeScore::Limit {
                expected_reward: 0.0,
                residual: 0.0,
            },
        }
    }
}

fn diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

fn cmp_tol(a: f64, b: f64, tol: f64) -> Ordering {
    if a == b || (a - b).abs() <= tol {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Lexicographic argmin set over `candidates` with tolerance `tol`.
///
/// In the limit mode the expected-reward tie set is formed first and the
/// residual is minimized within it, so tolerances never chain across levels.
pub fn argmin_set(scores: &[EfeScore], candidates: impl Iterator<Item = usize> + Clone, tol: f64) -> Vec<usize> {
    let limit = candidates
        .clone()
        .any(|a| matches!(scores[a], EfeScore::Limit { .. }));
    if limit {
        let er = |a: usize| match scores[a] {
            EfeScore::Limit { expected_reward, .. } => expected_reward,
            _ => f64::NEG_INFINITY,
        };
        let res = |a: usize| match scores[a] {
            EfeScore::Limit { residual, .. } => residual,
            _ => f64::INFINITY,
        };
        let best_er = candidates.clone().map(er).fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = candidates.filter(|&a| er(a) >= best_er - tol).collect();
        let best_res = tied.iter().map(|&a| res(a)).fold(f64::INFINITY, f64::min);
        tied.into_iter().filter(|&a| res(a) <= best_res + tol).collect()
    } else {
        let g = |a: usize| match scores[a] {
            EfeScore::Finite { g } => g,
            _ => f64::INFINITY,
        };
        let best = candidates.clone().map(g).fold(f64::INFINITY, f64::min);
        if best == f64::INFINITY {
            return candidates.filter(|&a| !scores[a].is_pruned()).collect();
        }
        candidates.filter(|&a| g(a) <= best + tol).collect()
    }
}

/// Uniform average of `scores` over `set`.
pub(crate) fn mean_over(scores: &[EfeScore], set: &[usize]) -> EfeScore {
    let mut acc = scores[set[0]].zero_like();
    for &a in set {
        acc = acc.add(scores[a]);
    }
    acc.scale(1.0 / set.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn limit_order_is_reward_then_residual() {
        let a = EfeScore::limit(1.0, 0.5);
        let b = EfeScore::limit(0.9, -10.0);
        let c = EfeScore::limit(1.0, 0.2);
        assert_eq!(a.compare(&b, 1e-9), Ordering::Less);
        assert_eq!(c.compare(&a, 1e-9), Ordering::Less);
        assert_eq!(EfeScore::Pruned.compare(&a, 1e-9), Ordering::Greater);
        assert_eq!(argmin_set(&[a, b, c], 0..3, 1e-9), vec![2]);
    }

    #[test]
    fn finite_ties_within_tolerance() {
        let s = [EfeScore::finite(1.0), EfeScore::finite(1.0 + 1e-12), EfeScore::finite(0.5)];
        assert_eq!(argmin_set(&s, 0..2, 1e-9), vec![0, 1]);
        assert_eq!(argmin_set(&s, 0..3, 1e-9), vec![2]);
    }
}
