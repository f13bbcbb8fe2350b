use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// How reward is turned into a preference distribution over states.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case"))]
pub enum PreferenceMode {
    /// `C(s) ∝ exp(beta R(s))`.
    Finite { beta: f64 },
    /// `beta -> inf`, handled analytically through lexicographic scores.
    ZeroTempLimit,
}

/// Preferences over states derived from the reward vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Preferences {
    mode: PreferenceMode,
    reward: Vec<f64>,
    log_c: Vec<f64>,
    max_reward_states: Vec<usize>,
}

/// Alias of [`Preferences::new`].
pub fn build_preferences(reward: &[f64], mode: PreferenceMode) -> Result<Preferences> {
    Preferences::new(reward, mode)
}

impl Preferences {
    pub fn new(reward: &[f64], mode: PreferenceMode) -> Result<Self> {
        if let Some(state) = reward.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFiniteReward { state });
        }
        let log_c = match mode {
            PreferenceMode::Finite { beta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::NonPositiveBeta(beta));
                }
                let scaled: Vec<f64> = reward.iter().map(|&r| beta * r).collect();
                let z = math::log_sum_exp(&scaled);
                scaled.into_iter().map(|x| x - z).collect()
            }
            PreferenceMode::ZeroTempLimit => Vec::new(),
        };
        let r_max = reward.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let max_reward_states = (0..reward.len())
            .filter(|&s| reward[s] >= r_max - crate::PROB_TOL)
            .collect();
        Ok(Self {
            mode,
            reward: reward.to_vec(),
            log_c,
            max_reward_states,
        })
    }

    pub fn finite(reward: &[f64], beta: f64) -> Result<Self> {
        Self::new(reward, PreferenceMode::Finite { beta })
    }

    pub fn limit(reward: &[f64]) -> Result<Self> {
        Self::new(reward, PreferenceMode::ZeroTempLimit)
    }

    pub fn mode(&self) -> PreferenceMode {
        self.mode
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.mode, PreferenceMode::ZeroTempLimit)
    }

    pub fn beta(&self) -> Option<f64> {
        match self.mode {
            PreferenceMode::Finite { beta } => Some(beta),
            PreferenceMode::ZeroTempLimit => None,
        }
    }

    pub fn reward(&self) -> &[f64] {
        &self.reward
    }

    /// `ln C(s)`; only defined at finite beta.
    pub fn log_c(&self) -> Option<&[f64]> {
        if self.is_limit() {
            None
        } else {
            Some(&self.log_c)
        }
    }

    /// `C(s)` at finite beta; in the limit, uniform over the maximum-reward states.
    pub fn c(&self) -> Vec<f64> {
        if self.is_limit() {
            let w = 1.0 / self.max_reward_states.len() as f64;
            let mut c = alloc::vec![0.0; self.reward.len()];
            for &s in &self.max_reward_states {
                c[s] = w;
            }
            c
        } else {
            self.log_c.iter().map(|&l| math::exp(l)).collect()
        }
    }

    pub fn max_reward_states(&self) -> &[usize] {
        &self.max_reward_states
    }

    pub fn n_states(&self) -> usize {
        self.reward.len()
    }

    pub(crate) fn check_states(&self, n_states: usize) -> Result<()> {
        if self.reward.len() != n_states {
            return Err(Error::dims("preferences", n_states, self.reward.len()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_preferences_normalize() {
        let p = Preferences::finite(&[0.0, 1.0, 1.0], 2.0).unwrap();
        let c = p.c();
        assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((c[1] / c[0] - math::exp(2.0)).abs() < 1e-9);
    }

    #[test]
    fn limit_puts_mass_on_maximizers() {
        let p = Preferences::limit(&[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.c(), alloc::vec![0.0, 0.5, 0.5]);
        assert!(p.log_c().is_none());
    }

    #[test]
    fn rejects_bad_beta() {
        assert_eq!(Preferences::finite(&[0.0], 0.0), Err(Error::NonPositiveBeta(0.0)));
        assert!(Preferences::finite(&[0.0], f64::INFINITY).is_err());
        assert!(Preferences::finite(&[0.0], f64::NAN).is_err());
    }
}
