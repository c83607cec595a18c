// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};

/// Half-width of the reward range.
pub const REWARD_BOUND: f64 = 25.0;

/// Centered, scaled reward for one target:
/// `r = -c·(|α* - α_target| - m)`.
///
/// `m` is half the largest possible distance `|α - α_target|` over
/// `α ∈ [0, 1]`, which centers the range on zero, and `c = 25 / m` scales it
/// to exactly `[-25, 25]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSpec {
    pub alpha_target: f64,
    pub m_target: f64,
    pub c_target: f64,
}

impl RewardSpec {
    pub fn for_target(alpha_target: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha_target) {
            return Err(Error::Invariant(format!("target alpha {alpha_target} outside [0,1]")));
        }
        let m_target = alpha_target.max(1.0 - alpha_target) / 2.0;
        Ok(Self {
            alpha_target,
            m_target,
            c_target: REWARD_BOUND / m_target,
        })
    }

    pub fn reward(&self, alpha_last: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha_last) {
            return Err(Error::Invariant(format!("alpha {alpha_last} outside [0,1]")));
        }
        let r = -self.c_target * ((alpha_last - self.alpha_target).abs() - self.m_target);
        Ok(r.clamp(-REWARD_BOUND, REWARD_BOUND))
    }
}

/// `out[t] = Σ_{k ≥ t} γ^{k-t} r[k]`, one backward pass.
pub fn reward_to_go(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (o, r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *o = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn target_point_eight() {
        let s = RewardSpec::for_target(0.8).unwrap();
        assert!((s.m_target - 0.4).abs() < 1e-15);
        assert!((s.c_target - 62.5).abs() < 1e-12);
        assert!((s.reward(0.8).unwrap() - 25.0).abs() < 1e-12);
        assert!((s.reward(0.0).unwrap() + 25.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_target() {
        let s = RewardSpec::for_target(0.5).unwrap();
        assert_eq!(s.m_target, 0.25);
        assert_eq!(s.c_target, 100.0);
        assert_eq!(s.reward(0.5).unwrap(), 25.0);
        assert_eq!(s.reward(1.0).unwrap(), -25.0);
    }

    #[test]
    fn reward_rejects_out_of_range_alpha() {
        let s = RewardSpec::for_target(0.2).unwrap();
        assert!(s.reward(1.01).is_err());
        assert!(s.reward(-0.01).is_err());
        assert!(RewardSpec::for_target(1.5).is_err());
    }

    #[test]
    fn reward_to_go_examples() {
        assert_eq!(reward_to_go(&[1.0, 1.0, 1.0], 0.5), vec![1.75, 1.5, 1.0]);
        assert_eq!(reward_to_go(&[1.0, 1.0, 1.0], 1.0), vec![3.0, 2.0, 1.0]);
        assert_eq!(reward_to_go(&[3.0, -1.0, 2.0], 0.0), vec![3.0, -1.0, 2.0]);
        assert!(reward_to_go(&[], 0.9).is_empty());
    }

    fn direct(rewards: &[f64], gamma: f64) -> Vec<f64> {
        (0..rewards.len())
            .map(|t| (t..rewards.len()).map(|k| gamma.powi((k - t) as i32) * rewards[k]).sum())
            .collect()
    }

    proptest! {
        #[test]
        fn reward_to_go_matches_double_sum(
            rewards in proptest::collection::vec(-25.0f64..25.0, 0..200),
            gamma in 0.0f64..=1.0,
        ) {
            let fast = reward_to_go(&rewards, gamma);
            let slow = direct(&rewards, gamma);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn reward_stays_in_band(target in 0.0f64..=1.0, alpha in 0.0f64..=1.0) {
            let r = RewardSpec::for_target(target).unwrap().reward(alpha).unwrap();
            prop_assert!((-REWARD_BOUND..=REWARD_BOUND).contains(&r));
        }
    }
}
