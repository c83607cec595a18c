// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use ndarray::Array2;

use super::reward::reward_to_go;
use super::rollout::Trajectory;
use crate::error::{Error, Result};
use crate::policy::{weighted_grad_log_prob, MlpParameters};

/// Baseline `b(s_t)` subtracted from the reward-to-go.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    None,
    /// Baseline of a constant per-step reward `k`:
    /// `b_t = k·Σ_{t̃=t}^{T-1} γ^{t̃-t}`. Centering every reward by `-k`
    /// is the same estimator.
    ConstantReward(f64),
    /// Per-step mean of the reward-to-go over the batch. Scales the expected
    /// gradient by `(N-1)/N`, so it only helps for `N > 1`.
    BatchMean,
}

/// REINFORCE estimate
/// `(1/N) Σ_i Σ_t ∇_θ log π_θ(a_t | s_t) · (Σ_{t̃≥t} γ^{t̃-t} r_t̃ - b_t)`.
pub fn policy_gradient(
    policy: &MlpParameters,
    trajectories: &[Trajectory],
    gamma: f64,
    baseline: Baseline,
) -> Result<MlpParameters> {
    if trajectories.is_empty() {
        return Err(Error::Invariant("policy gradient needs at least one trajectory".into()));
    }
    let n = trajectories.len() as f64;
    let rows: usize = trajectories.iter().map(Trajectory::len).sum();
    let width = policy.input_dim();
    let mut obs = Array2::zeros((rows, width));
    let mut actions = Vec::with_capacity(rows);
    let mut weights = Vec::with_capacity(rows);
    let rtgs: Vec<Vec<f64>> = trajectories
        .iter()
        .map(|t| reward_to_go(&t.rewards(), gamma))
        .collect();
    let batch_mean = |t: usize| {
        let (sum, count) = rtgs
            .iter()
            .filter_map(|g| g.get(t))
            .fold((0.0, 0usize), |(s, c), g| (s + g, c + 1));
        sum / count as f64
    };
    let mut r = 0;
    for (traj, rtg) in trajectories.iter().zip(&rtgs) {
        let base: Vec<f64> = match baseline {
            Baseline::None => vec![0.0; traj.len()],
            Baseline::ConstantReward(k) => reward_to_go(&vec![k; traj.len()], gamma),
            Baseline::BatchMean => (0..traj.len()).map(batch_mean).collect(),
        };
        for ((step, g), b) in traj.steps.iter().zip(rtg).zip(base) {
            let window = step.observation.samples();
            if window.len() != width {
                return Err(Error::Dimension {
                    expected: width,
                    actual: window.len(),
                });
            }
            obs.row_mut(r).assign(&ndarray::ArrayView1::from(window));
            actions.push(step.action);
            weights.push((g - b) / n);
            r += 1;
        }
    }
    weighted_grad_log_prob(policy, obs.view(), &actions, &weights)
}
