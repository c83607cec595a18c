// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Episodic REINFORCE.
//!
//! Each update resets the environment, samples `N` trajectories of `T`
//! steps from the Gaussian policy and ascends
//! `(1/N) Σ_i Σ_t ∇ log π(a_t|s_t) · G_t`, where `G_t` is the discounted
//! reward-to-go of the centered reward. The centering acts as a baseline.

mod bandit;
mod evaluate;
mod gradient;
mod reward;
mod rollout;
mod train;

pub use bandit::BanditEnv;
pub use evaluate::{evaluate, evaluate_from, window_fidelity, EpisodeEval, Window};
pub use gradient::{policy_gradient, Baseline};
pub use reward::{reward_to_go, RewardSpec, REWARD_BOUND};
pub use rollout::{rollout, Mode, StepRecord, Trajectory};
pub use train::{
    save_training_log, train_target, write_training_log, Learner, LogRow, TargetSettings,
    TrainConfig, TrainOutcome, UpdateSettings, TRAINING_LOG_HEADER,
};
