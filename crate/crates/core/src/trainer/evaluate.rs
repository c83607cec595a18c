// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::reward::RewardSpec;
use super::rollout::{rollout, Mode, Trajectory};
use crate::device::{Environment, ObservationWindow};
use crate::error::{Error, Result};
use crate::policy::MlpParameters;
use crate::quantum::fidelity_two_mode;

/// Part of an episode a fidelity is averaged over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Full,
    FirstHalf,
    LastHalf,
}

impl Window {
    pub const ALL: [Window; 3] = [Window::Full, Window::FirstHalf, Window::LastHalf];

    /// Index range of the window within `len` samples. An odd middle sample
    /// belongs to the second half.
    pub fn range(self, len: usize) -> std::ops::Range<usize> {
        match self {
            Window::Full => 0..len,
            Window::FirstHalf => 0..len / 2,
            Window::LastHalf => len / 2..len,
        }
    }
}

/// Mean fidelity (percent) of the `α` samples in `window` against
/// `[alpha_target, 1 - alpha_target]`.
pub fn window_fidelity(alphas: &[f64], alpha_target: f64, window: Window) -> Result<f64> {
    let r = window.range(alphas.len());
    if r.is_empty() {
        return Err(Error::Invariant("fidelity over an empty window".into()));
    }
    let n = r.len() as f64;
    Ok(alphas[r].iter().map(|&a| fidelity_two_mode(a, alpha_target)).sum::<f64>() / n)
}

/// One exploit-mode episode and its windowed fidelities.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeEval {
    pub trajectory: Trajectory,
    /// Every output sample of the episode.
    pub alphas: Vec<f64>,
    pub fidelity_full: f64,
    pub fidelity_first_half: f64,
    pub fidelity_last_half: f64,
}

impl EpisodeEval {
    pub fn fidelity(&self, window: Window) -> f64 {
        match window {
            Window::Full => self.fidelity_full,
            Window::FirstHalf => self.fidelity_first_half,
            Window::LastHalf => self.fidelity_last_half,
        }
    }
}

/// Resets `env` and runs one exploit episode of `steps` steps.
pub fn evaluate<E: Environment + ?Sized>(
    policy: &MlpParameters,
    env: &mut E,
    spec: &RewardSpec,
    steps: usize,
) -> Result<EpisodeEval> {
    let start = env.reset()?;
    evaluate_from(policy, env, start, spec, steps)
}

/// Exploit episode continuing from the environment's current state, whose
/// latest window is `start`.
pub fn evaluate_from<E: Environment + ?Sized>(
    policy: &MlpParameters,
    env: &mut E,
    start: ObservationWindow,
    spec: &RewardSpec,
    steps: usize,
) -> Result<EpisodeEval> {
    // Exploit mode never draws from the generator.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let trajectory = rollout(policy, env, start, |a| spec.reward(a), steps, Mode::Exploit, &mut rng)?;
    let alphas: Vec<f64> = trajectory.output_samples().collect();
    let t = spec.alpha_target;
    Ok(EpisodeEval {
        fidelity_full: window_fidelity(&alphas, t, Window::Full)?,
        fidelity_first_half: window_fidelity(&alphas, t, Window::FirstHalf)?,
        fidelity_last_half: window_fidelity(&alphas, t, Window::LastHalf)?,
        trajectory,
        alphas,
    })
}
