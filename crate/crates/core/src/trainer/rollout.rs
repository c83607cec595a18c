// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use crate::device::{Environment, ObservationWindow, VoltagePair};
use crate::error::Result;
use crate::policy::{forward, log_prob, mean_action, sample_action, MlpParameters};

/// How actions are chosen from the policy distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Sample from the Gaussians (training).
    Explore,
    /// Apply the means (evaluation and operation).
    Exploit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Observation the action was chosen from.
    pub observation: ObservationWindow,
    /// Action before clamping; the log-probability refers to this.
    pub action: [f64; 2],
    pub applied: VoltagePair,
    pub log_prob: f64,
    pub reward: f64,
    /// Last sample of the window this action produced.
    pub alpha_last: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
    /// Window produced by the final action; the next episode starts from it
    /// when episodes are chained.
    pub final_observation: ObservationWindow,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    /// Windows produced by each action, in order: the response to action `t`
    /// is window `t`.
    pub fn output_windows(&self) -> impl Iterator<Item = &ObservationWindow> {
        self.steps
            .iter()
            .skip(1)
            .map(|s| &s.observation)
            .chain(std::iter::once(&self.final_observation))
    }

    /// Every simulator sample of the episode's output, in time order.
    pub fn output_samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.output_windows().flat_map(|w| w.samples().iter().copied())
    }
}

/// Runs `steps` policy steps starting from observation `start`, which must be
/// the environment's current observation (fresh from `reset`, or the final
/// window of a previous episode when chaining).
pub fn rollout<E, R>(
    policy: &MlpParameters,
    env: &mut E,
    start: ObservationWindow,
    reward: impl Fn(f64) -> Result<f64>,
    steps: usize,
    mode: Mode,
    rng: &mut R,
) -> Result<Trajectory>
where
    E: Environment + ?Sized,
    R: Rng + ?Sized,
{
    let mut records = Vec::with_capacity(steps);
    let mut observation = start;
    for _ in 0..steps {
        let out = forward(policy, observation.samples())?;
        let action = match mode {
            Mode::Explore => sample_action(&out, rng).raw,
            Mode::Exploit => mean_action(&out).get(),
        };
        let transition = env.step(action)?;
        records.push(StepRecord {
            observation,
            action,
            applied: transition.applied,
            log_prob: log_prob(&out, action),
            reward: reward(transition.signal)?,
            alpha_last: transition.signal,
        });
        observation = transition.observation;
    }
    Ok(Trajectory {
        steps: records,
        final_observation: observation,
    })
}
