// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::evaluate::evaluate;
use super::gradient::{policy_gradient, Baseline};
use super::reward::RewardSpec;
use super::rollout::{rollout, Mode, Trajectory};
use crate::device::Environment;
use crate::error::{Error, Result};
use crate::policy::{default_dims, init, AdamState, InitScheme, MlpParameters, Nonlinearity};

/// Stream of the exploration generator; stream 0 of the same seed is left to
/// weight initialization.
const EXPLORATION_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Steps per episode (`T`).
    pub episode_steps: usize,
    /// Trajectories per update (`N`).
    pub episodes_per_update: usize,
    pub gamma: f64,
    pub weight_decay: f64,
    pub max_updates: u64,
    /// Last-half evaluation fidelity (percent) that ends training.
    pub stop_fidelity: f64,
    /// Updates without a new best evaluation before the learning rate decays.
    pub lr_patience: u64,
    pub lr_decay: f64,
    /// Lowest learning rate as a fraction of the initial one.
    pub lr_floor: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episode_steps: 500,
            episodes_per_update: 1,
            gamma: 0.99,
            weight_decay: 0.1,
            max_updates: 20_000,
            stop_fidelity: 99.0,
            lr_patience: 200,
            lr_decay: 0.5,
            lr_floor: 1.0 / 16.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma {} outside (0, 1]", self.gamma)));
        }
        if self.episode_steps == 0 || self.episodes_per_update == 0 {
            return Err(Error::Config("episode_steps and episodes_per_update must be >= 1".into()));
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return Err(Error::Config("weight_decay must be finite and >= 0".into()));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) || !(self.lr_floor > 0.0 && self.lr_floor <= 1.0) {
            return Err(Error::Config("lr_decay and lr_floor must lie in (0, 1]".into()));
        }
        if !self.stop_fidelity.is_finite() {
            return Err(Error::Config("stop_fidelity must be finite".into()));
        }
        Ok(())
    }
}

/// Per-target learning rate and initialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSettings {
    pub learning_rate: f64,
    pub init: InitScheme,
}

impl TargetSettings {
    /// Tuned settings for the five standard targets, keyed on `α`.
    pub fn standard(alpha_target: f64) -> Option<Self> {
        let xavier = |gain| InitScheme::XavierNormal { gain };
        let kaiming = |nonlinearity| InitScheme::KaimingNormal { nonlinearity };
        let table = [
            (0.0, 7e-5, xavier(5.0)),
            (0.2, 5e-5, kaiming(Nonlinearity::Tanh)),
            (0.5, 8e-5, kaiming(Nonlinearity::LeakyRelu { negative_slope: 0.0 })),
            (0.8, 4e-5, xavier(1.2)),
            (1.0, 5e-5, xavier(2.2)),
        ];
        table
            .iter()
            .find(|(a, _, _)| (a - alpha_target).abs() < 5e-5)
            .map(|&(_, learning_rate, init)| Self { learning_rate, init })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        self.init.validate()
    }
}

/// Hyperparameters of one [`Learner::update`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateSettings {
    /// Steps per trajectory.
    pub steps: usize,
    /// Trajectories per update.
    pub episodes: usize,
    pub gamma: f64,
    pub baseline: Baseline,
    pub learning_rate: f64,
    pub weight_decay: f64,
}

/// Policy parameters, optimizer state and exploration generator.
#[derive(Debug, Clone)]
pub struct Learner {
    params: MlpParameters,
    adam: AdamState,
    rng: ChaCha8Rng,
}

impl Learner {
    pub fn new(params: MlpParameters, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(EXPLORATION_STREAM);
        Self {
            adam: AdamState::new(&params),
            params,
            rng,
        }
    }

    pub fn params(&self) -> &MlpParameters {
        &self.params
    }

    pub fn into_params(self) -> MlpParameters {
        self.params
    }

    /// Collects `episodes` explore rollouts, each from a fresh reset, and
    /// takes one ascent step. Returns the mean per-step reward.
    pub fn update<E: Environment + ?Sized>(
        &mut self,
        env: &mut E,
        reward: impl Fn(f64) -> Result<f64> + Copy,
        step: &UpdateSettings,
    ) -> Result<f64> {
        let UpdateSettings {
            steps,
            episodes,
            gamma,
            baseline,
            learning_rate,
            weight_decay,
        } = *step;
        let trajectories = (0..episodes)
            .map(|_| {
                let start = env.reset()?;
                rollout(&self.params, env, start, reward, steps, Mode::Explore, &mut self.rng)
            })
            .collect::<Result<Vec<Trajectory>>>()?;
        let grad = policy_gradient(&self.params, &trajectories, gamma, baseline)?;
        self.params = self.adam.update(&self.params, &grad, learning_rate, weight_decay)?;
        let count: usize = trajectories.iter().map(Trajectory::len).sum();
        let total: f64 = trajectories.iter().flat_map(|t| t.steps.iter().map(|s| s.reward)).sum();
        Ok(total / count as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    /// 1-based update index.
    pub update: u64,
    pub mean_reward: f64,
    pub eval_fidelity_full: f64,
    pub eval_fidelity_last5ms: f64,
    /// Learning rate used for this update.
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters with the best last-half evaluation fidelity seen.
    pub params: MlpParameters,
    pub best_fidelity: f64,
    /// Update that produced `params`.
    pub best_update: u64,
    pub updates: u64,
    pub converged: bool,
    pub log: Vec<LogRow>,
}

/// Trains one policy for `spec` with REINFORCE, evaluating in exploit mode
/// after every update.
///
/// The learning rate is halved whenever the best evaluation has not improved
/// for `lr_patience` updates, down to `lr_floor` times its initial value.
/// Running out of updates is not an error: the outcome carries
/// `converged = false`.
pub fn train_target<E: Environment + ?Sized>(
    env: &mut E,
    spec: &RewardSpec,
    cfg: &TrainConfig,
    settings: &TargetSettings,
    mut on_update: impl FnMut(&LogRow),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    settings.validate()?;
    let initial = init(&default_dims(), settings.init, cfg.seed)?;
    let mut learner = Learner::new(initial.clone(), cfg.seed);
    let reward = |a: f64| spec.reward(a);
    let floor = settings.learning_rate * cfg.lr_floor;
    let mut eta = settings.learning_rate;
    let mut best = (f64::NEG_INFINITY, 0, initial);
    let mut stale = 0;
    let mut log = Vec::new();
    let mut converged = false;
    let mut updates = 0;
    while updates < cfg.max_updates {
        updates += 1;
        let settings = UpdateSettings {
            steps: cfg.episode_steps,
            episodes: cfg.episodes_per_update,
            gamma: cfg.gamma,
            baseline: Baseline::None,
            learning_rate: eta,
            weight_decay: cfg.weight_decay,
        };
        let mean_reward = learner.update(env, reward, &settings)?;
        let eval = evaluate(learner.params(), env, spec, cfg.episode_steps)?;
        let row = LogRow {
            update: updates,
            mean_reward,
            eval_fidelity_full: eval.fidelity_full,
            eval_fidelity_last5ms: eval.fidelity_last_half,
            eta,
        };
        on_update(&row);
        log.push(row);
        if eval.fidelity_last_half > best.0 {
            best = (eval.fidelity_last_half, updates, learner.params().clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.lr_patience {
                eta = (eta * cfg.lr_decay).max(floor);
                stale = 0;
            }
        }
        if eval.fidelity_last_half >= cfg.stop_fidelity {
            converged = true;
            break;
        }
    }
    let (best_fidelity, best_update, params) = best;
    Ok(TrainOutcome {
        params,
        best_fidelity,
        best_update,
        updates,
        converged,
        log,
    })
}

pub const TRAINING_LOG_HEADER: &str = "update,mean_reward,eval_fidelity_full,eval_fidelity_last5ms,eta";

pub fn write_training_log<W: Write>(mut out: W, log: &[LogRow]) -> std::io::Result<()> {
    writeln!(out, "{TRAINING_LOG_HEADER}")?;
    for r in log {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.update, r.mean_reward, r.eval_fidelity_full, r.eval_fidelity_last5ms, r.eta
        )?;
    }
    Ok(())
}

pub fn save_training_log(log: &[LogRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_training_log(&mut w, log).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}
