// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use crate::bank::{run_sequence, Controller, SequenceSpec, SequenceTrace};
use crate::device::{ChipConfig, ChipEnv};
use crate::error::{Error, Result};
use crate::trainer::{window_fidelity, Window};

/// All orderings of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    // Next lexicographic permutation until the sequence is descending.
    loop {
        let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..current.len()).rev().find(|&j| current[j] > current[i - 1]).expect("exists");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Per-episode mean fidelity over `window` of each episode, against that
/// episode's target.
pub fn windowed_fidelity(alphas: &[f64], targets: &[[f64; 2]], episode_samples: usize, window: Window) -> Result<Vec<f64>> {
    if episode_samples == 0 || alphas.len() != episode_samples * targets.len() {
        return Err(Error::MisalignedTrace {
            len: alphas.len(),
            episode: episode_samples,
        });
    }
    alphas
        .chunks(episode_samples)
        .zip(targets)
        .map(|(ep, t)| window_fidelity(ep, t[0], window))
        .collect()
}

/// Sequence-level fidelities: the mean over episodes of each episode's
/// windowed fidelity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowFidelities {
    pub full: f64,
    pub first_half: f64,
    pub last_half: f64,
}

impl WindowFidelities {
    pub fn of_trace(trace: &SequenceTrace) -> Result<Self> {
        let alphas = trace.alphas();
        let mean = |w| -> Result<f64> {
            let v = windowed_fidelity(&alphas, &trace.targets, trace.episode_samples, w)?;
            Ok(v.iter().sum::<f64>() / v.len() as f64)
        };
        Ok(Self {
            full: mean(Window::Full)?,
            first_half: mean(Window::FirstHalf)?,
            last_half: mean(Window::LastHalf)?,
        })
    }

    pub fn get(&self, window: Window) -> f64 {
        match window {
            Window::Full => self.full,
            Window::FirstHalf => self.first_half,
            Window::LastHalf => self.last_half,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceResult {
    /// Indices into the experiment's target list.
    pub order: Vec<usize>,
    pub controller: WindowFidelities,
    pub steps: WindowFidelities,
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceStats {
    pub targets: Vec<[f64; 2]>,
    /// One row per permutation, in lexicographic permutation order.
    pub sequences: Vec<SequenceResult>,
}

/// The two arms compared in the sequence experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Controller,
    Steps,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::Controller => "controller",
            Arm::Steps => "steps",
        }
    }
}

impl SequenceStats {
    pub fn values(&self, arm: Arm, window: Window) -> Vec<f64> {
        self.sequences
            .iter()
            .map(|s| match arm {
                Arm::Controller => s.controller.get(window),
                Arm::Steps => s.steps.get(window),
            })
            .collect()
    }

    pub fn aggregate(&self, arm: Arm, window: Window) -> Aggregate {
        Aggregate::of(&self.values(arm, window))
    }
}

/// Runs one sequence per permutation of `targets` with each controller,
/// resetting the chip only at the start of each sequence.
pub fn permutation_experiment<C, S>(
    controller: &C,
    steps: &S,
    chip: &ChipConfig,
    targets: &[[f64; 2]],
    episode_steps: usize,
) -> Result<SequenceStats>
where
    C: Controller + ?Sized,
    S: Controller + ?Sized,
{
    let mut sequences = Vec::new();
    for (index, order) in permutations(targets.len()).into_iter().enumerate() {
        let run = || -> Result<SequenceResult> {
            let spec = SequenceSpec {
                episode_steps,
                ..SequenceSpec::new(order.iter().map(|&i| targets[i]).collect())
            };
            let mut env = ChipEnv::new(chip.clone())?;
            let c = WindowFidelities::of_trace(&run_sequence(controller, &mut env, &spec)?)?;
            let s = WindowFidelities::of_trace(&run_sequence(steps, &mut env, &spec)?)?;
            Ok(SequenceResult {
                order: order.clone(),
                controller: c,
                steps: s,
            })
        };
        sequences.push(run().map_err(|e| Error::Sequence {
            index,
            source: Box::new(e),
        })?);
    }
    Ok(SequenceStats {
        targets: targets.to_vec(),
        sequences,
    })
}
