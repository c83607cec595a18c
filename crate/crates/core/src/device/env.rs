// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use super::chip::{hamiltonian_from_voltages, ChipConfig, VoltagePair};
use super::filter::{discretize_filter, DiscreteFilter, DistortionFilterState};
use crate::error::{Error, Result};
use crate::quantum::{
    evolve, measure, unitary_from_hamiltonian, ProbabilityDistribution, QuantumState,
};

/// Consecutive first-waveguide power samples, all in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWindow(Vec<f64>);

impl ObservationWindow {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if let Some(x) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Invariant(format!("observation sample {x} outside [0,1]")));
        }
        Ok(Self(samples))
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.0.last().expect("observation windows are never empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: ObservationWindow,
    /// Scalar the reward is computed from. For the chip this is α*, the last
    /// first-waveguide sample of the window.
    pub signal: f64,
    /// Voltages actually applied after clamping.
    pub applied: VoltagePair,
    pub saturated: bool,
}

/// Episodic environment driven by two-dimensional continuous actions.
pub trait Environment {
    fn reset(&mut self) -> Result<ObservationWindow>;
    fn step(&mut self, action: [f64; 2]) -> Result<Transition>;
}

/// The simulated chip.
///
/// Each step holds the (clamped) action for `samples_per_step` simulator
/// samples. For every sample both distortion filters advance one period, the
/// distorted voltages set the Hamiltonian and the fixed input state is
/// propagated and measured.
#[derive(Debug, Clone)]
pub struct ChipEnv {
    cfg: ChipConfig,
    filters: [DiscreteFilter; 2],
    states: [DistortionFilterState; 2],
    input: QuantumState,
    last: Option<ProbabilityDistribution>,
    saturation_count: u64,
}

impl ChipEnv {
    pub fn new(cfg: ChipConfig) -> Result<Self> {
        cfg.validate()?;
        let filters = [
            discretize_filter(cfg.filter_params(0), cfg.sample_rate)?,
            discretize_filter(cfg.filter_params(1), cfg.sample_rate)?,
        ];
        let input = QuantumState::from_distribution(&ProbabilityDistribution::new(
            &cfg.input_distribution,
        )?);
        Ok(Self {
            cfg,
            filters,
            states: Default::default(),
            input,
            last: None,
            saturation_count: 0,
        })
    }

    pub fn config(&self) -> &ChipConfig {
        &self.cfg
    }

    pub fn filter_states(&self) -> [DistortionFilterState; 2] {
        self.states
    }

    /// Number of steps whose action had to be clamped.
    pub fn saturation_count(&self) -> u64 {
        self.saturation_count
    }

    /// `[α*, β*]` of the most recent sample.
    pub fn peek_distribution(&self) -> Result<ProbabilityDistribution> {
        self.last.clone().ok_or(Error::NotReset)
    }

    /// Distorted voltages at the current instant.
    pub fn distorted_voltages(&self) -> [f64; 2] {
        [0, 1].map(|k| {
            let f = &self.filters[k];
            let x = self.states[k].0;
            f.c[0] * x[0] + f.c[1] * x[1]
        })
    }

    fn simulate(&mut self, applied: VoltagePair) -> Result<ObservationWindow> {
        let v = applied.get();
        let mut samples = Vec::with_capacity(self.cfg.samples_per_step);
        let mut last = None;
        for _ in 0..self.cfg.samples_per_step {
            let distorted = [
                self.filters[0].step(&mut self.states[0], v[0]),
                self.filters[1].step(&mut self.states[1], v[1]),
            ];
            let h = hamiltonian_from_voltages(distorted, &self.cfg)?;
            let psi = evolve(&unitary_from_hamiltonian(&h), &self.input)?;
            let p = measure(&psi);
            samples.push(p.probs()[0]);
            last = Some(p);
        }
        self.last = last;
        ObservationWindow::new(samples)
    }
}

impl Environment for ChipEnv {
    /// Zeroes both filter states and returns the window observed while zero
    /// volts are applied for one step.
    fn reset(&mut self) -> Result<ObservationWindow> {
        self.states = Default::default();
        self.saturation_count = 0;
        self.simulate(VoltagePair::ZERO)
    }

    fn step(&mut self, action: [f64; 2]) -> Result<Transition> {
        if self.last.is_none() {
            return Err(Error::NotReset);
        }
        let (applied, saturated) = VoltagePair::clamped(action)?;
        if saturated {
            self.saturation_count += 1;
        }
        let observation = self.simulate(applied)?;
        Ok(Transition {
            signal: observation.last(),
            observation,
            applied,
            saturated,
        })
    }
}
