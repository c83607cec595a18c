// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use crate::device::{Environment, ObservationWindow, Transition, VoltagePair};
use crate::error::{Error, Result};

/// One-step toy environment with a known optimum.
///
/// The observation is a constant window and the signal is
/// `-‖a - a*‖₁`, so the best policy emits `a*` deterministically. Used to
/// sanity-check the estimator independently of the chip.
#[derive(Debug, Clone)]
pub struct BanditEnv {
    optimum: [f64; 2],
    observation: ObservationWindow,
    reset: bool,
}

impl BanditEnv {
    pub fn new(optimum: [f64; 2], obs_dim: usize) -> Result<Self> {
        VoltagePair::new(optimum)?;
        if obs_dim == 0 {
            return Err(Error::Config("bandit observation must be non-empty".into()));
        }
        Ok(Self {
            optimum,
            observation: ObservationWindow::new(vec![0.5; obs_dim])?,
            reset: false,
        })
    }

    pub fn optimum(&self) -> [f64; 2] {
        self.optimum
    }
}

impl Environment for BanditEnv {
    fn reset(&mut self) -> Result<ObservationWindow> {
        self.reset = true;
        Ok(self.observation.clone())
    }

    fn step(&mut self, action: [f64; 2]) -> Result<Transition> {
        if !self.reset {
            return Err(Error::NotReset);
        }
        let (applied, saturated) = VoltagePair::clamped(action)?;
        let a = applied.get();
        Ok(Transition {
            observation: self.observation.clone(),
            signal: -((a[0] - self.optimum[0]).abs() + (a[1] - self.optimum[1]).abs()),
            applied,
            saturated,
        })
    }
}
