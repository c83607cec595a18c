// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::filter::FilterParams;
use crate::error::{Error, Result};
use crate::quantum::{EffectiveHamiltonian, ProbabilityDistribution};

/// Hard actuator limit in volts.
pub const VOLTAGE_LIMIT: f64 = 10.0;

/// Electrode voltages, guaranteed within `±VOLTAGE_LIMIT`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltagePair([f64; 2]);

impl VoltagePair {
    pub const ZERO: VoltagePair = VoltagePair([0.0, 0.0]);

    pub fn new(v: [f64; 2]) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite() || x.abs() > VOLTAGE_LIMIT) {
            return Err(Error::Invariant(format!(
                "voltages {v:?} outside ±{VOLTAGE_LIMIT} V"
            )));
        }
        Ok(Self(v))
    }

    /// Clamps into range. The flag reports whether clamping was needed.
    pub fn clamped(v: [f64; 2]) -> Result<(Self, bool)> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invariant(format!("non-finite action {v:?}")));
        }
        let c = v.map(|x| x.clamp(-VOLTAGE_LIMIT, VOLTAGE_LIMIT));
        Ok((Self(c), c != v))
    }

    pub fn get(&self) -> [f64; 2] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0[0].hypot(self.0[1])
    }
}

/// Filter parameters overriding the shared defaults for one electrode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelOverride {
    pub filter_natural_freq: Option<f64>,
    pub filter_damping: Option<f64>,
}

/// Surrogate chip parameters. Every field has a default, so an empty config
/// table is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChipConfig {
    /// Effective inter-waveguide coupling `C·t`, radians.
    pub coupling_theta: f64,
    /// Linear detuning coefficient, rad/V.
    pub eo_linear: f64,
    /// Quadratic detuning coefficient, rad/V².
    pub eo_quadratic: f64,
    /// ωn of the distortion filter, rad/s.
    pub filter_natural_freq: f64,
    /// ζ of the distortion filter.
    pub filter_damping: f64,
    /// Hz.
    pub sample_rate: f64,
    /// Seconds per control step.
    pub step_duration: f64,
    pub samples_per_step: usize,
    /// Power split injected at the chip input.
    pub input_distribution: Vec<f64>,
    /// Optional per-electrode filter overrides, indexed by electrode.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub channel_overrides: Vec<ChannelOverride>,
}

impl Default for ChipConfig {
    fn default() -> Self {
        Self {
            coupling_theta: FRAC_PI_2,
            eo_linear: 0.4,
            eo_quadratic: 0.02,
            filter_natural_freq: 2.0 * PI * 250.0,
            filter_damping: 0.3,
            sample_rate: 2.5e6,
            step_duration: 2e-5,
            samples_per_step: 50,
            input_distribution: vec![0.0, 1.0],
            channel_overrides: Vec::new(),
        }
    }
}

impl ChipConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coupling_theta", self.coupling_theta),
            ("eo_linear", self.eo_linear),
            ("eo_quadratic", self.eo_quadratic),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if !(self.sample_rate > 0.0 && self.step_duration > 0.0) || self.samples_per_step == 0 {
            return Err(Error::Config("sampling parameters must be positive".into()));
        }
        let implied = self.sample_rate * self.step_duration;
        let n = self.samples_per_step as f64;
        // 2.5e6 * 2e-5 is 50 only up to rounding of the decimal literals.
        if (implied - n).abs() > 1e-9 * n {
            return Err(Error::Config(format!(
                "sample_rate * step_duration = {implied} but samples_per_step = {}",
                self.samples_per_step
            )));
        }
        if self.input_distribution.len() != 2 {
            return Err(Error::Config(format!(
                "input_distribution must have 2 entries, got {}",
                self.input_distribution.len()
            )));
        }
        ProbabilityDistribution::new(&self.input_distribution)
            .map_err(|e| Error::Config(format!("input_distribution: {e}")))?;
        if self.channel_overrides.len() > 2 {
            return Err(Error::Config("at most 2 channel overrides".into()));
        }
        for ch in 0..2 {
            self.filter_params(ch).validate()?;
        }
        Ok(())
    }

    /// Filter parameters for electrode `channel` after overrides.
    pub fn filter_params(&self, channel: usize) -> FilterParams {
        let o = self.channel_overrides.get(channel).copied().unwrap_or_default();
        FilterParams {
            natural_freq: o.filter_natural_freq.unwrap_or(self.filter_natural_freq),
            damping: o.filter_damping.unwrap_or(self.filter_damping),
        }
    }

    /// Odd, mildly nonlinear detuning `a1·v + a2·v·|v|`.
    #[inline]
    pub fn detuning(&self, v: f64) -> f64 {
        self.eo_linear * v + self.eo_quadratic * v * v.abs()
    }

    pub fn step_seconds(&self) -> f64 {
        self.samples_per_step as f64 / self.sample_rate
    }
}

/// Surrogate voltage-to-Hamiltonian map
/// `H = [[δ(v1), θc], [θc, δ(v2)]]`.
pub fn hamiltonian_from_voltages(v: [f64; 2], cfg: &ChipConfig) -> Result<EffectiveHamiltonian> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invariant(format!("non-finite voltages {v:?}")));
    }
    EffectiveHamiltonian::two_mode(cfg.detuning(v[0]), cfg.detuning(v[1]), cfg.coupling_theta)
}
