// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulated waveguide chip: the reinforcement-learning environment.
//!
//! Applied electrode voltages pass through a per-electrode second-order LTI
//! distortion, set the detunings of a two-mode coupled-waveguide Hamiltonian
//! and the output power of the first waveguide is sampled 50 times per
//! control step. Only that window is observable; the filter memory is not,
//! which makes the control problem partially observed.

mod chip;
mod env;
mod filter;

pub use chip::{hamiltonian_from_voltages, ChannelOverride, ChipConfig, VoltagePair, VOLTAGE_LIMIT};
pub use env::{ChipEnv, Environment, ObservationWindow, Transition};
pub use filter::{discretize_filter, DiscreteFilter, DistortionFilterState, FilterParams};
