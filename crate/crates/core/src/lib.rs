// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Model-free control of a simulated closed quantum device whose control
//! voltages pass through an unknown linear distortion.
//!
//! The crate is layered bottom-up:
//!
//! - [`quantum`]: Hamiltonian-to-unitary maps, state evolution, measurement
//!   and the classical (Bhattacharyya) fidelity between distributions.
//! - [`device`]: the two-electrode waveguide chip surrogate. Applied voltages
//!   are distorted by a second-order LTI filter per electrode before they set
//!   the Hamiltonian; the environment emits 50-sample observation windows.
//! - [`policy`]: a tanh MLP Gaussian policy with hand-written backprop, the
//!   Adam optimizer with L2 decay and a versioned weight file format.
//! - [`trainer`]: episodic REINFORCE with reward-to-go, discounting and the
//!   centering baseline, plus per-target evaluation.
//! - [`bank`]: one trained policy per target distribution, a selector and
//!   chained sequence execution without device resets.
//! - [`harness`]: experiment drivers (grid-search step baseline, the
//!   permutation experiment, windowed fidelities, report emission).

pub mod bank;
pub mod device;
pub mod error;
pub mod harness;
pub mod policy;
pub mod quantum;
pub mod trainer;

pub use error::{Error, Result};
