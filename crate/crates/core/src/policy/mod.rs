// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Gaussian MLP policy `π_θ(a | s)`.
//!
//! A 50 → 128 → 128 → 128 → 128 → 4 tanh network maps an observation window
//! to two voltage means and two variances. Gradients are computed by
//! hand-written backpropagation.

mod adam;
mod gaussian;
mod init;
mod io;
mod mlp;

pub use adam::{AdamState, BETA1, BETA2, EPSILON};
pub use gaussian::{
    forward, grad_log_prob, log_prob, mean_action, sample_action, weighted_grad_log_prob,
    GaussianPolicyOutput, SampledAction, MEAN_SCALE, VARIANCE_MAX, VARIANCE_MIN,
};
pub use init::{init, InitScheme, Nonlinearity};
pub use io::{
    load_metadata, load_weights, save_metadata, save_weights, PolicyMetadata, WEIGHTS_MAGIC,
    WEIGHTS_VERSION,
};
pub use mlp::{default_dims, Layer, MlpParameters, HEAD_DIM, HIDDEN, OBS_DIM};
