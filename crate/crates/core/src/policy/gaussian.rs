// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Diagonal Gaussian policy head.
//!
//! The network's four outputs `z` map to per-electrode means
//! `μ = 10·tanh(z_μ)` and variances `σ² = clamp(exp(z_v), 1e-4, 25)`.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::mlp::{MlpParameters, HEAD_DIM};
use crate::device::{VoltagePair, VOLTAGE_LIMIT};
use crate::error::{Error, Result};

pub const MEAN_SCALE: f64 = VOLTAGE_LIMIT;
pub const VARIANCE_MIN: f64 = 1e-4;
pub const VARIANCE_MAX: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPolicyOutput {
    pub mean: [f64; 2],
    pub variance: [f64; 2],
}

/// A sampled exploration action. `raw` is the Gaussian draw the
/// log-probability refers to; `applied` is what reaches the device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledAction {
    pub raw: [f64; 2],
    pub applied: VoltagePair,
}

impl GaussianPolicyOutput {
    pub fn from_head(z: [f64; HEAD_DIM]) -> Self {
        Self {
            mean: [MEAN_SCALE * z[0].tanh(), MEAN_SCALE * z[1].tanh()],
            variance: [head_variance(z[2]), head_variance(z[3])],
        }
    }
}

#[inline]
fn head_variance(z: f64) -> f64 {
    z.exp().clamp(VARIANCE_MIN, VARIANCE_MAX)
}

/// Policy distribution for one observation.
pub fn forward(params: &MlpParameters, obs: &[f64]) -> Result<GaussianPolicyOutput> {
    Ok(GaussianPolicyOutput::from_head(params.head(obs)?))
}

/// Independent Gaussian draw per electrode; the applied copy is clamped.
pub fn sample_action<R: Rng + ?Sized>(out: &GaussianPolicyOutput, rng: &mut R) -> SampledAction {
    let raw = [0, 1].map(|k| {
        let n: f64 = rng.sample(StandardNormal);
        out.mean[k] + out.variance[k].sqrt() * n
    });
    let applied = VoltagePair::new(raw.map(|x| x.clamp(-VOLTAGE_LIMIT, VOLTAGE_LIMIT)))
        .expect("clamped finite draw");
    SampledAction { raw, applied }
}

/// Evaluation-mode action: the means.
pub fn mean_action(out: &GaussianPolicyOutput) -> VoltagePair {
    VoltagePair::new(out.mean).expect("tanh-scaled means are within the actuator limit")
}

/// `Σ_k log N(a_k; μ_k, σ²_k)`.
pub fn log_prob(out: &GaussianPolicyOutput, action: [f64; 2]) -> f64 {
    (0..2)
        .map(|k| {
            let var = out.variance[k];
            let d = action[k] - out.mean[k];
            -0.5 * (2.0 * PI * var).ln() - d * d / (2.0 * var)
        })
        .sum()
}

/// `∂ log π / ∂z` for one head output `z` and action.
pub(crate) fn head_gradient(z: [f64; HEAD_DIM], action: [f64; 2]) -> [f64; HEAD_DIM] {
    let mut g = [0.0; HEAD_DIM];
    for k in 0..2 {
        let t = z[k].tanh();
        let mean = MEAN_SCALE * t;
        let e = z[k + 2].exp();
        let var = e.clamp(VARIANCE_MIN, VARIANCE_MAX);
        let d = action[k] - mean;
        g[k] = d / var * MEAN_SCALE * (1.0 - t * t);
        // Clamped variance is flat in z.
        if e > VARIANCE_MIN && e < VARIANCE_MAX {
            g[k + 2] = (-0.5 / var + d * d / (2.0 * var * var)) * var;
        }
    }
    g
}

/// `∇_θ log π_θ(action | obs)` by backpropagation.
pub fn grad_log_prob(params: &MlpParameters, obs: &[f64], action: [f64; 2]) -> Result<MlpParameters> {
    let rows = ArrayView2::from_shape((1, obs.len()), obs)
        .map_err(|_| Error::Dimension {
            expected: params.input_dim(),
            actual: obs.len(),
        })?;
    weighted_grad_log_prob(params, rows, &[action], &[1.0])
}

/// `Σ_r w_r ∇_θ log π_θ(a_r | s_r)` over a batch, one backward pass.
pub fn weighted_grad_log_prob(
    params: &MlpParameters,
    obs: ArrayView2<'_, f64>,
    actions: &[[f64; 2]],
    weights: &[f64],
) -> Result<MlpParameters> {
    let batch = obs.nrows();
    if actions.len() != batch || weights.len() != batch {
        return Err(Error::Dimension {
            expected: batch,
            actual: actions.len().min(weights.len()),
        });
    }
    let cache = params.forward_batch(obs)?;
    let mut d_head = Array2::zeros((batch, HEAD_DIM));
    for r in 0..batch {
        let zrow = cache.head_row(r);
        let z = [zrow[0], zrow[1], zrow[2], zrow[3]];
        let g = head_gradient(z, actions[r]);
        for (j, gj) in g.iter().enumerate() {
            d_head[(r, j)] = weights[r] * gj;
        }
    }
    debug_assert_eq!(cache.head().nrows(), batch);
    let grad = params.backward_batch(&cache, d_head);
    if !grad.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    Ok(grad)
}
