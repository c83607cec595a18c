// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use ndarray::Zip;

use super::mlp::MlpParameters;
use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam moments for gradient *ascent* with L2 decay on weights.
///
/// The decay enters as the gradient of `-λ/2·‖W‖²` added to the objective
/// gradient before the moment updates. Biases are not decayed.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first: MlpParameters,
    second: MlpParameters,
    step: u64,
}

impl AdamState {
    pub fn new(shape: &MlpParameters) -> Self {
        Self {
            first: shape.zeros_like(),
            second: shape.zeros_like(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One ascent step; returns the new parameter snapshot.
    pub fn update(
        &mut self,
        params: &MlpParameters,
        grad: &MlpParameters,
        learning_rate: f64,
        weight_decay: f64,
    ) -> Result<MlpParameters> {
        if !params.same_shape(grad) || !params.same_shape(&self.first) {
            return Err(Error::Dimension {
                expected: params.param_count(),
                actual: grad.param_count(),
            });
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - BETA1.powi(t);
        let c2 = 1.0 - BETA2.powi(t);
        let mut next = params.clone();
        let layers = next
            .layers_mut()
            .iter_mut()
            .zip(grad.layers())
            .zip(self.first.layers_mut().iter_mut().zip(self.second.layers_mut()));
        for ((p, g), (m, v)) in layers {
            let adam = |p: &mut f64, &g: &f64, m: &mut f64, v: &mut f64, decay: f64| {
                let g = g - decay * *p;
                *m = BETA1 * *m + (1.0 - BETA1) * g;
                *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                *p += learning_rate * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
            };
            Zip::from(&mut p.weights)
                .and(&g.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .for_each(|p, g, m, v| adam(p, g, m, v, weight_decay));
            Zip::from(&mut p.biases)
                .and(&g.biases)
                .and(&mut m.biases)
                .and(&mut v.biases)
                .for_each(|p, g, m, v| adam(p, g, m, v, 0.0));
        }
        Ok(next)
    }
}
