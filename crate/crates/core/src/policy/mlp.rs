// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Fully-connected tanh network with a linear output layer.
//!
//! Weights are stored `out × in` so a layer computes `z = W x + b`. Besides
//! the single-observation forward pass used while acting, the network runs
//! whole batches of observations through GEMM for gradient assembly.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};

/// Input width: samples per observation window.
pub const OBS_DIM: usize = 50;
/// Hidden layer widths.
pub const HIDDEN: [usize; 4] = [128, 128, 128, 128];
/// Output width: two means and two log-variances.
pub const HEAD_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weights: Array2::zeros((fan_out, fan_in)),
            biases: Array1::zeros(fan_out),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.nrows()
    }
}

/// Network parameters; the same shape also carries gradients and optimizer
/// moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParameters {
    layers: Vec<Layer>,
}

/// Layer sizes from input to output, e.g. `[50, 128, 128, 128, 128, 4]`.
pub fn default_dims() -> Vec<usize> {
    let mut dims = vec![OBS_DIM];
    dims.extend(HIDDEN);
    dims.push(HEAD_DIM);
    dims
}

impl MlpParameters {
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Config(format!("invalid layer sizes {dims:?}")));
        }
        if dims[dims.len() - 1] != HEAD_DIM {
            return Err(Error::Config(format!(
                "output layer must have {HEAD_DIM} units, got {}",
                dims[dims.len() - 1]
            )));
        }
        Ok(Self {
            layers: dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        })
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let dims: Vec<usize> = std::iter::once(layers.first().map_or(0, Layer::fan_in))
            .chain(layers.iter().map(Layer::fan_out))
            .collect();
        let shape = Self::zeros(&dims)?;
        for (i, (a, b)) in layers.iter().zip(&shape.layers).enumerate() {
            if a.weights.dim() != b.weights.dim() || a.biases.len() != b.biases.len() {
                return Err(Error::Config(format!("layer {i} shape mismatch")));
            }
        }
        Ok(Self { layers })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Layer::zeros(l.fan_in(), l.fan_out()))
                .collect(),
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].fan_in())
            .chain(self.layers.iter().map(Layer::fan_out))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dims() == other.dims()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|x| x.is_finite()) && l.biases.iter().all(|x| x.is_finite())
        })
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &Self, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.scaled_add(scale, &b.weights);
            a.biases.scaled_add(scale, &b.biases);
        }
    }

    /// Largest elementwise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.flat_iter()
            .zip(other.flat_iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Every parameter in storage order: per layer, weights row-major then
    /// biases.
    pub fn flat_iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
    }

    /// Mutable access to the parameter at flat index `i` (see [`Self::flat_iter`]).
    pub fn flat_mut(&mut self, mut i: usize) -> &mut f64 {
        for l in &mut self.layers {
            let nw = l.weights.len();
            if i < nw {
                let cols = l.weights.ncols();
                return &mut l.weights[(i / cols, i % cols)];
            }
            i -= nw;
            if i < l.biases.len() {
                return &mut l.biases[i];
            }
            i -= l.biases.len();
        }
        panic!("flat parameter index out of range");
    }

    pub fn flat_get(&self, i: usize) -> f64 {
        self.flat_iter()
            .nth(i)
            .expect("flat parameter index out of range")
    }

    /// Raw head output `z` for one observation.
    pub fn head(&self, obs: &[f64]) -> Result<[f64; HEAD_DIM]> {
        if obs.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                actual: obs.len(),
            });
        }
        let last = self.layers.len() - 1;
        let mut x = Array1::from(obs.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.weights.dot(&x);
            z += &layer.biases;
            if i < last {
                z.mapv_inplace(f64::tanh);
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { layer: i });
            }
            x = z;
        }
        Ok([x[0], x[1], x[2], x[3]])
    }

    /// Batched forward pass keeping every activation for backprop.
    /// Row `r` of `obs` is one observation.
    pub(crate) fn forward_batch(&self, obs: ArrayView2<'_, f64>) -> Result<BatchCache> {
        if obs.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                actual: obs.ncols(),
            });
        }
        let last = self.layers.len() - 1;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(obs.to_owned());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = activations[i].dot(&layer.weights.t());
            z += &layer.biases.view().insert_axis(Axis(0));
            if i < last {
                z.mapv_inplace(f64::tanh);
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { layer: i });
            }
            activations.push(z);
        }
        Ok(BatchCache { activations })
    }

    /// Backpropagates `d_head` (row `r` = ∂L/∂z for observation `r`) and
    /// returns the parameter gradient summed over the batch.
    pub(crate) fn backward_batch(&self, cache: &BatchCache, d_head: Array2<f64>) -> Self {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = d_head;
        for i in (0..self.layers.len()).rev() {
            let input = &cache.activations[i];
            let weights = delta.t().dot(input);
            let biases = delta.sum_axis(Axis(0));
            if i > 0 {
                let mut prev = delta.dot(&self.layers[i].weights);
                Zip::from(&mut prev)
                    .and(input)
                    .for_each(|d, &a| *d *= 1.0 - a * a);
                delta = prev;
            }
            grads.push(Layer { weights, biases });
        }
        grads.reverse();
        Self { layers: grads }
    }
}

pub(crate) struct BatchCache {
    activations: Vec<Array2<f64>>,
}

impl BatchCache {
    pub(crate) fn head(&self) -> ArrayView2<'_, f64> {
        self.activations.last().expect("non-empty cache").view()
    }

    pub(crate) fn head_row(&self, r: usize) -> ArrayView1<'_, f64> {
        self.activations.last().expect("non-empty cache").row(r)
    }
}
