// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Second-order distortion filter `G(s) = ωn² / (s² + 2ζωn s + ωn²)`.
//!
//! The continuous system is realized with state `x = [y, ẏ]` and discretized
//! by zero-order hold, which is exact for the piecewise-constant voltages the
//! controller applies.

use nalgebra::{Matrix2, Matrix3, Vector2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// ωn in rad/s.
    pub natural_freq: f64,
    /// ζ, dimensionless.
    pub damping: f64,
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.natural_freq.is_finite() && self.natural_freq > 0.0) {
            return Err(Error::Config(format!(
                "filter natural frequency must be positive, got {}",
                self.natural_freq
            )));
        }
        if !(self.damping.is_finite() && self.damping > 0.0) {
            return Err(Error::Config(format!(
                "filter damping must be positive, got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Internal state `X` of one electrode's filter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DistortionFilterState(pub [f64; 2]);

/// Discrete state-space model `x' = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteFilter {
    pub a: Matrix2<f64>,
    pub b: Vector2<f64>,
    pub c: [f64; 2],
    pub d: f64,
}

/// Exact ZOH discretization at sample period `1 / sample_rate`.
///
/// Uses the augmented exponential `exp([[A, B], [0, 0]]·T) = [[Ad, Bd], [0, 1]]`.
pub fn discretize_filter(params: FilterParams, sample_rate: f64) -> Result<DiscreteFilter> {
    params.validate()?;
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::Config(format!("sample rate must be positive, got {sample_rate}")));
    }
    let w = params.natural_freq;
    let z = params.damping;
    let t = 1.0 / sample_rate;
    #[rustfmt::skip]
    let aug = Matrix3::new(
        0.0,       1.0,            0.0,
        -w * w,    -2.0 * z * w,   w * w,
        0.0,       0.0,            0.0,
    ) * t;
    let e = aug.exp();
    Ok(DiscreteFilter {
        a: Matrix2::new(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]),
        b: Vector2::new(e[(0, 2)], e[(1, 2)]),
        c: [1.0, 0.0],
        d: 0.0,
    })
}

impl DiscreteFilter {
    /// Advances one sample with input held at `u`; returns the output at the
    /// new sample instant.
    #[inline]
    pub fn step(&self, state: &mut DistortionFilterState, u: f64) -> f64 {
        let [x0, x1] = state.0;
        let n0 = self.a[(0, 0)] * x0 + self.a[(0, 1)] * x1 + self.b[0] * u;
        let n1 = self.a[(1, 0)] * x0 + self.a[(1, 1)] * x1 + self.b[1] * u;
        state.0 = [n0, n1];
        self.c[0] * n0 + self.c[1] * n1 + self.d * u
    }

    /// Steady-state gain `C (I - A)^-1 B + D`.
    pub fn dc_gain(&self) -> f64 {
        let inv = (Matrix2::identity() - self.a)
            .try_inverse()
            .expect("stable filter has no unit eigenvalue");
        let x = inv * self.b;
        self.c[0] * x[0] + self.c[1] * x[1] + self.d
    }
}
