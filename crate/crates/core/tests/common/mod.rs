// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Oracles and fixtures shared by the integration tests.

#![allow(dead_code)]

use num_complex::Complex64 as C64;
use qcontrol::policy::{default_dims, init, InitScheme, MlpParameters};
use qcontrol::quantum::EffectiveHamiltonian;
use rand::Rng;
use rand_distr::StandardNormal;

type M2 = [[C64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `exp(-iH)` by scaling and squaring around a 30-term Taylor series.
pub fn series_exp(h: &EffectiveHamiltonian) -> M2 {
    let norm: f64 = h.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let scale = 0.5f64.powi(squarings);
    let mi = C64::new(0.0, -scale);
    let a: M2 = [
        [mi * h.entry(0, 0), mi * h.entry(0, 1)],
        [mi * h.entry(1, 0), mi * h.entry(1, 1)],
    ];
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut sum = [[one, zero], [zero, one]];
    let mut term = sum;
    for k in 1..30 {
        term = mul(&term, &a);
        for row in &mut term {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

/// Random Hermitian 2×2 matrix with spectral norm at most `max_norm`.
pub fn random_hermitian<R: Rng>(rng: &mut R, max_norm: f64) -> EffectiveHamiltonian {
    let mut g = || rng.sample::<f64, _>(StandardNormal);
    let (a, d, re, im) = (g(), g(), g(), g());
    let h0 = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + re * re + im * im).sqrt();
    // Spectral norm is |h0| + r.
    let s = max_norm * rng.random::<f64>() / (h0.abs() + r).max(1e-12);
    EffectiveHamiltonian::new(
        2,
        &[
            C64::new(a * s, 0.0),
            C64::new(re * s, im * s),
            C64::new(re * s, -im * s),
            C64::new(d * s, 0.0),
        ],
    )
    .expect("hermitian by construction")
}

/// A network whose means and log-variances stay away from the clamp and
/// saturation regions, so finite differences see a smooth function.
pub fn moderate_policy(seed: u64) -> MlpParameters {
    init(&default_dims(), InitScheme::XavierNormal { gain: 0.5 }, seed).unwrap()
}

/// Worst relative error between the analytic score and fourth-order central
/// finite differences over `instances` random (parameters, observation, action)
/// triples on the default architecture, probing `coords` parameters per layer
/// in each instance.
pub fn gradient_gate(instances: u64, coords: usize, seed: u64) -> f64 {
    use qcontrol::policy::{forward, grad_log_prob, log_prob};
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut p = moderate_policy(seed.wrapping_mul(1000) + i);
        for l in p.layers_mut() {
            l.biases.mapv_inplace(|_| rng.random_range(-0.2..0.2));
        }
        let obs: Vec<f64> = (0..p.input_dim()).map(|_| rng.random_range(0.0..1.0)).collect();
        let action = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)];
        let analytic = grad_log_prob(&p, &obs, action).unwrap();
        let f = |q: &MlpParameters| log_prob(&forward(q, &obs).unwrap(), action);
        let mut offset = 0;
        for layer in p.layers() {
            let size = layer.weights.len() + layer.biases.len();
            for _ in 0..coords {
                let k = offset + rng.random_range(0..size);
                let x = p.flat_get(k);
                let h = 1e-4 * x.abs().max(1.0);
                let mut q = p.clone();
                let mut at = |dx: f64| {
                    *q.flat_mut(k) = x + dx;
                    f(&q)
                };
                // Fourth-order central stencil keeps truncation and
                // cancellation error both well below the tolerance.
                let numeric = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
                let exact = analytic.flat_get(k);
                let scale = numeric.abs().max(exact.abs());
                let err = if scale > 1e-6 { (numeric - exact).abs() / scale } else { (numeric - exact).abs() };
                worst = worst.max(err);
            }
            offset += size;
        }
    }
    worst
}
