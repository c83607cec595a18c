// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mlp::MlpParameters;
use crate::error::{Error, Result};

/// Nonlinearity that sets the Kaiming gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    Linear,
    Tanh,
    Relu,
    LeakyRelu { negative_slope: f64 },
}

impl Nonlinearity {
    pub fn gain(self) -> f64 {
        match self {
            Nonlinearity::Linear => 1.0,
            Nonlinearity::Tanh => 5.0 / 3.0,
            Nonlinearity::Relu => 2f64.sqrt(),
            Nonlinearity::LeakyRelu { negative_slope } => {
                (2.0 / (1.0 + negative_slope * negative_slope)).sqrt()
            }
        }
    }
}

/// Weight initialization. Biases always start at zero.
///
/// Textual form (config files, metadata): `xavier-normal(gain=5)`,
/// `kaiming-normal(tanh)`, `kaiming-normal(leaky_relu)`,
/// `kaiming-normal(leaky_relu=0.01)`, `kaiming-normal(relu)`,
/// `kaiming-normal(linear)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitScheme {
    /// `std = gain·√(2 / (fan_in + fan_out))`.
    XavierNormal { gain: f64 },
    /// `std = gain(nonlinearity) / √fan_in`.
    KaimingNormal { nonlinearity: Nonlinearity },
}

impl InitScheme {
    pub fn std_dev(&self, fan_in: usize, fan_out: usize) -> f64 {
        match *self {
            InitScheme::XavierNormal { gain } => gain * (2.0 / (fan_in + fan_out) as f64).sqrt(),
            InitScheme::KaimingNormal { nonlinearity } => nonlinearity.gain() / (fan_in as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let gain = match *self {
            InitScheme::XavierNormal { gain } => gain,
            InitScheme::KaimingNormal { nonlinearity } => nonlinearity.gain(),
        };
        if gain.is_finite() && gain > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!("init gain must be positive, got {gain}")))
        }
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InitScheme::XavierNormal { gain } => write!(f, "xavier-normal(gain={gain})"),
            InitScheme::KaimingNormal { nonlinearity } => match nonlinearity {
                Nonlinearity::Linear => write!(f, "kaiming-normal(linear)"),
                Nonlinearity::Tanh => write!(f, "kaiming-normal(tanh)"),
                Nonlinearity::Relu => write!(f, "kaiming-normal(relu)"),
                Nonlinearity::LeakyRelu { negative_slope } => {
                    write!(f, "kaiming-normal(leaky_relu={negative_slope})")
                }
            },
        }
    }
}

impl FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unrecognized init scheme `{s}`"));
        let s = s.trim();
        let (kind, args) = s
            .strip_suffix(')')
            .and_then(|body| body.split_once('('))
            .ok_or_else(bad)?;
        let args = args.trim();
        let scheme = match kind.trim() {
            "xavier-normal" => {
                let gain = match args.strip_prefix("gain=") {
                    Some(g) => g.trim().parse().map_err(|_| bad())?,
                    None if args.is_empty() => 1.0,
                    None => return Err(bad()),
                };
                InitScheme::XavierNormal { gain }
            }
            "kaiming-normal" => {
                let nonlinearity = match args.split_once('=') {
                    Some(("leaky_relu", slope)) => Nonlinearity::LeakyRelu {
                        negative_slope: slope.trim().parse().map_err(|_| bad())?,
                    },
                    Some(_) => return Err(bad()),
                    // torch's kaiming_normal_ defaults the leaky slope to 0.
                    None => match args {
                        "leaky_relu" => Nonlinearity::LeakyRelu { negative_slope: 0.0 },
                        "tanh" => Nonlinearity::Tanh,
                        "relu" => Nonlinearity::Relu,
                        "linear" | "" => Nonlinearity::Linear,
                        _ => return Err(bad()),
                    },
                };
                InitScheme::KaimingNormal { nonlinearity }
            }
            _ => return Err(bad()),
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

impl TryFrom<String> for InitScheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitScheme> for String {
    fn from(s: InitScheme) -> String {
        s.to_string()
    }
}

/// Draws fresh parameters for layer sizes `dims` from a generator seeded
/// with `seed`.
pub fn init(dims: &[usize], scheme: InitScheme, seed: u64) -> Result<MlpParameters> {
    scheme.validate()?;
    let mut params = MlpParameters::zeros(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in params.layers_mut() {
        let std = scheme.std_dev(layer.fan_in(), layer.fan_out());
        layer.weights.mapv_inplace(|_| {
            let n: f64 = rng.sample(StandardNormal);
            std * n
        });
    }
    Ok(params)
}
