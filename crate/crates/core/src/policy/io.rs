// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Weight persistence.
//!
//! Binary layout, all integers and floats little-endian:
//!
//! ```text
//! magic        8 bytes   "QCPOLICY"
//! version      u32       1
//! layers       u32       L
//! dims         L × (fan_in u32, fan_out u32)
//! per layer    fan_out × fan_in f64 weights (row-major), then fan_out f64 biases
//! ```
//!
//! A sidecar text file (TOML) carries the training metadata.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::init::InitScheme;
use super::mlp::{Layer, MlpParameters};
use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: &[u8; 8] = b"QCPOLICY";
pub const WEIGHTS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyMetadata {
    pub target: [f64; 2],
    pub init_scheme: InitScheme,
    pub seed: u64,
    pub training_steps: u64,
    /// Best steady-state evaluation fidelity reached in training, percent.
    pub fidelity: f64,
    pub converged: bool,
}

pub fn encode_weights(params: &MlpParameters) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + params.param_count() * 8);
    out.extend_from_slice(WEIGHTS_MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(params.layers().len() as u32).to_le_bytes());
    for l in params.layers() {
        out.extend_from_slice(&(l.fan_in() as u32).to_le_bytes());
        out.extend_from_slice(&(l.fan_out() as u32).to_le_bytes());
    }
    for l in params.layers() {
        // Iteration order of a standard-layout Array2 is row-major.
        for w in l.weights.iter().chain(l.biases.iter()) {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::Corrupt {
                path: self.path.to_path_buf(),
                reason: "unexpected end of file".into(),
            });
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Decodes the binary format; `path` only labels errors.
pub fn decode_weights(bytes: &[u8], path: &Path) -> Result<MlpParameters> {
    let corrupt = |reason: &str| Error::Corrupt {
        path: path.to_path_buf(),
        reason: reason.into(),
    };
    let mut r = Reader { bytes, path };
    if r.take(WEIGHTS_MAGIC.len())? != WEIGHTS_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = r.u32()?;
    if version != WEIGHTS_VERSION {
        return Err(Error::Version {
            expected: WEIGHTS_VERSION,
            found: version,
        });
    }
    let count = r.u32()? as usize;
    if count == 0 || count > 64 {
        return Err(corrupt("implausible layer count"));
    }
    let mut dims = Vec::with_capacity(count);
    for _ in 0..count {
        let fan_in = r.u32()? as usize;
        let fan_out = r.u32()? as usize;
        if fan_in == 0 || fan_out == 0 || fan_in > 1 << 16 || fan_out > 1 << 16 {
            return Err(corrupt("implausible layer size"));
        }
        dims.push((fan_in, fan_out));
    }
    let mut layers = Vec::with_capacity(count);
    for (fan_in, fan_out) in dims {
        let w = (0..fan_in * fan_out).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let b = (0..fan_out).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        layers.push(Layer {
            weights: Array2::from_shape_vec((fan_out, fan_in), w).expect("sized above"),
            biases: Array1::from(b),
        });
    }
    if !r.bytes.is_empty() {
        return Err(corrupt("trailing bytes"));
    }
    let params = MlpParameters::from_layers(layers).map_err(|e| corrupt(&e.to_string()))?;
    if !params.is_finite() {
        return Err(corrupt("non-finite parameter"));
    }
    Ok(params)
}

pub fn save_weights(params: &MlpParameters, path: &Path) -> Result<()> {
    fs::write(path, encode_weights(params)).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<MlpParameters> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingEntry(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    decode_weights(&bytes, path)
}

pub fn save_metadata(meta: &PolicyMetadata, path: &Path) -> Result<()> {
    let text = toml::to_string(meta).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_metadata(path: &Path) -> Result<PolicyMetadata> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingEntry(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    toml::from_str(&text).map_err(|e| Error::Corrupt {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{default_dims, init};

    fn sample() -> MlpParameters {
        let mut p = init(&default_dims(), InitScheme::XavierNormal { gain: 2.2 }, 9).unwrap();
        p.layers_mut()[2].biases[5] = -0.125;
        p
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = sample();
        let bytes = encode_weights(&p);
        let q = decode_weights(&bytes, Path::new("mem")).unwrap();
        assert_eq!(p, q);
        assert_eq!(encode_weights(&q), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = encode_weights(&sample());
        assert_eq!(&bytes[..8], WEIGHTS_MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 50);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 128);
        let n = sample().param_count();
        assert_eq!(bytes.len(), 16 + 5 * 8 + n * 8);
    }

    #[test]
    fn truncated_and_tampered_files_fail() {
        let bytes = encode_weights(&sample());
        let p = Path::new("mem");
        assert!(matches!(decode_weights(&bytes[..bytes.len() - 3], p), Err(Error::Corrupt { .. })));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode_weights(&extra, p), Err(Error::Corrupt { .. })));
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode_weights(&magic, p), Err(Error::Corrupt { .. })));
        let mut version = bytes;
        version[8] = 2;
        assert!(matches!(
            decode_weights(&version, p),
            Err(Error::Version { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn metadata_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        let meta = PolicyMetadata {
            target: [0.2, 0.8],
            init_scheme: "kaiming-normal(tanh)".parse().unwrap(),
            seed: 17,
            training_steps: 4321,
            fidelity: 99.87654321,
            converged: true,
        };
        save_metadata(&meta, &path).unwrap();
        assert_eq!(load_metadata(&path).unwrap(), meta);
    }
}
