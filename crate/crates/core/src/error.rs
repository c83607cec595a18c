// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value in layer {layer}")]
    NonFinite { layer: usize },

    #[error("non-finite gradient")]
    NonFiniteGradient,

    #[error("environment used before reset")]
    NotReset,

    #[error("no policy stored for target {0}")]
    UnknownTarget(String),

    #[error("duplicate target {0}")]
    DuplicateTarget(String),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { expected: u32, found: u32 },

    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("missing bank entry {0}")]
    MissingEntry(PathBuf),

    #[error("misaligned trace: {len} samples is not a multiple of {episode}")]
    MisalignedTrace { len: usize, episode: usize },

    #[error("sequence {index} failed: {source}")]
    Sequence {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
