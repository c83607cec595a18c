// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! One trained policy per target distribution, an exact-match selector and
//! chained execution of target sequences without intermediate resets.
//!
//! On disk a bank is a directory:
//!
//! ```text
//! manifest.txt          "qcontrol-bank 1", then one "p0,p1" line per target
//! nn_<p0>_<p1>.bin      weights (see [`crate::policy::encode_weights`])
//! nn_<p0>_<p1>.toml     metadata
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::device::{ChipEnv, Environment, ObservationWindow, VoltagePair};
use crate::error::{Error, Result};
use crate::policy::{
    forward, load_metadata, load_weights, mean_action, save_metadata, save_weights, MlpParameters,
    PolicyMetadata,
};
use crate::quantum::ProbabilityDistribution;

const MANIFEST: &str = "manifest.txt";
const MANIFEST_MAGIC: &str = "qcontrol-bank";
pub const BANK_VERSION: u32 = 1;

/// Target distribution quantized to 4 decimals. Orders by first component,
/// which is the canonical bank order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TargetKey([i64; 2]);

impl TargetKey {
    pub fn new(target: [f64; 2]) -> Result<Self> {
        ProbabilityDistribution::new(&target)?;
        Ok(Self(target.map(|p| (p * 1e4).round() as i64)))
    }

    pub fn alpha(&self) -> f64 {
        self.0[0] as f64 / 1e4
    }

    pub fn target(&self) -> [f64; 2] {
        self.0.map(|q| q as f64 / 1e4)
    }

    fn file_stem(&self) -> String {
        let [a, b] = self.target();
        format!("nn_{a:.4}_{b:.4}")
    }
}

impl fmt::Display for TargetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b] = self.target();
        write!(f, "{a:.4},{b:.4}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BankEntry {
    pub params: MlpParameters,
    pub metadata: PolicyMetadata,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ControllerBank {
    entries: BTreeMap<TargetKey, BankEntry>,
}

impl ControllerBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, target: [f64; 2], entry: BankEntry) -> Result<()> {
        let key = TargetKey::new(target)?;
        if self.entries.contains_key(&key) {
            return Err(Error::DuplicateTarget(key.to_string()));
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    /// Removes and returns the entry for `target`, if any.
    pub fn remove(&mut self, target: [f64; 2]) -> Result<Option<BankEntry>> {
        Ok(self.entries.remove(&TargetKey::new(target)?))
    }

    /// The stored policy for exactly `target` (after quantization).
    pub fn select(&self, target: [f64; 2]) -> Result<&MlpParameters> {
        Ok(&self.entry(target)?.params)
    }

    pub fn entry(&self, target: [f64; 2]) -> Result<&BankEntry> {
        let key = TargetKey::new(target)?;
        self.entries
            .get(&key)
            .ok_or_else(|| Error::UnknownTarget(key.to_string()))
    }

    pub fn targets(&self) -> impl Iterator<Item = TargetKey> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (TargetKey, &BankEntry)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Anything that maps (active target, latest observation) to voltages.
pub trait Controller {
    fn act(&self, target: [f64; 2], observation: &ObservationWindow) -> Result<[f64; 2]>;

    /// Fails early if `target` cannot be served.
    fn check(&self, target: [f64; 2]) -> Result<()>;
}

impl Controller for ControllerBank {
    fn act(&self, target: [f64; 2], observation: &ObservationWindow) -> Result<[f64; 2]> {
        let out = forward(self.select(target)?, observation.samples())?;
        Ok(mean_action(&out).get())
    }

    fn check(&self, target: [f64; 2]) -> Result<()> {
        self.entry(target).map(|_| ())
    }
}

/// Open-loop baseline: one constant voltage pair per target.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepController {
    voltages: BTreeMap<TargetKey, VoltagePair>,
}

impl StepController {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, target: [f64; 2], v: VoltagePair) -> Result<()> {
        let key = TargetKey::new(target)?;
        if self.voltages.insert(key, v).is_some() {
            return Err(Error::DuplicateTarget(key.to_string()));
        }
        Ok(())
    }

    pub fn voltages(&self, target: [f64; 2]) -> Result<VoltagePair> {
        let key = TargetKey::new(target)?;
        self.voltages
            .get(&key)
            .copied()
            .ok_or_else(|| Error::UnknownTarget(key.to_string()))
    }
}

impl Controller for StepController {
    fn act(&self, target: [f64; 2], _: &ObservationWindow) -> Result<[f64; 2]> {
        Ok(self.voltages(target)?.get())
    }

    fn check(&self, target: [f64; 2]) -> Result<()> {
        self.voltages(target).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub targets: Vec<[f64; 2]>,
    /// Control steps per target.
    pub episode_steps: usize,
    /// Reset the device before every episode instead of only the first.
    pub reset_each_episode: bool,
}

impl SequenceSpec {
    pub fn new(targets: Vec<[f64; 2]>) -> Self {
        Self {
            targets,
            episode_steps: 500,
            reset_each_episode: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub time_s: f64,
    pub alpha: f64,
    /// Applied (undistorted) electrode voltages.
    pub v1: f64,
    pub v2: f64,
    pub target_alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceTrace {
    pub samples: Vec<TraceSample>,
    pub targets: Vec<[f64; 2]>,
    /// Simulator samples per episode.
    pub episode_samples: usize,
}

impl SequenceTrace {
    pub fn alphas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.alpha).collect()
    }
}

/// Resets the chip once and runs one exploit episode per target, carrying the
/// device state across episode boundaries. Every simulator sample is traced;
/// sample `k` is stamped `k / sample_rate`.
pub fn run_sequence<C: Controller + ?Sized>(
    controller: &C,
    env: &mut ChipEnv,
    seq: &SequenceSpec,
) -> Result<SequenceTrace> {
    for &t in &seq.targets {
        controller.check(t)?;
    }
    if seq.episode_steps == 0 {
        return Err(Error::Config("episode_steps must be >= 1".into()));
    }
    let rate = env.config().sample_rate;
    let per_step = env.config().samples_per_step;
    let episode_samples = seq.episode_steps * per_step;
    let mut samples = Vec::with_capacity(episode_samples * seq.targets.len());
    let mut obs = env.reset()?;
    for (i, &target) in seq.targets.iter().enumerate() {
        if i > 0 && seq.reset_each_episode {
            obs = env.reset()?;
        }
        for _ in 0..seq.episode_steps {
            let t = env.step(controller.act(target, &obs)?)?;
            let [v1, v2] = t.applied.get();
            for &alpha in t.observation.samples() {
                samples.push(TraceSample {
                    time_s: samples.len() as f64 / rate,
                    alpha,
                    v1,
                    v2,
                    target_alpha: target[0],
                });
            }
            obs = t.observation;
        }
    }
    if samples.len() != episode_samples * seq.targets.len() {
        return Err(Error::Invariant(format!(
            "trace has {} samples, expected {}",
            samples.len(),
            episode_samples * seq.targets.len()
        )));
    }
    Ok(SequenceTrace {
        samples,
        targets: seq.targets.clone(),
        episode_samples,
    })
}

pub const TRACE_HEADER: &str = "time_s,alpha,v1,v2,target_alpha";

pub fn write_trace<W: Write>(mut out: W, trace: &SequenceTrace) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for s in &trace.samples {
        writeln!(out, "{},{},{},{},{}", s.time_s, s.alpha, s.v1, s.v2, s.target_alpha)?;
    }
    Ok(())
}

pub fn save_trace(trace: &SequenceTrace, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_trace(&mut w, trace)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes the bank into `dir`, creating it if needed.
pub fn save_bank(bank: &ControllerBank, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = format!("{MANIFEST_MAGIC} {BANK_VERSION}\n");
    for (key, entry) in bank.entries() {
        let stem = key.file_stem();
        save_weights(&entry.params, &dir.join(format!("{stem}.bin")))?;
        save_metadata(&entry.metadata, &dir.join(format!("{stem}.toml")))?;
        manifest.push_str(&format!("{key}\n"));
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}

pub fn load_bank(dir: &Path) -> Result<ControllerBank> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingEntry(path.clone()),
        _ => Error::io(&path, e),
    })?;
    let corrupt = |reason: String| Error::Corrupt {
        path: path.clone(),
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| corrupt("empty manifest".into()))?;
    let version = header
        .strip_prefix(MANIFEST_MAGIC)
        .map(str::trim)
        .ok_or_else(|| corrupt(format!("bad header {header:?}")))?
        .parse::<u32>()
        .map_err(|e| corrupt(format!("bad version: {e}")))?;
    if version != BANK_VERSION {
        return Err(Error::Version {
            expected: BANK_VERSION,
            found: version,
        });
    }
    let mut bank = ControllerBank::new();
    for line in lines {
        let target = parse_target(line).map_err(|e| corrupt(format!("line {line:?}: {e}")))?;
        let key = TargetKey::new(target)?;
        let stem = key.file_stem();
        let params = load_weights(&dir.join(format!("{stem}.bin")))?;
        let meta_path = dir.join(format!("{stem}.toml"));
        let metadata = load_metadata(&meta_path)?;
        if TargetKey::new(metadata.target)? != key {
            return Err(Error::Corrupt {
                path: meta_path,
                reason: format!("metadata target {:?} does not match {key}", metadata.target),
            });
        }
        bank.insert(target, BankEntry { params, metadata })?;
    }
    Ok(bank)
}

/// Parses `"a,b"` into a validated two-mode distribution.
pub fn parse_target(s: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(Error::Config(format!("target {s:?} must be two comma-separated numbers")));
    };
    let parse = |x: &str| {
        x.parse::<f64>()
            .map_err(|e| Error::Config(format!("target {s:?}: {e}")))
    };
    let t = [parse(a)?, parse(b)?];
    ProbabilityDistribution::new(&t).map_err(|e| Error::Config(format!("target {s:?}: {e}")))?;
    Ok(t)
}
