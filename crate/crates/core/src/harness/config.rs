// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bank::TargetKey;
use crate::device::ChipConfig;
use crate::error::{Error, Result};
use crate::policy::InitScheme;
use crate::trainer::{TargetSettings, TrainConfig};

/// The five standard targets, `α` from 0 to 1.
pub const STANDARD_TARGETS: [[f64; 2]; 5] =
    [[0.0, 1.0], [0.2, 0.8], [0.5, 0.5], [0.8, 0.2], [1.0, 0.0]];

/// Per-target replacement for the standard learning rate or initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetOverride {
    pub target: [f64; 2],
    pub learning_rate: Option<f64>,
    pub init: Option<InitScheme>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub chip: ChipConfig,
    pub targets: Vec<[f64; 2]>,
    /// Shared training settings; the seed is replaced per target.
    pub train: TrainConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub target_settings: Vec<TargetOverride>,
    pub output_dir: PathBuf,
    /// Target `i` trains with seed `master_seed + i`.
    pub master_seed: u64,
    /// Grid spacing of the step-voltage search, volts.
    pub grid_step: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            chip: ChipConfig::default(),
            targets: STANDARD_TARGETS.to_vec(),
            train: TrainConfig::default(),
            target_settings: Vec::new(),
            output_dir: PathBuf::from("out"),
            master_seed: 0,
            grid_step: 0.01,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.chip.validate()?;
        self.train.validate()?;
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(Error::Config(format!("grid_step {} must be positive", self.grid_step)));
        }
        let mut seen = BTreeSet::new();
        for &t in &self.targets {
            let key = TargetKey::new(t).map_err(|e| Error::Config(format!("target {t:?}: {e}")))?;
            if !seen.insert(key) {
                return Err(Error::DuplicateTarget(key.to_string()));
            }
        }
        for o in &self.target_settings {
            TargetKey::new(o.target).map_err(|e| Error::Config(format!("target {:?}: {e}", o.target)))?;
        }
        for &t in &self.targets {
            self.settings_for(t)?;
        }
        Ok(())
    }

    /// Learning rate and initialization for `target`: the standard settings
    /// with any configured override applied.
    pub fn settings_for(&self, target: [f64; 2]) -> Result<TargetSettings> {
        let key = TargetKey::new(target)?;
        let o = self
            .target_settings
            .iter()
            .find(|o| TargetKey::new(o.target).is_ok_and(|k| k == key));
        let standard = TargetSettings::standard(key.alpha());
        let learning_rate = o
            .and_then(|o| o.learning_rate)
            .or(standard.map(|s| s.learning_rate));
        let init = o.and_then(|o| o.init).or(standard.map(|s| s.init));
        match (learning_rate, init) {
            (Some(learning_rate), Some(init)) => {
                let s = TargetSettings { learning_rate, init };
                s.validate()?;
                Ok(s)
            }
            _ => Err(Error::Config(format!(
                "target {key} has no standard settings; give learning_rate and init in target_settings"
            ))),
        }
    }

    /// Training config for target `index`.
    pub fn train_config_for(&self, index: usize) -> TrainConfig {
        TrainConfig {
            seed: self.master_seed.wrapping_add(index as u64),
            ..self.train.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg: ExperimentConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn hierarchical_file() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            master_seed = 7
            targets = [[0.5, 0.5], [0.3, 0.7]]
            [chip]
            filter_damping = 0.5
            [train]
            max_updates = 10
            [[target_settings]]
            target = [0.3, 0.7]
            learning_rate = 1e-4
            init = "xavier-normal(gain=1)"
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.chip.filter_damping, 0.5);
        assert_eq!(cfg.train.max_updates, 10);
        assert_eq!(cfg.settings_for([0.3, 0.7]).unwrap().learning_rate, 1e-4);
        assert_eq!(cfg.settings_for([0.5, 0.5]).unwrap().learning_rate, 8e-5);
        assert_eq!(cfg.train_config_for(1).seed, 8);
    }

    #[test]
    fn rejects_bad_configs() {
        let dup = ExperimentConfig {
            targets: vec![[0.5, 0.5], [0.5, 0.5]],
            ..Default::default()
        };
        assert!(matches!(dup.validate(), Err(Error::DuplicateTarget(_))));
        let unknown = ExperimentConfig {
            targets: vec![[0.3, 0.7]],
            ..Default::default()
        };
        assert!(unknown.validate().is_err());
        assert!(toml::from_str::<ExperimentConfig>("seeds = 3").is_err());
        let bad_grid = ExperimentConfig {
            grid_step: 0.0,
            ..Default::default()
        };
        assert!(bad_grid.validate().is_err());
    }
}
