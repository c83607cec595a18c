// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::ExperimentConfig;
use super::experiment::{permutation_experiment, Arm, SequenceStats};
use super::grid::{grid_search_step_voltages, StepEval};
use super::report::{emit_report, extreme_traces, sequences_csv, ReportTables, TrainingRow};
use crate::bank::{save_bank, BankEntry, ControllerBank, StepController, TargetKey};
use crate::device::{ChipEnv, VoltagePair};
use crate::error::{Error, Result};
use crate::policy::PolicyMetadata;
use crate::trainer::{save_training_log, train_target, RewardSpec, TrainConfig, TrainOutcome, Window};

pub const STEP_VOLTAGES_HEADER: &str = "target_alpha,target_beta,v1,v2,fidelity_full,fidelity_first5ms,fidelity_last5ms";

/// Trains one policy for `target` on a fresh chip and packages it as a bank
/// entry.
pub fn train_entry(
    cfg: &ExperimentConfig,
    target: [f64; 2],
    train: &TrainConfig,
    on_update: impl FnMut(&crate::trainer::LogRow),
) -> Result<(BankEntry, TrainOutcome)> {
    let key = TargetKey::new(target)?;
    let settings = cfg.settings_for(target)?;
    let mut env = ChipEnv::new(cfg.chip.clone())?;
    let spec = RewardSpec::for_target(key.alpha())?;
    let outcome = train_target(&mut env, &spec, train, &settings, on_update)?;
    let entry = BankEntry {
        params: outcome.params.clone(),
        metadata: PolicyMetadata {
            target: key.target(),
            init_scheme: settings.init,
            seed: train.seed,
            training_steps: outcome.updates,
            fidelity: outcome.best_fidelity,
            converged: outcome.converged,
        },
    };
    Ok((entry, outcome))
}

pub fn step_voltages_csv(steps: &[([f64; 2], StepEval)]) -> String {
    let mut s = format!("{STEP_VOLTAGES_HEADER}\n");
    for (t, e) in steps {
        let [v1, v2] = e.voltages.get();
        writeln!(
            s,
            "{},{},{v1},{v2},{},{},{}",
            t[0], t[1], e.fidelity_full, e.fidelity_first_half, e.fidelity_last_half
        )
        .expect("write to string");
    }
    s
}

pub fn parse_step_voltages_csv(text: &str) -> Result<Vec<([f64; 2], StepEval)>> {
    let bad = |n: usize, why: String| Error::Config(format!("step voltages line {n}: {why}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == STEP_VOLTAGES_HEADER => {}
        _ => return Err(bad(1, "unexpected header".into())),
    }
    lines
        .map(|(n, line)| {
            let v = line
                .split(',')
                .map(|x| x.parse::<f64>().map_err(|e| bad(n + 1, e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != 7 {
                return Err(bad(n + 1, format!("expected 7 fields, got {}", v.len())));
            }
            Ok((
                [v[0], v[1]],
                StepEval {
                    voltages: VoltagePair::new([v[2], v[3]])?,
                    fidelity_full: v[4],
                    fidelity_first_half: v[5],
                    fidelity_last_half: v[6],
                },
            ))
        })
        .collect()
}

pub fn step_controller(steps: &[([f64; 2], StepEval)]) -> Result<StepController> {
    let mut c = StepController::new();
    for (t, e) in steps {
        c.insert(*t, e.voltages)?;
    }
    Ok(c)
}

pub fn training_rows(bank: &ControllerBank) -> Vec<TrainingRow> {
    bank.entries()
        .map(|(k, e)| TrainingRow {
            target: k.target(),
            fidelity: e.metadata.fidelity,
            converged: e.metadata.converged,
            updates: e.metadata.training_steps,
        })
        .collect()
}

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Everything the full pipeline produced.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub bank: ControllerBank,
    pub steps: Vec<([f64; 2], StepEval)>,
    pub stats: SequenceStats,
}

/// Trains every target, searches the step baseline, runs the permutation
/// experiment and writes all artifacts under `cfg.output_dir`:
/// `bank/`, `logs/`, `step_voltages.csv`, `sequences.csv` and `report/`.
pub fn run_pipeline(cfg: &ExperimentConfig, mut progress: impl FnMut(&str)) -> Result<PipelineOutput> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    let logs = out.join("logs");
    fs::create_dir_all(&logs).map_err(|e| Error::io(&logs, e))?;
    let steps_per_episode = cfg.train.episode_steps;

    let mut bank = ControllerBank::new();
    for (i, &target) in cfg.targets.iter().enumerate() {
        let key = TargetKey::new(target)?;
        let (entry, outcome) = train_entry(cfg, target, &cfg.train_config_for(i), |_| {})?;
        save_training_log(&outcome.log, &logs.join(format!("train_{key}.csv").replace(',', "_")))?;
        progress(&format!(
            "trained {key}: fidelity {:.4}% after {} updates (converged: {})",
            outcome.best_fidelity, outcome.updates, outcome.converged
        ));
        bank.insert(target, entry)?;
    }
    save_bank(&bank, &out.join("bank"))?;

    let mut steps = Vec::new();
    for &target in &cfg.targets {
        let e = grid_search_step_voltages(&cfg.chip, target[0], cfg.grid_step, steps_per_episode)?;
        progress(&format!(
            "step voltages for {}: {:?} ({:.4}%)",
            TargetKey::new(target)?,
            e.voltages.get(),
            e.fidelity_last_half
        ));
        steps.push((target, e));
    }
    write(&out.join("step_voltages.csv"), step_voltages_csv(&steps))?;
    let baseline = step_controller(&steps)?;

    let stats = permutation_experiment(&bank, &baseline, &cfg.chip, &cfg.targets, steps_per_episode)?;
    write(&out.join("sequences.csv"), sequences_csv(&stats))?;
    let a = stats.aggregate(Arm::Controller, Window::Full);
    let b = stats.aggregate(Arm::Steps, Window::Full);
    progress(&format!(
        "{} sequences: full-window controller {:.4}%, steps {:.4}%",
        stats.sequences.len(),
        a.mean,
        b.mean
    ));

    let traces = extreme_traces(&bank, &baseline, &cfg.chip, &stats, steps_per_episode)?;
    let tables = ReportTables {
        training: training_rows(&bank),
        steps: steps.clone(),
    };
    emit_report(&stats, &tables, &traces, &out.join("report"))?;
    Ok(PipelineOutput { bank, steps, stats })
}
