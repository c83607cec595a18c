// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use qcontrol::bank::{load_bank, parse_target, run_sequence, save_bank, save_trace, ControllerBank, SequenceSpec, TargetKey};
use qcontrol::device::ChipEnv;
use qcontrol::harness::{
    emit_report, extreme_traces, grid_search_step_voltages, parse_sequences_csv, parse_step_voltages_csv,
    permutation_experiment, run_pipeline, sequences_csv, step_controller, step_voltages_csv, train_entry,
    training_rows, windowed_fidelity, Arm, ExperimentConfig, ReportTables,
};
use qcontrol::trainer::{evaluate, save_training_log, RewardSpec, Window};
use qcontrol::{Error, Result};

/// Train and evaluate per-target policies for the simulated two-waveguide
/// chip, and compare them against constant step voltages.
#[derive(Parser, Debug)]
#[command(name = "qcontrol", version)]
struct Cli {
    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one policy and add it to the bank in <out>/bank.
    Train {
        /// Target distribution, e.g. 0.2,0.8.
        #[arg(long, value_name = "A,B")]
        target: String,
        /// Training seed; overrides the seed derived from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Maximum number of updates; overrides the config.
        #[arg(long)]
        max_updates: Option<u64>,
        /// Experiment directory; defaults to the config's output_dir.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Evaluate a bank policy on one episode from reset.
    Eval {
        /// Bank directory.
        #[arg(long, value_name = "DIR")]
        bank: PathBuf,
        #[arg(long, value_name = "A,B")]
        target: String,
    },
    /// Find the best constant step voltages for a target.
    Gridsearch {
        #[arg(long, value_name = "A,B")]
        target: String,
        /// Grid spacing in volts; overrides the config.
        #[arg(long, value_name = "VOLTS")]
        grid_step: Option<f64>,
    },
    /// Run target sequences without resetting the chip between episodes.
    #[command(group(ArgGroup::new("which").required(true).args(["perm_all", "order"])))]
    Sequence {
        /// Bank directory.
        #[arg(long, value_name = "DIR")]
        bank: PathBuf,
        /// Run every permutation of the bank's targets with the controller
        /// and with step voltages; writes sequences.csv and
        /// step_voltages.csv (reused if present) to --out.
        #[arg(long)]
        perm_all: bool,
        /// One sequence of targets separated by ';', e.g. "0,1;0.5,0.5";
        /// writes trace.csv to --out.
        #[arg(long, value_name = "LIST")]
        order: Option<String>,
        /// Output directory.
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Write histogram, traces and summary from a finished sequence run.
    Report {
        /// Directory holding bank/, step_voltages.csv and sequences.csv.
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Train all targets, search step voltages, run every permutation and
    /// write the report into the config's output_dir.
    Pipeline {
        /// Master seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn write(path: &Path, text: String) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    let steps = cfg.train.episode_steps;
    match cli.command {
        Command::Train { target, seed, max_updates, out } => {
            let target = parse_target(&target)?;
            let key = TargetKey::new(target)?;
            let index = cfg
                .targets
                .iter()
                .position(|&t| TargetKey::new(t).is_ok_and(|k| k == key))
                .unwrap_or(0);
            let mut train = cfg.train_config_for(index);
            if let Some(s) = seed {
                train.seed = s;
            }
            if let Some(m) = max_updates {
                train.max_updates = m;
            }
            let out = out.unwrap_or(cfg.output_dir.clone());
            let (entry, outcome) = train_entry(&cfg, target, &train, |r| {
                if r.update % 100 == 0 {
                    eprintln!(
                        "update {}: mean reward {:.3}, eval {:.4}% / {:.4}%, eta {:e}",
                        r.update, r.mean_reward, r.eval_fidelity_full, r.eval_fidelity_last5ms, r.eta
                    );
                }
            })?;
            let bank_dir = out.join("bank");
            let mut bank = if bank_dir.join("manifest.txt").exists() {
                load_bank(&bank_dir)?
            } else {
                ControllerBank::new()
            };
            bank.remove(target)?;
            bank.insert(target, entry)?;
            save_bank(&bank, &bank_dir)?;
            let logs = out.join("logs");
            mkdir(&logs)?;
            save_training_log(&outcome.log, &logs.join(format!("train_{key}.csv").replace(',', "_")))?;
            println!(
                "target {key}: best last-5ms fidelity {:.4}% at update {} of {} (converged: {})",
                outcome.best_fidelity, outcome.best_update, outcome.updates, outcome.converged
            );
        }
        Command::Eval { bank, target } => {
            let target = parse_target(&target)?;
            let bank = load_bank(&bank)?;
            let mut env = ChipEnv::new(cfg.chip.clone())?;
            let e = evaluate(bank.select(target)?, &mut env, &RewardSpec::for_target(target[0])?, steps)?;
            println!(
                "full {:.4}%  first-5ms {:.4}%  last-5ms {:.4}%",
                e.fidelity_full, e.fidelity_first_half, e.fidelity_last_half
            );
        }
        Command::Gridsearch { target, grid_step } => {
            let target = parse_target(&target)?;
            let e = grid_search_step_voltages(&cfg.chip, target[0], grid_step.unwrap_or(cfg.grid_step), steps)?;
            let [v1, v2] = e.voltages.get();
            println!(
                "v1 {v1:.2} V  v2 {v2:.2} V  full {:.4}%  first-5ms {:.4}%  last-5ms {:.4}%",
                e.fidelity_full, e.fidelity_first_half, e.fidelity_last_half
            );
        }
        Command::Sequence { bank, perm_all, order, out } => {
            let bank = load_bank(&bank)?;
            mkdir(&out)?;
            if perm_all {
                let targets: Vec<[f64; 2]> = bank.targets().map(|k| k.target()).collect();
                let path = out.join("step_voltages.csv");
                let step_evals = if path.exists() {
                    parse_step_voltages_csv(&read(&path)?)?
                } else {
                    let evals = targets
                        .iter()
                        .map(|t| Ok((*t, grid_search_step_voltages(&cfg.chip, t[0], cfg.grid_step, steps)?)))
                        .collect::<Result<Vec<_>>>()?;
                    write(&path, step_voltages_csv(&evals))?;
                    evals
                };
                let baseline = step_controller(&step_evals)?;
                let stats = permutation_experiment(&bank, &baseline, &cfg.chip, &targets, steps)?;
                write(&out.join("sequences.csv"), sequences_csv(&stats))?;
                for (name, w) in [("full", Window::Full), ("first-5ms", Window::FirstHalf), ("last-5ms", Window::LastHalf)] {
                    let c = stats.aggregate(Arm::Controller, w);
                    let s = stats.aggregate(Arm::Steps, w);
                    println!(
                        "{name:<10} controller {:.4} ± {:.4}   steps {:.4} ± {:.4}",
                        c.mean, c.std, s.mean, s.std
                    );
                }
            } else {
                let list = order.expect("clap enforces one of the two");
                let targets = list.split(';').map(parse_target).collect::<Result<Vec<_>>>()?;
                let spec = SequenceSpec { episode_steps: steps, ..SequenceSpec::new(targets.clone()) };
                let mut env = ChipEnv::new(cfg.chip.clone())?;
                let trace = run_sequence(&bank, &mut env, &spec)?;
                save_trace(&trace, &out.join("trace.csv"))?;
                let alphas = trace.alphas();
                let full = windowed_fidelity(&alphas, &targets, trace.episode_samples, Window::Full)?;
                let last = windowed_fidelity(&alphas, &targets, trace.episode_samples, Window::LastHalf)?;
                for ((t, f), l) in targets.iter().zip(full).zip(last) {
                    println!("{}: full {f:.4}%  last-5ms {l:.4}%", TargetKey::new(*t)?);
                }
            }
        }
        Command::Report { input, out } => {
            let bank = load_bank(&input.join("bank"))?;
            let targets: Vec<[f64; 2]> = bank.targets().map(|k| k.target()).collect();
            let step_evals = parse_step_voltages_csv(&read(&input.join("step_voltages.csv"))?)?;
            let stats = parse_sequences_csv(&read(&input.join("sequences.csv"))?, &targets)?;
            let baseline = step_controller(&step_evals)?;
            let traces = extreme_traces(&bank, &baseline, &cfg.chip, &stats, steps)?;
            let tables = ReportTables { training: training_rows(&bank), steps: step_evals };
            emit_report(&stats, &tables, &traces, &out)?;
            println!("report written to {}", out.display());
        }
        Command::Pipeline { seed } => {
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            run_pipeline(&cfg, |msg| eprintln!("{msg}"))?;
            println!("outputs written to {}", cfg.output_dir.display());
        }
    }
    Ok(())
}
