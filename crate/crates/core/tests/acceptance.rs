// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Runs without the libtest harness so that each criterion
//! prints exactly one PASS/FAIL line; the process exits non-zero if any
//! criterion fails. Criteria 6 and 7 reuse the bank trained for criterion 5.
//!
//! The full suite trains five policies and takes on the order of an hour on a
//! single core.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qcontrol::bank::{save_bank, BankEntry, ControllerBank};
use qcontrol::device::{discretize_filter, ChipConfig, ChipEnv, DistortionFilterState};
use qcontrol::harness::*;
use qcontrol::policy::{default_dims, forward, init, InitScheme};
use qcontrol::quantum::*;
use qcontrol::trainer::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Tolerances and budgets, pinned.
const UNITARITY_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-10;
const PHASE_TOL: f64 = 1e-10;
const HERMITIAN_SAMPLES: usize = 1000;
const SPECTRAL_NORM: f64 = 10.0;
const FILTER_TOL: f64 = 1e-9;
const OVERSHOOT_TOL: f64 = 1e-3;
const GRADIENT_INSTANCES: u64 = 100;
const GRADIENT_COORDS_PER_LAYER: usize = 6;
const GRADIENT_TOL: f64 = 1e-4;
const BANDIT_SEEDS: u64 = 20;
const BANDIT_REQUIRED: usize = 19;
const BANDIT_UPDATES: u64 = 2000;
const BANDIT_RADIUS: f64 = 0.1;
const TRAIN_SEEDS: [u64; 3] = [0, 1, 2];
const TRAIN_BUDGET: u64 = 20_000;
const TRAIN_REQUIRED: usize = 4;
const STEADY_STATE: f64 = 99.0;
const REWARD_EDGE_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion(id: u32, name: &str, results: &mut Vec<bool>, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let o = f();
    println!(
        "criterion {id} {} {name}: {} [{:.1}s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        start.elapsed().as_secs_f64()
    );
    results.push(o.pass);
}

fn quantum_kinematics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = QuantumState::basis(2, 1).unwrap();
    let (mut unitarity, mut oracle, mut phase) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..HERMITIAN_SAMPLES {
        let h = common::random_hermitian(&mut rng, SPECTRAL_NORM);
        let u = unitary_from_hamiltonian(&h);
        unitarity = unitarity.max(u.unitarity_error());
        let series = common::series_exp(&h);
        for i in 0..2 {
            for j in 0..2 {
                oracle = oracle.max((u.entry(i, j) - series[i][j]).norm());
            }
        }
        let c = (k as f64 - 500.0) / 25.0;
        let p0 = measure(&evolve(&u, &psi).unwrap());
        let p1 = measure(&evolve(&unitary_from_hamiltonian(&h.shifted(c)), &psi).unwrap());
        for (a, b) in p0.probs().iter().zip(p1.probs()) {
            phase = phase.max((a - b).abs());
        }
    }
    outcome(
        unitarity < UNITARITY_TOL && oracle < ORACLE_TOL && phase < PHASE_TOL,
        format!("unitarity {unitarity:.1e}, series oracle {oracle:.1e}, global phase {phase:.1e}"),
    )
}

fn filter_oracle() -> Outcome {
    let cfg = ChipConfig::default();
    let p = cfg.filter_params(0);
    let f = discretize_filter(p, cfg.sample_rate).unwrap();
    let (wn, z) = (p.natural_freq, p.damping);
    let wd = wn * (1.0 - z * z).sqrt();
    let closed = |t: f64| 1.0 - (-z * wn * t).exp() * ((wd * t).cos() + z * wn / wd * (wd * t).sin());
    let mut s = DistortionFilterState::default();
    let (mut err, mut peak) = (0.0f64, f64::MIN);
    // Ten milliseconds of samples; output k is the state after k+1 periods.
    for k in 0..25_000 {
        let y = f.step(&mut s, 1.0);
        let t = (k + 1) as f64 / cfg.sample_rate;
        err = err.max((y - closed(t)).abs());
        peak = peak.max(y);
    }
    let expected = (-std::f64::consts::PI * z / (1.0 - z * z).sqrt()).exp();
    let overshoot = peak - 1.0;
    outcome(
        err < FILTER_TOL && (overshoot - expected).abs() < OVERSHOOT_TOL,
        format!("max step-response error {err:.1e}, overshoot {overshoot:.4} vs {expected:.4}"),
    )
}

fn gradient_gate() -> Outcome {
    let worst = common::gradient_gate(GRADIENT_INSTANCES, GRADIENT_COORDS_PER_LAYER, 3);
    outcome(
        worst < GRADIENT_TOL,
        format!("{GRADIENT_INSTANCES} instances, worst relative error {worst:.2e}"),
    )
}

fn bandit() -> Outcome {
    let optimum = [2.5, -1.5];
    let mut hits = 0;
    let mut worst = 0.0f64;
    for seed in 0..BANDIT_SEEDS {
        let mut env = BanditEnv::new(optimum, 50).unwrap();
        let params = init(&default_dims(), InitScheme::XavierNormal { gain: 1.0 }, seed).unwrap();
        let mut learner = Learner::new(params, seed);
        for u in 0..BANDIT_UPDATES {
            let step = UpdateSettings {
                steps: 1,
                episodes: 16,
                gamma: 0.99,
                baseline: Baseline::BatchMean,
                learning_rate: 1e-3 * 0.5f64.powi((u / 500) as i32),
                weight_decay: 0.0,
            };
            learner.update(&mut env, Ok, &step).unwrap();
        }
        let obs = qcontrol::device::Environment::reset(&mut env).unwrap();
        let mean = forward(learner.params(), obs.samples()).unwrap().mean;
        let d = ((mean[0] - optimum[0]).powi(2) + (mean[1] - optimum[1]).powi(2)).sqrt();
        worst = worst.max(d);
        hits += usize::from(d < BANDIT_RADIUS);
    }
    outcome(
        hits >= BANDIT_REQUIRED,
        format!("{hits}/{BANDIT_SEEDS} seeds within {BANDIT_RADIUS} of the optimum, worst distance {worst:.3}"),
    )
}

struct Trained {
    bank: ControllerBank,
    /// Per target: (seed, best last-half fidelity, updates, converged) per
    /// attempted seed.
    attempts: BTreeMap<String, Vec<(u64, f64, u64, bool)>>,
}

/// Trains every standard target, trying the fixed seeds in order until one
/// converges. The bank keeps the converged policy, or the best one if none
/// did.
fn train_bank(cfg: &ExperimentConfig) -> Trained {
    let mut bank = ControllerBank::new();
    let mut attempts = BTreeMap::new();
    for &target in &cfg.targets {
        let mut best: Option<BankEntry> = None;
        let mut tried = Vec::new();
        for seed in TRAIN_SEEDS {
            let train = TrainConfig {
                seed,
                max_updates: TRAIN_BUDGET,
                ..cfg.train.clone()
            };
            let (entry, out) = train_entry(cfg, target, &train, |_| {}).unwrap();
            eprintln!(
                "  target {target:?} seed {seed}: best {:.4}% at update {} of {} ({})",
                out.best_fidelity,
                out.best_update,
                out.updates,
                if out.converged { "converged" } else { "not converged" }
            );
            tried.push((seed, out.best_fidelity, out.updates, out.converged));
            let better = best
                .as_ref()
                .is_none_or(|b| entry.metadata.fidelity > b.metadata.fidelity);
            if better {
                best = Some(entry);
            }
            if out.converged {
                break;
            }
        }
        attempts.insert(format!("{:.1}", target[0]), tried);
        bank.insert(target, best.expect("at least one seed")).unwrap();
    }
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-bank");
    let _ = std::fs::remove_dir_all(&dir);
    if let Err(e) = std::fs::create_dir_all(&dir).map_err(|e| e.to_string()).and_then(|_| save_bank(&bank, &dir).map_err(|e| e.to_string())) {
        eprintln!("  could not save the trained bank: {e}");
    } else {
        eprintln!("  trained bank saved to {}", dir.display());
    }
    Trained { bank, attempts }
}

fn per_target_training(t: &Trained) -> Outcome {
    let mut converged = 0;
    let mut parts = Vec::new();
    for (alpha, tried) in &t.attempts {
        let ok = tried.iter().any(|a| a.3);
        converged += usize::from(ok);
        let best = tried.iter().map(|a| a.1).fold(f64::MIN, f64::max);
        let (seed, _, updates, _) = tried.last().unwrap();
        parts.push(if ok {
            format!("{alpha}: {best:.2}% (seed {seed}, {updates} updates)")
        } else {
            format!("{alpha}: best {best:.2}%, no seed converged")
        });
    }
    outcome(
        converged >= TRAIN_REQUIRED,
        format!("{converged}/5 targets reach {STEADY_STATE}%: {}", parts.join("; ")),
    )
}

fn sequence_experiment(cfg: &ExperimentConfig, bank: &ControllerBank) -> Outcome {
    let steps: Vec<_> = cfg
        .targets
        .iter()
        .map(|&t| (t, grid_search_step_voltages(&cfg.chip, t[0], cfg.grid_step, 500).unwrap()))
        .collect();
    let baseline = step_controller(&steps).unwrap();
    let stats = permutation_experiment(bank, &baseline, &cfg.chip, &cfg.targets, 500).unwrap();
    let c = |w| stats.aggregate(Arm::Controller, w).mean;
    let s = |w| stats.aggregate(Arm::Steps, w).mean;
    let pass = stats.sequences.len() == 120
        && c(Window::Full) > s(Window::Full)
        && c(Window::FirstHalf) > s(Window::FirstHalf)
        && c(Window::LastHalf) >= STEADY_STATE;
    let sane = c(Window::LastHalf) >= c(Window::FirstHalf);
    outcome(
        pass,
        format!(
            "controller vs steps over {} sequences: full {:.2} vs {:.2}, first 5 ms {:.2} vs {:.2}, last 5 ms {:.2} vs {:.2}{}",
            stats.sequences.len(),
            c(Window::Full),
            s(Window::Full),
            c(Window::FirstHalf),
            s(Window::FirstHalf),
            c(Window::LastHalf),
            s(Window::LastHalf),
            if sane { "" } else { " (last 5 ms below first 5 ms)" }
        ),
    )
}

fn chained_starts(cfg: &ExperimentConfig, bank: &ControllerBank) -> Outcome {
    let mut passed = 0;
    let mut worst = (f64::MAX, [0.0; 2], [0.0; 2]);
    let mut total = 0;
    for &first in &cfg.targets {
        for &second in &cfg.targets {
            if first == second {
                continue;
            }
            total += 1;
            let mut env = ChipEnv::new(cfg.chip.clone()).unwrap();
            let r1 = RewardSpec::for_target(first[0]).unwrap();
            let r2 = RewardSpec::for_target(second[0]).unwrap();
            let head = evaluate(bank.select(first).unwrap(), &mut env, &r1, 500).unwrap();
            let start = head.trajectory.final_observation;
            let tail = evaluate_from(bank.select(second).unwrap(), &mut env, start, &r2, 500).unwrap();
            let f = tail.fidelity_last_half;
            passed += usize::from(f >= STEADY_STATE);
            if f < worst.0 {
                worst = (f, first, second);
            }
        }
    }
    outcome(
        passed == total,
        format!(
            "{passed}/{total} ordered pairs reach {STEADY_STATE}% in the second episode; worst {:.2}% ({:.1} -> {:.1})",
            worst.0, worst.1[0], worst.2[0]
        ),
    )
}

fn files_under(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            train: TrainConfig {
                episode_steps: 100,
                max_updates: 3,
                ..Default::default()
            },
            output_dir: dir.path().to_path_buf(),
            master_seed: 7,
            grid_step: 0.5,
            ..Default::default()
        };
        run_pipeline(&cfg, |_| {}).unwrap();
        (files_under(dir.path()), dir)
    };
    let (a, _da) = run();
    let (b, _db) = run();
    let csv = a.keys().filter(|p| p.extension().is_some_and(|e| e == "csv")).count();
    let differing: Vec<_> = a
        .iter()
        .filter(|(k, v)| b.get(*k) != Some(*v))
        .map(|(k, _)| k.display().to_string())
        .collect();
    outcome(
        a.len() == b.len() && differing.is_empty() && csv > 0,
        format!(
            "two pipeline runs: {} files ({csv} CSV), {} differ{}",
            a.len(),
            differing.len(),
            if differing.is_empty() { String::new() } else { format!(": {}", differing.join(", ")) }
        ),
    )
}

fn reward_contract() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in STANDARD_TARGETS {
        let spec = RewardSpec::for_target(t[0]).unwrap();
        let rewards: Vec<f64> = (0..=1000).map(|k| spec.reward(k as f64 / 1000.0).unwrap()).collect();
        let hi = rewards.iter().copied().fold(f64::MIN, f64::max);
        let lo = rewards.iter().copied().fold(f64::MAX, f64::min);
        let inside = rewards.iter().all(|r| (-REWARD_BOUND..=REWARD_BOUND).contains(r));
        ok &= inside && (hi - REWARD_BOUND).abs() < REWARD_EDGE_TOL && (lo + REWARD_BOUND).abs() < REWARD_EDGE_TOL;
        parts.push(format!("{:.1}: [{lo}, {hi}]", t[0]));
    }
    outcome(ok, parts.join("; "))
}

fn main() {
    let mut results = Vec::new();
    criterion(1, "quantum kinematics", &mut results, quantum_kinematics);
    criterion(2, "distortion filter oracle", &mut results, filter_oracle);
    criterion(3, "gradient gate", &mut results, gradient_gate);
    criterion(4, "estimator sanity (bandit)", &mut results, bandit);

    let cfg = ExperimentConfig::default();
    let started = Instant::now();
    let trained = train_bank(&cfg);
    eprintln!("  training took {:.0}s", started.elapsed().as_secs_f64());
    criterion(5, "per-target training", &mut results, || per_target_training(&trained));
    criterion(6, "sequence experiment", &mut results, || sequence_experiment(&cfg, &trained.bank));
    criterion(7, "chained-start generalization", &mut results, || chained_starts(&cfg, &trained.bank));
    criterion(8, "determinism", &mut results, determinism);
    criterion(9, "reward contract", &mut results, reward_contract);

    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
