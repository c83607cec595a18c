// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::{Aggregate, Arm, SequenceResult, SequenceStats, WindowFidelities};
use super::grid::StepEval;
use crate::bank::{run_sequence, save_trace, Controller, SequenceSpec, SequenceTrace};
use crate::device::{ChipConfig, ChipEnv};
use crate::error::{Error, Result};
use crate::trainer::Window;

pub const HISTOGRAM_BINS: usize = 30;
pub const SEQUENCES_HEADER: &str =
    "sequence,order,controller_full,controller_first5ms,controller_last5ms,steps_full,steps_first5ms,steps_last5ms";

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow {
    pub target: [f64; 2],
    pub fidelity: f64,
    pub converged: bool,
    pub updates: u64,
}

/// Everything besides the sequence statistics that the summary reports.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportTables {
    pub training: Vec<TrainingRow>,
    pub steps: Vec<([f64; 2], StepEval)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges; the last bin includes its upper edge.
    pub edges: Vec<f64>,
    pub controller: Vec<usize>,
    pub steps: Vec<usize>,
}

/// Uniform bins over the pooled range of both arms' values.
pub fn histogram(controller: &[f64], steps: &[f64], bins: usize) -> Histogram {
    let pooled = controller.iter().chain(steps);
    let lo = pooled.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = pooled.copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + k as f64 * width })
        .collect();
    let count = |values: &[f64]| {
        let mut c = vec![0; bins];
        for &v in values {
            let k = if width > 0.0 { ((v - lo) / width) as usize } else { 0 };
            c[k.min(bins - 1)] += 1;
        }
        c
    };
    Histogram {
        edges,
        controller: count(controller),
        steps: count(steps),
    }
}

/// Indices of the lowest, median and highest controller full-window
/// sequences. Ties go to the earlier permutation; the median is the upper one.
pub fn extreme_sequences(stats: &SequenceStats) -> [(&'static str, usize); 3] {
    let mut idx: Vec<usize> = (0..stats.sequences.len()).collect();
    idx.sort_by(|&a, &b| {
        stats.sequences[a]
            .controller
            .full
            .total_cmp(&stats.sequences[b].controller.full)
            .then(a.cmp(&b))
    });
    [
        ("min", idx[0]),
        ("median", idx[idx.len() / 2]),
        ("max", idx[idx.len() - 1]),
    ]
}

/// Re-runs the extreme sequences with both arms and returns labelled traces.
pub fn extreme_traces<C, S>(
    controller: &C,
    steps: &S,
    chip: &ChipConfig,
    stats: &SequenceStats,
    episode_steps: usize,
) -> Result<Vec<(String, SequenceTrace)>>
where
    C: Controller + ?Sized,
    S: Controller + ?Sized,
{
    if stats.sequences.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (label, i) in extreme_sequences(stats) {
        let spec = SequenceSpec {
            episode_steps,
            ..SequenceSpec::new(stats.sequences[i].order.iter().map(|&k| stats.targets[k]).collect())
        };
        let mut env = ChipEnv::new(chip.clone())?;
        out.push((format!("{label}_controller"), run_sequence(controller, &mut env, &spec)?));
        out.push((format!("{label}_steps"), run_sequence(steps, &mut env, &spec)?));
    }
    Ok(out)
}

fn order_label(stats: &SequenceStats, order: &[usize]) -> String {
    order
        .iter()
        .map(|&i| format!("{}", stats.targets[i][0]))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn sequences_csv(stats: &SequenceStats) -> String {
    let mut s = format!("{SEQUENCES_HEADER}\n");
    for (i, r) in stats.sequences.iter().enumerate() {
        let (c, t) = (r.controller, r.steps);
        writeln!(
            s,
            "{i},{},{},{},{},{},{},{}",
            order_label(stats, &r.order),
            c.full,
            c.first_half,
            c.last_half,
            t.full,
            t.first_half,
            t.last_half
        )
        .expect("write to string");
    }
    s
}

/// Parses the output of [`sequences_csv`] back, given the experiment's
/// target list.
pub fn parse_sequences_csv(text: &str, targets: &[[f64; 2]]) -> Result<SequenceStats> {
    let bad = |line: usize, why: String| Error::Config(format!("sequences.csv line {line}: {why}"));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SEQUENCES_HEADER => {}
        _ => return Err(bad(1, "unexpected header".into())),
    }
    let mut sequences = Vec::new();
    for (n, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad(n + 1, format!("expected 8 fields, got {}", f.len())));
        }
        let order = f[1]
            .split(';')
            .map(|a| {
                let a: f64 = a.parse().map_err(|e| bad(n + 1, format!("{e}")))?;
                targets
                    .iter()
                    .position(|t| t[0] == a)
                    .ok_or_else(|| bad(n + 1, format!("target {a} not in the experiment")))
            })
            .collect::<Result<Vec<_>>>()?;
        let v = f[2..]
            .iter()
            .map(|x| x.parse::<f64>().map_err(|e| bad(n + 1, format!("{e}"))))
            .collect::<Result<Vec<_>>>()?;
        let w = |k: usize| WindowFidelities {
            full: v[k],
            first_half: v[k + 1],
            last_half: v[k + 2],
        };
        sequences.push(SequenceResult {
            order,
            controller: w(0),
            steps: w(3),
        });
    }
    Ok(SequenceStats {
        targets: targets.to_vec(),
        sequences,
    })
}

pub fn histogram_csv(h: &Histogram) -> String {
    let mut s = String::from("bin,lower,upper,controller,steps\n");
    for k in 0..h.controller.len() {
        writeln!(s, "{k},{},{},{},{}", h.edges[k], h.edges[k + 1], h.controller[k], h.steps[k])
            .expect("write to string");
    }
    s
}

pub fn summary_text(stats: &SequenceStats, tables: &ReportTables) -> String {
    let mut s = String::new();
    let w = &mut s;
    let fmt_target = |t: [f64; 2]| format!("[{:.2}, {:.2}]", t[0], t[1]);
    writeln!(w, "Per-target training (last 5 ms evaluation fidelity, %)").unwrap();
    writeln!(w, "{:<14}{:>12}{:>11}{:>10}", "target", "fidelity", "converged", "updates").unwrap();
    for r in &tables.training {
        let conv = if r.converged { "yes" } else { "no" };
        writeln!(w, "{:<14}{:>12.4}{:>11}{:>10}", fmt_target(r.target), r.fidelity, conv, r.updates).unwrap();
    }
    writeln!(w).unwrap();
    writeln!(w, "Step voltages (grid search on last 5 ms fidelity)").unwrap();
    writeln!(w, "{:<14}{:>9}{:>9}{:>16}", "target", "v1 (V)", "v2 (V)", "last 5 ms (%)").unwrap();
    for (t, e) in &tables.steps {
        let [v1, v2] = e.voltages.get();
        writeln!(w, "{:<14}{:>9.2}{:>9.2}{:>16.4}", fmt_target(*t), v1, v2, e.fidelity_last_half).unwrap();
    }
    writeln!(w).unwrap();
    writeln!(
        w,
        "Sequence experiment ({} sequences, mean ± std of per-sequence fidelity, %)",
        stats.sequences.len()
    )
    .unwrap();
    writeln!(w, "{:<12}{:>22}{:>22}", "window", "controller", "steps").unwrap();
    for (name, window) in [
        ("full", Window::Full),
        ("first 5 ms", Window::FirstHalf),
        ("last 5 ms", Window::LastHalf),
    ] {
        let cell = |a: Aggregate| format!("{:.4} ± {:.4}", a.mean, a.std);
        writeln!(
            w,
            "{:<12}{:>22}{:>22}",
            name,
            cell(stats.aggregate(Arm::Controller, window)),
            cell(stats.aggregate(Arm::Steps, window))
        )
        .unwrap();
    }
    s
}

/// Writes `sequences.csv`, `histogram.csv`, `summary.txt` and one
/// `trace_<label>.csv` per trace into `outdir`.
pub fn emit_report(
    stats: &SequenceStats,
    tables: &ReportTables,
    traces: &[(String, SequenceTrace)],
    outdir: &Path,
) -> Result<()> {
    fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;
    let write = |name: &str, text: String| {
        let p = outdir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write("sequences.csv", sequences_csv(stats))?;
    if !stats.sequences.is_empty() {
        let h = histogram(
            &stats.values(Arm::Controller, Window::Full),
            &stats.values(Arm::Steps, Window::Full),
            HISTOGRAM_BINS,
        );
        write("histogram.csv", histogram_csv(&h))?;
    }
    write("summary.txt", summary_text(stats, tables))?;
    for (label, trace) in traces {
        save_trace(trace, &outdir.join(format!("trace_{label}.csv")))?;
    }
    Ok(())
}
