// Copyright 2026 The qcontrol Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment drivers: configuration, the step-voltage baseline, the
//! permutation sequence experiment and report files.

mod config;
mod experiment;
mod grid;
mod pipeline;
mod report;

pub use config::{ExperimentConfig, TargetOverride, STANDARD_TARGETS};
pub use experiment::{
    permutation_experiment, permutations, windowed_fidelity, Aggregate, Arm, SequenceResult,
    SequenceStats, WindowFidelities,
};
pub use grid::{evaluate_step, grid_search_step_voltages, grid_values, StepEval};
pub use pipeline::{
    parse_step_voltages_csv, run_pipeline, step_controller, step_voltages_csv, train_entry,
    training_rows, PipelineOutput, STEP_VOLTAGES_HEADER,
};
pub use report::{
    emit_report, extreme_sequences, extreme_traces, histogram, histogram_csv, parse_sequences_csv,
    sequences_csv, summary_text, Histogram, ReportTables, TrainingRow, HISTOGRAM_BINS,
    SEQUENCES_HEADER,
};
