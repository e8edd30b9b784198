//! Simulation harness: ground truth, pair sampling, noise, sweeps and CSV output.

pub mod config;
pub mod data;
pub mod experiment;

pub use config::{ExperimentConfig, GainProfile, GroundTruthSpec, Model, PairMode};
pub use data::{
    inject_grade_noise, inject_pair_noise, make_grade_free_truth, make_ground_truth, sample_pairs, ListPair, Oracle,
    SampledPairs,
};
pub use experiment::{
    median, read_csv, run_experiment, run_experiment_detailed, run_task, summarize, write_csv, ResultRow, SummaryRow,
    Task, TaskOutcome, CSV_HEADER,
};
