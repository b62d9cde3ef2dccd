//! Batch experiment runner: seeded independent runs, aggregation, and
//! machine-readable output (`runs.jsonl`, `timings.jsonl`, `summary.csv`).

mod config;
mod experiment;
mod summary;

pub use config::{parity_preset, Algorithm, ExperimentConfig, LiquidSettings, ProblemSpec, WORKERS_ENV};
pub use experiment::{
    execute_run, read_records, run_experiment, run_seed, summary_row, ExperimentOutcome, RUNS_FILE,
    SUMMARY_FILE, TIMINGS_FILE,
};
pub use summary::{summarize, ExperimentSummary, RunRecord, TimingRecord, SUMMARY_HEADER};
