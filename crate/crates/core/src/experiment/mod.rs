//! Simulation campaigns: sessions against simulated users, aggregated
//! learning curves, σ calibration, and CSV output.

mod benchmark;
mod calibrate;
mod config;
mod output;
mod session;

pub use benchmark::{
    campaign_users, mean_sd, paired_differences, run_benchmark, run_benchmark_on, BenchmarkResult,
    MetricCurve, PairedSummary, RunRecord,
};
pub use calibrate::{calibrate_sigma, default_sigma_grid, simulate_pilot, CalibrationResult, PilotUser};
pub use config::{ArmSpec, ExperimentConfig, FeedbackKind, Metric, MetricValues, SEED_ENV};
pub use output::{emit_plot_data, read_curve_csv, write_raw_csv, CURVE_HEADER, RAW_HEADER};
pub use session::{
    run_session, validation_records, IterationRecord, SessionHistory, SessionOptions,
};
