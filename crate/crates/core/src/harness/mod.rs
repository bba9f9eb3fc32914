//! Experiment configuration, metric files, baselines and sweeps.

mod config;
mod metrics;
mod run;

pub use config::{load_config, ExperimentConfig, Method, KEYS};
pub use metrics::{
    avg_reward, format_sig9, read_metrics_csv, round_sig9, rows_from_series, write_metrics,
    write_metrics_csv, MetricsRow, CSV_HEADER,
};
pub use run::{
    final_window_mean, make_environment, mean_stdev, random_policy, random_raw_action,
    random_search_best, run_experiment, run_sweep, CellSummary, GridAxis, RunOutcome,
    SweepReport,
};
