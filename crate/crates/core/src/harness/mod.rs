//! Experiment orchestration: setups, configuration, running every approach
//! over a test split, and writing the result tables.

mod config;
mod experiment;
mod metrics;
mod results;
mod setup;

pub use config::{ExperimentConfig, KEYS as CONFIG_KEYS};
pub use experiment::{run_experiment, Approach, Experiment, RunOutput, TrainedApproach};
pub use metrics::{outage_cdf, outage_rate, thresholds, ApproachMetrics, Metrics};
pub use results::{
    cdf_csv, emit_results, fmt_f64, loss_csv, manifest, rates_csv, ratios_csv, read_rates, summary_csv, CDF_FILE,
    LOSS_FILE, MANIFEST_FILE, RATES_FILE, RATIOS_FILE, SUMMARY_FILE,
};
pub use setup::{dbm_to_watts, SetupId, SetupSpec, TX_POSITION, WALL_LOSS_DB};
