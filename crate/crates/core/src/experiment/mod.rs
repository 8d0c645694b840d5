//! The four-tank benchmark: configuration, truth simulation, filter runs,
//! and accuracy/timing summaries.

mod config;
mod metrics;
mod run;
mod summary;

pub use config::{BenchConfig, EnkfConfig, EstimationConfig, MeasurementConfig, PfConfig, SimulationConfig, Tuning, UkfConfig};
pub use metrics::mape;
pub use run::{
    build_filter, estimate, initial_belief, initial_state, measurement_noise, model, nominal_disturbance_profile,
    pump_profile, run_benchmark, run_filter, simulate_truth, truth_disturbance_profile, FilterRun, RunRecord,
    ENKF_STREAM, PF_STREAM, TRUTH_STREAM,
};
pub use summary::{seed_statistics, seed_statistics_text, SeedStats, Summary, SummaryRow};
