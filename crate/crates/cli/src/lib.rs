//! Library surface of the experiment harness, used by the `invertor` binary
//! and by the integration suites.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{parse_config, ExperimentConfig, SimulatorKind};
pub use experiment::{
    build_lobe_simulator, build_oracle_simulator, make_dataset, read_summary_scores,
    run_experiment, ExperimentOutput, RunOutcome, RunSummary,
};
pub use report::{
    compare_methods, histogram, method_row, write_comparison_csv, write_histogram_csv,
    write_plot_script, ComparisonReport, HistogramBin, MethodRow,
};
