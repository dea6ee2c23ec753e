//! Experiment configuration, seeded execution and CSV reports.

mod config;
mod diagnostic;
mod instances;
mod report;
mod run;

pub use config::{preset, ExperimentConfig, Variant, PRESETS};
pub use diagnostic::{diagnostic_concentration, ConcentrationReport};
pub use instances::{
    path_means, InstanceSpec, MatchingSpec, MsetsSpec, PathOutcomes, SeparatedSpec,
    ShortestPathSpec,
};
pub use report::{csv_string, emit_csv, emit_timing_csv, format_sig10, write_csv};
pub use run::{aggregate, run_experiment, simulate, timing_report, AggregatedResult, PolicyCurve};
