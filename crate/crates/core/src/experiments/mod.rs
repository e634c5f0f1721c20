//! Injection experiments: setup, event statistics and fits.

mod config;
mod run;
mod setup;
mod stats;

pub use config::{AuditInstance, DistillGrid, ExperimentConfig, Mode};
pub use run::{
    decode_trace, fig2_instance, parse_failures, run_config, Artifact, AuditBundle, CircuitKind, Comparison, DistillReport, EventRow, FitRow, PointResult,
    RunOptions, RunOutput, SamplingReport, IDLE,
};
pub use setup::{injection_setup, injection_targets, named_code, with_disjoint_z_logicals, InjectionSetup};
pub use stats::{
    binomial_sigma, fit_power_law, independence_report, independence_z, injection_frame, wilson_interval, EventMap, EventRecord,
    IndependenceReport, PairCounts, PairReport, PowerLawFit, Rate,
};
