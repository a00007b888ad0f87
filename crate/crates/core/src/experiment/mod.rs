//! Config-driven runs that write plot-ready data, plus the invariant check.

mod config;
mod run;
mod verify;

pub use config::{
    preset, preset_names, preset_toml, AnalysisSpec, EnsembleKind, InitialSpec, ItqdeSpec,
    LambdaSpec, MethodSpec, ModelSpec, ObservableSpec, RunConfig,
};
pub use run::{
    analyze, analyze_config, compute_trajectory, match_plateaus, prepare, run, sample, shot_plan, sweep_files,
    AnalysisReport, PlateauMatch, Prepared, RunSummary, SpectrumSummary, TrajectoryOutput,
};
pub use verify::{verify, SuiteResult, VerifyOptions, VerifyReport};
