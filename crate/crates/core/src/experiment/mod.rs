//! Reproducible Monte Carlo experiments: estimator sweeps over a grid of
//! sample sizes and diagnostic grids for the tail-measure limits, with
//! machine-readable CSV/JSON output.

mod config;
mod emit;
mod run;

pub use config::{
    ArmaConfig, DiagnosticFlags, ExperimentConfig, InnovationConfig, KRule, ResolvedExperiment,
};
pub use emit::{
    emit_results, write_result, write_run_manifest, OutputFormat,
};
pub use run::{
    derive_seed, run_consistency, run_lemma_diagnostics, splitmix64, DiagnosticRow, EstimateRow,
    ExperimentResult, SEED_STREAM_CONSISTENCY, SEED_STREAM_DIAGNOSTICS,
};
