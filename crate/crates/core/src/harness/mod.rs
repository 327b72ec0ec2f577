//! Configuration-driven experiments: paired baseline/regularized cohorts,
//! landscape grids, Fourier audits and summary statistics.

mod audit;
mod config;
mod experiment;
mod grid;
mod qaoa;
mod summary;

pub use audit::{audit_circuit, write_audit_csv, AuditOptions, CircuitAudit, AUDIT_MAX_TIME};
pub use config::{ExperimentConfig, GridConfig, ModelConfig};
pub use experiment::{
    cosine_model, run_experiment, run_grids, write_audit_summary, ExperimentOutcome, GammaFraction,
    Manifest, QcnnRow, DEFAULT_OUT,
};
pub use grid::{landscape_grid, GridAxis, LandscapeGrid};
pub use qaoa::{build_qaoa_toy, QAOA_MAX_QUBITS};
pub use summary::{
    read_runs_csv, summarize, write_runs_csv, CohortStats, GroupSummary, InstanceSummary, RunRow,
    SummaryStats, BASELINE, REGULARIZED, REPORT_PERCENTILES,
};
