//! Case configuration, presets, runners and output files.

mod config;
mod output;
mod presets;
mod runner;
mod series;
mod units;

use thiserror::Error;

use crate::integrators::IntegrationError;
use crate::metrics::MetricsError;
use crate::model::ModelError;

pub use config::{
    parse_case_config, read_case_config, BoundarySpec, CaseConfig, CaseKind, DurationSpec,
    ForcingSpec, InitialSpec, LayerSpec, MaterialSpec, PhysicalConfig, SchemeConfig, SideSpec,
    SweepConfig,
};
pub use output::{emit_outputs, CaseOutputs, Manifest};
pub use presets::{
    case_from_config, default_climate, physical_case, physical_scaling, synthetic_climate,
    verification_case, verification_self_check, write_synthetic_climate, Case, PhysicalLayout,
    SchemeDefaults, PHYSICAL_DT_EULER, PHYSICAL_DX, VERIFICATION_DT_DF, VERIFICATION_DT_EULER,
    VERIFICATION_DT_EXP, VERIFICATION_DX,
};
pub use runner::{
    log_log_slope, run_comparison, run_ns_sweep, run_physical_case, run_verification_case,
    ComparisonOutcome, DryingCurve, ErrorBasis, PhysicalOptions, PhysicalOutcome,
    ReferenceSolution, SchemeRequest, SchemeSlopes, SweepOutcome, SweepRow, SWEEP_HEADER,
};
pub use series::{ingest_boundary_series, parse_boundary_series, BoundarySeries};
pub use units::parse_duration;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{source_name}:{line}: {message}")]
    Ingest { source_name: String, line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("CSV output error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON output error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CaseError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CaseError::Io { path: path.as_ref().display().to_string(), source }
    }

    /// True for errors caused by the user's input rather than by a run.
    pub fn is_config_error(&self) -> bool {
        matches!(self, CaseError::Config(_) | CaseError::Ingest { .. } | CaseError::Io { .. })
    }
}
