//! Data ingestion, report serialization and plane rendering behind the
//! `fairaudit` command-line tool.

pub mod example;
pub mod records;
pub mod render;
pub mod report;

use fairness_core::FairnessError;

pub use example::{generate_running_example, RunningPoint};
pub use records::{
    read_records, read_scored, write_records, Delimiter, GroupMapping, InputConfig, OutcomeColumn,
};
pub use render::{render_plane, PlotCurve, PlotLine, PlotPoint, PlotSpec};
pub use report::{emit_report, OutputFormat};

#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("row {row}, column {column:?}: {reason} (value {value:?})")]
    MalformedRecord {
        row: usize,
        column: String,
        value: String,
        reason: String,
    },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error(transparent)]
    Fairness(#[from] FairnessError),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl From<std::io::Error> for AuditError {
    fn from(e: std::io::Error) -> Self {
        AuditError::Io(e.to_string())
    }
}
