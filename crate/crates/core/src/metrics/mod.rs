//! Performance results and capture summaries computed from parsed WARC
//! records and a crawler's progress log.

mod classify;
mod extract;
mod results;
mod summary;

pub use classify::{classify_resource, ResourceCategory};
pub use extract::extract_references;
pub use results::{
    analyze_records, compute_performance_results, compute_performance_results_between,
    round_bounds, ArchiveAnalysis, PerformanceResults,
};
pub use summary::{summarize_cdx, CdxSummary, StatusClass};

use std::path::Path;

use thiserror::Error;

use crate::race::ClockSkew;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("crawl log has no {0} event; round boundaries must be explicit timestamps")]
    MissingBoundary(&'static str),
    #[error("round numbers start at 1")]
    InvalidRound,
    #[error(transparent)]
    ClockSkew(#[from] ClockSkew),
    #[error("{path}: {reason}")]
    BadResults { path: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl MetricsError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        MetricsError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
