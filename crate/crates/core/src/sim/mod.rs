//! A deterministic stand-in for real crawlers: a static fixture server with
//! injectable faults and latency, and a paced sequential crawler that
//! writes WARC files and progress events.

mod crawl;
mod faults;
mod server;

pub use crawl::{run_sim_crawl, SimCrawlOutcome, SpeedProfile};
pub use faults::{load_fault_rules, FaultBehavior, FaultRule};
pub use server::{serve_fixture, ServerHandle};

use std::path::Path;

use thiserror::Error;

use crate::warc::WarcError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("cannot listen on port {port}: {source}")]
    Bind {
        port: u16,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} is not a directory")]
    NotADirectory(String),
    #[error("invalid fault rule: {0}")]
    BadFault(String),
    #[error("invalid seed {uri:?}: {reason}")]
    BadSeed { uri: String, reason: String },
    #[error("server for {uri} is unreachable: {source}")]
    Unreachable {
        uri: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Warc(#[from] WarcError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
