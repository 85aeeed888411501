//! Timed crawler races over a shared seed list, round winners and
//! multi-round leaderboards.

mod adapter;
mod events;
mod leaderboard;
mod round;
mod seeds;
mod timing;

pub use adapter::{CrawlerAdapter, DEFAULT_TIMEOUT_SECONDS};
pub use events::{
    iso_millis, parse_events, read_events_file, validate_events, write_events, EventKind,
    ProgressEvent,
};
pub use leaderboard::{build_leaderboard, Leaderboard, LeaderboardCell, LeaderboardRow};
pub use round::{
    determine_winner, load_warc_records, round_dir, run_round, CrawlerOutcome, CrawlerRound,
    RoundResult,
};
pub use seeds::{load_seed_list, parse_seed_list, write_seed_list};
pub use timing::{compute_speedrun_time, format_hms, halfway_split, parse_hms, ClockSkew};

use std::path::Path;

use thiserror::Error;

use crate::metrics::MetricsError;

#[derive(Debug, Error)]
pub enum RaceError {
    #[error("a race needs at least two crawlers, got {0}")]
    NotEnoughAdapters(usize),
    #[error("seed list is empty")]
    NoSeeds,
    #[error("round numbers start at 1")]
    InvalidRound,
    #[error("crawler name {0:?} used twice in one round")]
    DuplicateName(String),
    #[error("adapter {name}: {reason}")]
    BadAdapter { name: String, reason: String },
    #[error("seed list line {line}: {reason}")]
    BadSeed { line: usize, reason: String },
    #[error("events line {line}: {reason}")]
    BadEvent { line: usize, reason: String },
    #[error("{path}: {reason}")]
    BadRoundFile { path: String, reason: String },
    #[error("could not launch {name}: {source}")]
    Spawn {
        name: String,
        #[source]
        source: std::io::Error,
    },
    #[error("round {round}: no crawler finished")]
    AllCrawlersFailed { round: u32 },
    #[error(transparent)]
    ClockSkew(#[from] ClockSkew),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(#[from] std::io::Error),
}

impl RaceError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        RaceError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
