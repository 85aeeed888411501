//! Turning crawler performance into game settings: speed rankings, per-rank
//! perks and weapon tiers, roster-file patching and UI action scripts.

mod automation;
mod config;
mod profile;
mod rank;
mod roster;

pub use automation::{emit_automation_script, write_automation_script, UiAction, DEFAULT_DELAY_MS};
pub use config::{assign_perks, build_game_config, GameConfig, PlayerAssignment};
pub use profile::{GameProfile, Polarity, RankEntry, UiActionKind, UiTarget};
pub use rank::{rank_crawlers, TierAssignment};
pub use roster::{patch_roster, FieldRef, PlayerSlot, RatingField, RosterLayout, TeamSlot};

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameMapError {
    #[error("ranking needs results for at least two crawlers, got {0}")]
    NotEnoughResults(usize),
    #[error("results mix rounds {0} and {1}")]
    MixedRounds(u32, u32),
    #[error("crawler name {0:?} appears twice")]
    DuplicateName(String),
    #[error("{game} has no settings for rank(s) {missing:?}")]
    RankGap { game: String, missing: Vec<u32> },
    #[error("invalid game profile: {0}")]
    InvalidProfile(String),
    #[error("invalid game config: {0}")]
    InvalidConfig(String),
    #[error("invalid roster layout: {0}")]
    InvalidLayout(String),
    #[error("ui_layout has no entry for option {0:?}")]
    MissingUiOption(String),
    #[error("profile {0:?} has no ui_layout")]
    NoUiLayout(String),
    #[error("roster line {line} field {field} does not exist")]
    RosterOutOfBounds { line: usize, field: usize },
    #[error("rating {name}={value} is outside {min}..={max}")]
    RatingOutOfRange {
        name: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("name {0:?} cannot be written into the roster")]
    BadName(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl GameMapError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        GameMapError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
