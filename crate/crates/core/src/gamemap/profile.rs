use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GameMapError;

/// What one rank gets in the game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    #[serde(default)]
    pub perks: Vec<String>,
    #[serde(default)]
    pub weapon_tier: String,
    #[serde(default)]
    pub ratings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    LowerIsBetter,
    HigherIsBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UiActionKind {
    Click,
    Key,
}

/// How to select one option on screen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiTarget {
    pub action: UiActionKind,
    #[serde(default)]
    pub x: i32,
    #[serde(default)]
    pub y: i32,
    #[serde(default)]
    pub key_code: Option<String>,
    #[serde(default)]
    pub delay_ms: Option<u64>,
}

/// Mapping from performance rank to in-game settings for one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameProfile {
    pub game_name: String,
    pub rank_table: BTreeMap<u32, RankEntry>,
    /// Direction of each rating. Unlisted ratings are higher-is-better,
    /// except `speed`, which is a 40-yard-dash time and so lower-is-better.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rating_polarity: BTreeMap<String, Polarity>,
    /// Keys are option identifiers (a perk, a weapon tier), optionally
    /// scoped to a player slot as `p<rank>.<option>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ui_layout: Option<BTreeMap<String, UiTarget>>,
}

const GUN_MAYHEM_2: &str = include_str!("../../profiles/gun_mayhem_2.json");
const NFL_CHALLENGE: &str = include_str!("../../profiles/nfl_challenge.json");

impl GameProfile {
    /// Two-player Gun Mayhem 2 More Mayhem profile: the faster crawler gets
    /// the fastest gun and infinite ammo, the slower one the slowest gun and
    /// no perk. UI coordinates are illustrative.
    pub fn gun_mayhem_2() -> Self {
        GameProfile::from_json(GUN_MAYHEM_2).expect("bundled profile is valid")
    }

    /// Two-team NFL Challenge profile driven by key presses. Rating values
    /// are illustrative placeholders.
    pub fn nfl_challenge() -> Self {
        GameProfile::from_json(NFL_CHALLENGE).expect("bundled profile is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, GameMapError> {
        let profile: GameProfile =
            serde_json::from_str(text).map_err(|e| GameMapError::InvalidProfile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self, GameMapError> {
        let text = std::fs::read_to_string(path).map_err(|e| GameMapError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn polarity(&self, rating: &str) -> Polarity {
        match self.rating_polarity.get(rating) {
            Some(p) => *p,
            None if rating == "speed" => Polarity::LowerIsBetter,
            None => Polarity::HigherIsBetter,
        }
    }

    /// True when `a` is strictly worse than `b` for `rating`.
    pub fn is_worse(&self, rating: &str, a: f64, b: f64) -> bool {
        match self.polarity(rating) {
            Polarity::LowerIsBetter => a > b,
            Polarity::HigherIsBetter => a < b,
        }
    }

    pub fn worst_rank(&self) -> Option<u32> {
        self.rank_table.keys().next_back().copied()
    }

    /// Ranks start at 1, and no rating of a better rank is worse than the
    /// same rating of a lower rank.
    pub fn validate(&self) -> Result<(), GameMapError> {
        if self.rank_table.is_empty() {
            return Err(GameMapError::InvalidProfile("rank_table is empty".into()));
        }
        if self.rank_table.contains_key(&0) {
            return Err(GameMapError::InvalidProfile("ranks start at 1".into()));
        }
        let entries: Vec<(&u32, &RankEntry)> = self.rank_table.iter().collect();
        for (i, (better_rank, better)) in entries.iter().enumerate() {
            for (worse_rank, worse) in &entries[i + 1..] {
                for (name, value) in &better.ratings {
                    if let Some(other) = worse.ratings.get(name) {
                        if self.is_worse(name, *value, *other) {
                            return Err(GameMapError::InvalidProfile(format!(
                                "rank {better_rank} {name}={value} is worse than rank {worse_rank} {name}={other}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
