use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{rank_crawlers, GameMapError, GameProfile, RankEntry, TierAssignment};
use crate::metrics::PerformanceResults;
use crate::warc::payload_digest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerAssignment {
    pub crawler_name: String,
    pub rank: u32,
    pub perks: Vec<String>,
    pub weapon_tier: String,
    pub ratings: BTreeMap<String, f64>,
    pub team_name: String,
    pub player_names: Vec<String>,
}

/// In-game selections for every crawler, best rank first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub game_name: String,
    pub assignments: Vec<PlayerAssignment>,
    /// Digests of the results each assignment was derived from.
    #[serde(default)]
    pub source_results: Vec<String>,
}

impl GameConfig {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), GameMapError> {
        std::fs::write(path, self.to_json()).map_err(|e| GameMapError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, GameMapError> {
        let text = std::fs::read_to_string(path).map_err(|e| GameMapError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| GameMapError::InvalidConfig(e.to_string()))
    }
}

/// Pick the rank-table entry for each crawler.
///
/// Rank 1 gets the profile's best entry and, with more than one crawler, the
/// last rank gets its worst. Ranks in between need entries of their own,
/// numbered below the worst entry.
/// Team name is the crawler name; player names are the crawler's
/// contributors, or the crawler name when none are known.
pub fn assign_perks(
    ranking: &[TierAssignment],
    profile: &GameProfile,
    contributors: &BTreeMap<String, Vec<String>>,
) -> Result<GameConfig, GameMapError> {
    profile.validate()?;
    let n = ranking.len() as u32;
    let worst = profile.worst_rank().unwrap_or(0);

    let lookup = |rank: u32| -> Option<&RankEntry> {
        if rank == 1 {
            profile.rank_table.get(&1)
        } else if rank == n {
            (worst > 1).then(|| &profile.rank_table[&worst])
        } else {
            profile.rank_table.get(&rank).filter(|_| rank < worst)
        }
    };
    let missing: Vec<u32> = ranking
        .iter()
        .map(|t| t.rank)
        .filter(|r| lookup(*r).is_none())
        .collect();
    if !missing.is_empty() {
        return Err(GameMapError::RankGap {
            game: profile.game_name.clone(),
            missing,
        });
    }

    let mut ordered: Vec<&TierAssignment> = ranking.iter().collect();
    ordered.sort_by_key(|t| t.rank);
    let assignments = ordered
        .into_iter()
        .map(|t| {
            let entry = lookup(t.rank).expect("checked above");
            let players = contributors
                .get(&t.crawler_name)
                .filter(|c| !c.is_empty())
                .cloned()
                .unwrap_or_else(|| vec![t.crawler_name.clone()]);
            PlayerAssignment {
                crawler_name: t.crawler_name.clone(),
                rank: t.rank,
                perks: entry.perks.clone(),
                weapon_tier: entry.weapon_tier.clone(),
                ratings: entry.ratings.clone(),
                team_name: t.crawler_name.clone(),
                player_names: players,
            }
        })
        .collect();

    Ok(GameConfig {
        game_name: profile.game_name.clone(),
        assignments,
        source_results: Vec::new(),
    })
}

/// Rank `results` and assign settings, recording which results were used.
pub fn build_game_config(
    results: &[PerformanceResults],
    profile: &GameProfile,
    contributors: &BTreeMap<String, Vec<String>>,
    expected_pages: Option<u64>,
) -> Result<GameConfig, GameMapError> {
    let ranking = rank_crawlers(results, expected_pages)?;
    let mut config = assign_perks(&ranking, profile, contributors)?;
    let mut sorted: Vec<&PerformanceResults> = results.iter().collect();
    sorted.sort_by(|a, b| a.crawler_name.cmp(&b.crawler_name));
    config.source_results = sorted
        .into_iter()
        .map(|r| payload_digest(r.to_json().as_bytes()))
        .collect();
    Ok(config)
}
