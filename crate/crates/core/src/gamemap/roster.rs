use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GameConfig, GameMapError};

/// A field in a delimited text file. Both indexes count from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRef {
    pub line: usize,
    pub field: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerSlot {
    pub line: usize,
    pub name_field: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamSlot {
    pub team_name: FieldRef,
    pub players: Vec<PlayerSlot>,
}

/// Where a rating lives on each player line, and its allowed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingField {
    pub field: usize,
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub decimals: usize,
}

/// Positions of the editable values in a roster file. Teams are filled in
/// rank order: the first team belongs to the rank-1 crawler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterLayout {
    pub delimiter: String,
    pub teams: Vec<TeamSlot>,
    #[serde(default)]
    pub rating_fields: BTreeMap<String, RatingField>,
}

impl RosterLayout {
    pub fn from_json(text: &str) -> Result<Self, GameMapError> {
        let layout: RosterLayout =
            serde_json::from_str(text).map_err(|e| GameMapError::InvalidLayout(e.to_string()))?;
        if layout.delimiter.is_empty() || layout.delimiter.contains(['\n', '\r']) {
            return Err(GameMapError::InvalidLayout(
                "delimiter must be non-empty and on one line".into(),
            ));
        }
        for (name, r) in &layout.rating_fields {
            if r.min.is_nan() || r.max.is_nan() || r.min > r.max {
                return Err(GameMapError::InvalidLayout(format!(
                    "rating {name}: min {} exceeds max {}",
                    r.min, r.max
                )));
            }
        }
        Ok(layout)
    }

    pub fn load(path: &Path) -> Result<Self, GameMapError> {
        let text = std::fs::read_to_string(path).map_err(|e| GameMapError::io(path, e))?;
        Self::from_json(&text)
    }
}

struct Line<'a> {
    fields: Vec<String>,
    ending: &'a str,
}

fn split_lines<'a>(text: &'a str, delimiter: &str) -> Vec<Line<'a>> {
    text.split_inclusive('\n')
        .map(|raw| {
            let body_len = if raw.ends_with("\r\n") {
                raw.len() - 2
            } else if raw.ends_with('\n') {
                raw.len() - 1
            } else {
                raw.len()
            };
            Line {
                fields: raw[..body_len]
                    .split(delimiter)
                    .map(str::to_owned)
                    .collect(),
                ending: &raw[body_len..],
            }
        })
        .collect()
}

fn set_field(
    lines: &mut [Line<'_>],
    line: usize,
    field: usize,
    value: String,
) -> Result<(), GameMapError> {
    let slot = lines
        .get_mut(line)
        .and_then(|l| l.fields.get_mut(field))
        .ok_or(GameMapError::RosterOutOfBounds { line, field })?;
    *slot = value;
    Ok(())
}

fn check_name(name: &str, delimiter: &str) -> Result<(), GameMapError> {
    if name.contains(delimiter) || name.contains(['\n', '\r']) {
        return Err(GameMapError::BadName(name.to_owned()));
    }
    Ok(())
}

/// Write crawler names, contributor names and ratings into a roster.
///
/// Each team's name becomes its crawler's name, player names cycle through
/// the crawler's player names, and every player line gets the crawler's
/// ratings for the fields the layout declares. Every byte the layout does
/// not address, line endings included, is kept as is.
pub fn patch_roster(
    roster_text: &str,
    layout: &RosterLayout,
    config: &GameConfig,
) -> Result<String, GameMapError> {
    if config.assignments.is_empty() {
        return Ok(roster_text.to_owned());
    }
    if config.assignments.len() > layout.teams.len() {
        return Err(GameMapError::InvalidLayout(format!(
            "{} crawlers but only {} team slots",
            config.assignments.len(),
            layout.teams.len()
        )));
    }
    let delim = layout.delimiter.as_str();
    let mut lines = split_lines(roster_text, delim);

    let mut ordered: Vec<_> = config.assignments.iter().collect();
    ordered.sort_by_key(|a| a.rank);
    for (team, assignment) in layout.teams.iter().zip(ordered) {
        check_name(&assignment.team_name, delim)?;
        set_field(
            &mut lines,
            team.team_name.line,
            team.team_name.field,
            assignment.team_name.clone(),
        )?;

        let mut ratings = Vec::new();
        for (name, field) in &layout.rating_fields {
            if let Some(&value) = assignment.ratings.get(name) {
                if !(field.min..=field.max).contains(&value) {
                    return Err(GameMapError::RatingOutOfRange {
                        name: name.clone(),
                        value,
                        min: field.min,
                        max: field.max,
                    });
                }
                ratings.push((field.field, format!("{value:.*}", field.decimals)));
            }
        }

        let names = &assignment.player_names;
        for (i, player) in team.players.iter().enumerate() {
            if !names.is_empty() {
                let name = &names[i % names.len()];
                check_name(name, delim)?;
                set_field(&mut lines, player.line, player.name_field, name.clone())?;
            }
            for (field, text) in &ratings {
                set_field(&mut lines, player.line, *field, text.clone())?;
            }
        }
    }

    let mut out = String::with_capacity(roster_text.len());
    for line in &lines {
        out.push_str(&line.fields.join(delim));
        out.push_str(line.ending);
    }
    Ok(out)
}
