use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GameConfig, GameMapError, GameProfile, UiActionKind};

/// Pause after an action when the layout does not give one.
pub const DEFAULT_DELAY_MS: u64 = 250;

/// One step for an input-automation tool to perform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiAction {
    #[serde(rename = "type")]
    pub kind: UiActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_code: Option<String>,
    pub delay_ms: u64,
}

/// Actions that select every crawler's settings in the game.
///
/// Crawlers are handled in rank order; for each, the weapon tier is selected
/// first, then each perk. An option is looked up as `p<rank>.<option>` and
/// then as plain `<option>`.
pub fn emit_automation_script(
    config: &GameConfig,
    profile: &GameProfile,
) -> Result<Vec<UiAction>, GameMapError> {
    let layout = profile
        .ui_layout
        .as_ref()
        .ok_or_else(|| GameMapError::NoUiLayout(profile.game_name.clone()))?;
    let mut ordered: Vec<_> = config.assignments.iter().collect();
    ordered.sort_by_key(|a| a.rank);

    let mut actions = Vec::new();
    for a in ordered {
        let options = std::iter::once(&a.weapon_tier)
            .filter(|w| !w.is_empty())
            .chain(a.perks.iter());
        for option in options {
            let target = layout
                .get(&format!("p{}.{option}", a.rank))
                .or_else(|| layout.get(option))
                .ok_or_else(|| GameMapError::MissingUiOption(option.clone()))?;
            let delay_ms = target.delay_ms.unwrap_or(DEFAULT_DELAY_MS);
            actions.push(match target.action {
                UiActionKind::Click => UiAction {
                    kind: UiActionKind::Click,
                    x: Some(target.x),
                    y: Some(target.y),
                    key_code: None,
                    delay_ms,
                },
                UiActionKind::Key => UiAction {
                    kind: UiActionKind::Key,
                    x: None,
                    y: None,
                    key_code: Some(target.key_code.clone().ok_or_else(|| {
                        GameMapError::InvalidProfile(format!(
                            "key action {option:?} has no key_code"
                        ))
                    })?),
                    delay_ms,
                },
            });
        }
    }
    Ok(actions)
}

/// Write actions as JSON lines.
pub fn write_automation_script(path: &Path, actions: &[UiAction]) -> Result<(), GameMapError> {
    let mut text = String::new();
    for a in actions {
        text.push_str(&serde_json::to_string(a).expect("action serializes"));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| GameMapError::io(path, e))
}
