use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RaceError;

pub const DEFAULT_TIMEOUT_SECONDS: f64 = 30.0 * 60.0;

const PLACEHOLDERS: [&str; 3] = ["{seeds_file}", "{output_dir}", "{events_file}"];

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECONDS
}

/// How to launch one crawler for a round.
///
/// `command_template` is run through `sh -c` after the `{seeds_file}`,
/// `{output_dir}` and `{events_file}` placeholders are replaced with
/// shell-quoted paths. The crawler writes WARC files into `{output_dir}` and
/// JSON-lines progress events into `{events_file}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrawlerAdapter {
    pub name: String,
    pub command_template: String,
    #[serde(default = "default_timeout")]
    pub timeout_seconds: f64,
    #[serde(default)]
    pub contributors: Vec<String>,
}

impl CrawlerAdapter {
    pub fn new(name: impl Into<String>, command_template: impl Into<String>) -> Self {
        CrawlerAdapter {
            name: name.into(),
            command_template: command_template.into(),
            timeout_seconds: DEFAULT_TIMEOUT_SECONDS,
            contributors: Vec::new(),
        }
    }

    pub fn with_timeout(mut self, seconds: f64) -> Self {
        self.timeout_seconds = seconds;
        self
    }

    pub fn load(path: &Path) -> Result<Self, RaceError> {
        let text = std::fs::read_to_string(path).map_err(|e| RaceError::io(path, e))?;
        let adapter: CrawlerAdapter =
            serde_json::from_str(&text).map_err(|e| RaceError::BadAdapter {
                name: path.display().to_string(),
                reason: e.to_string(),
            })?;
        adapter.validate()?;
        Ok(adapter)
    }

    pub fn validate(&self) -> Result<(), RaceError> {
        let bad = |reason: String| RaceError::BadAdapter {
            name: self.name.clone(),
            reason,
        };
        let valid_name = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            && !self.name.starts_with('.');
        if !valid_name {
            return Err(bad(
                "name must be non-empty and use only [A-Za-z0-9._-]".into()
            ));
        }
        let missing: Vec<&str> = PLACEHOLDERS
            .iter()
            .copied()
            .filter(|p| !self.command_template.contains(p))
            .collect();
        if !missing.is_empty() {
            return Err(bad(format!(
                "command_template lacks {}",
                missing.join(", ")
            )));
        }
        if !(self.timeout_seconds.is_finite() && self.timeout_seconds > 0.0) {
            return Err(bad("timeout_seconds must be positive".into()));
        }
        Ok(())
    }

    /// The shell command line for one run.
    pub fn render_command(
        &self,
        seeds_file: &Path,
        output_dir: &Path,
        events_file: &Path,
    ) -> String {
        self.command_template
            .replace("{seeds_file}", &shell_quote(seeds_file))
            .replace("{output_dir}", &shell_quote(output_dir))
            .replace("{events_file}", &shell_quote(events_file))
    }
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}
