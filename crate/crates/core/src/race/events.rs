use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use super::RaceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    RoundStart,
    PageComplete,
    RoundFinish,
    /// The crawler hit a problem it could not recover from. A crawler that
    /// writes one of these never writes `round_finish`.
    Error,
}

/// One line of an adapter's events file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressEvent {
    pub kind: EventKind,
    #[serde(with = "iso_millis")]
    pub at: DateTime<Utc>,
    #[serde(default)]
    pub uri: Option<String>,
    #[serde(default)]
    pub pages_so_far: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ProgressEvent {
    pub fn new(kind: EventKind, at: DateTime<Utc>, uri: Option<String>, pages_so_far: u64) -> Self {
        ProgressEvent {
            kind,
            at: at.trunc_subsecs(3),
            uri,
            pages_so_far,
            message: None,
        }
    }

    pub fn round_start(at: DateTime<Utc>) -> Self {
        Self::new(EventKind::RoundStart, at, None, 0)
    }

    pub fn page_complete(at: DateTime<Utc>, uri: impl Into<String>, pages_so_far: u64) -> Self {
        Self::new(EventKind::PageComplete, at, Some(uri.into()), pages_so_far)
    }

    pub fn round_finish(at: DateTime<Utc>, pages_so_far: u64) -> Self {
        Self::new(EventKind::RoundFinish, at, None, pages_so_far)
    }

    pub fn error(at: DateTime<Utc>, pages_so_far: u64, message: impl Into<String>) -> Self {
        let mut e = Self::new(EventKind::Error, at, None, pages_so_far);
        e.message = Some(message.into());
        e
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("event serializes")
    }
}

/// ISO-8601 UTC with exactly three fractional digits, e.g.
/// `2022-06-01T12:00:00.000Z`.
pub mod iso_millis {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn format(at: &DateTime<Utc>) -> String {
        at.to_rfc3339_opts(SecondsFormat::Millis, true)
    }

    pub fn parse(s: &str) -> Option<DateTime<Utc>> {
        DateTime::parse_from_rfc3339(s)
            .ok()
            .map(|d| d.with_timezone(&Utc))
    }

    pub fn serialize<S: Serializer>(at: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(at))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        parse(&raw).ok_or_else(|| serde::de::Error::custom(format!("invalid timestamp {raw:?}")))
    }
}

/// Parse a JSON-lines events stream. Blank lines are skipped; a final line
/// without a newline is accepted.
pub fn parse_events<R: BufRead>(input: R) -> Result<Vec<ProgressEvent>, RaceError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| RaceError::BadEvent {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(event);
    }
    Ok(out)
}

pub fn read_events_file(path: &Path) -> Result<Vec<ProgressEvent>, RaceError> {
    let file = std::fs::File::open(path).map_err(|e| RaceError::io(path, e))?;
    parse_events(std::io::BufReader::new(file))
}

pub fn write_events<W: Write>(out: &mut W, events: &[ProgressEvent]) -> std::io::Result<()> {
    for e in events {
        writeln!(out, "{}", e.to_line())?;
    }
    Ok(())
}

/// Check the ordering rules for one crawler's events in one round.
pub fn validate_events(events: &[ProgressEvent]) -> Result<(), String> {
    let starts = events
        .iter()
        .filter(|e| e.kind == EventKind::RoundStart)
        .count();
    if starts != 1 {
        return Err(format!("expected exactly one round_start, found {starts}"));
    }
    let finishes = events
        .iter()
        .filter(|e| e.kind == EventKind::RoundFinish)
        .count();
    if finishes > 1 {
        return Err(format!(
            "expected at most one round_finish, found {finishes}"
        ));
    }
    for pair in events.windows(2) {
        if pair[1].at < pair[0].at {
            return Err(format!(
                "event at {} precedes the one before it ({})",
                iso_millis::format(&pair[1].at),
                iso_millis::format(&pair[0].at)
            ));
        }
        if pair[1].pages_so_far < pair[0].pages_so_far {
            return Err("pages_so_far decreased".into());
        }
    }
    if let Some(e) = events
        .iter()
        .find(|e| e.kind == EventKind::PageComplete && e.uri.is_none())
    {
        return Err(format!(
            "page_complete at {} without uri",
            iso_millis::format(&e.at)
        ));
    }
    Ok(())
}
