use chrono::{DateTime, Utc};
use thiserror::Error;

use super::{EventKind, ProgressEvent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("finish {finish} is earlier than start {start}")]
pub struct ClockSkew {
    pub start: DateTime<Utc>,
    pub finish: DateTime<Utc>,
}

/// Seconds from `start` to `finish`, keeping millisecond resolution.
pub fn compute_speedrun_time(
    start: DateTime<Utc>,
    finish: DateTime<Utc>,
) -> Result<f64, ClockSkew> {
    let ms = (finish - start).num_milliseconds();
    if ms < 0 {
        return Err(ClockSkew { start, finish });
    }
    Ok(ms as f64 / 1000.0)
}

/// `H:MM:SS`, rounded to the nearest second (halves round up).
pub fn format_hms(seconds: f64) -> String {
    let total = seconds.max(0.0).round() as u64;
    format!(
        "{}:{:02}:{:02}",
        total / 3600,
        (total / 60) % 60,
        total % 60
    )
}

/// Parse `H:MM:SS` (or `MM:SS`) into seconds.
pub fn parse_hms(text: &str) -> Option<f64> {
    let parts: Vec<&str> = text.trim().split(':').collect();
    if parts.is_empty() || parts.len() > 3 {
        return None;
    }
    let mut total = 0.0;
    for p in &parts {
        let v: f64 = p.parse().ok()?;
        if v < 0.0 {
            return None;
        }
        total = total * 60.0 + v;
    }
    Some(total)
}

/// When the crawler finished the ⌈n/2⌉-th page of an `n`-seed round.
pub fn halfway_split(events: &[ProgressEvent], seed_count: usize) -> Option<DateTime<Utc>> {
    if seed_count == 0 {
        return None;
    }
    let half = seed_count.div_ceil(2);
    events
        .iter()
        .filter(|e| e.kind == EventKind::PageComplete)
        .nth(half - 1)
        .map(|e| e.at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn round_one_brozzler() {
        let start = Utc.with_ymd_and_hms(2022, 6, 1, 12, 0, 0).unwrap();
        let finish = Utc.with_ymd_and_hms(2022, 6, 1, 12, 19, 16).unwrap();
        let secs = compute_speedrun_time(start, finish).unwrap();
        assert_eq!(secs, 1156.0);
        assert_eq!(format_hms(secs), "0:19:16");
    }

    #[test]
    fn zero_and_negative() {
        let t = Utc.timestamp_millis_opt(1_000_000).unwrap();
        assert_eq!(compute_speedrun_time(t, t).unwrap(), 0.0);
        let earlier = Utc.timestamp_millis_opt(999_999).unwrap();
        assert!(compute_speedrun_time(t, earlier).is_err());
        assert_eq!(compute_speedrun_time(earlier, t).unwrap(), 0.001);
    }

    #[test]
    fn rendering_rounds_to_nearest() {
        assert_eq!(format_hms(1173.6), "0:19:34");
        assert_eq!(format_hms(1173.4), "0:19:33");
        assert_eq!(format_hms(3600.0), "1:00:00");
        assert_eq!(parse_hms("0:21:52"), Some(1312.0));
        assert_eq!(parse_hms("19:16"), Some(1156.0));
        assert_eq!(parse_hms("x"), None);
    }

    #[test]
    fn halfway_is_ceil_half() {
        let base = Utc.timestamp_millis_opt(0).unwrap();
        let mut events = vec![ProgressEvent::round_start(base)];
        for i in 1..=5 {
            events.push(ProgressEvent::page_complete(
                base + chrono::Duration::milliseconds(i * 100),
                format!("https://a.com/{i}"),
                i as u64,
            ));
        }
        let split = halfway_split(&events, 5).unwrap();
        assert_eq!(split, base + chrono::Duration::milliseconds(300));
        assert_eq!(halfway_split(&events, 20), None);
        assert_eq!(halfway_split(&events, 0), None);
    }
}
