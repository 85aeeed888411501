use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{classify_resource, ResourceCategory};
use crate::warc::CdxjEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StatusClass {
    #[serde(rename = "2xx")]
    Success,
    #[serde(rename = "3xx")]
    Redirect,
    #[serde(rename = "4xx")]
    ClientError,
    #[serde(rename = "5xx")]
    ServerError,
    #[serde(rename = "other")]
    Other,
}

impl StatusClass {
    pub fn of(status: u16) -> Self {
        match status {
            200..=299 => StatusClass::Success,
            300..=399 => StatusClass::Redirect,
            400..=499 => StatusClass::ClientError,
            500..=599 => StatusClass::ServerError,
            _ => StatusClass::Other,
        }
    }
}

/// Capture counts over a CDXJ index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdxSummary {
    pub total_captures: u64,
    pub by_status_class: BTreeMap<StatusClass, u64>,
    pub by_category: BTreeMap<ResourceCategory, u64>,
    pub first_capture: Option<String>,
    pub last_capture: Option<String>,
}

pub fn summarize_cdx(entries: &[CdxjEntry]) -> CdxSummary {
    let mut by_status_class = BTreeMap::new();
    let mut by_category = BTreeMap::new();
    for e in entries {
        *by_status_class
            .entry(StatusClass::of(e.status))
            .or_insert(0) += 1;
        let category = classify_resource(Some(&e.mime), &e.original_url);
        *by_category.entry(category).or_insert(0) += 1;
    }
    CdxSummary {
        total_captures: entries.len() as u64,
        by_status_class,
        by_category,
        first_capture: entries.iter().map(|e| &e.timestamp14).min().cloned(),
        last_capture: entries.iter().map(|e| &e.timestamp14).max().cloned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(url: &str, ts: &str, status: u16, mime: &str) -> CdxjEntry {
        CdxjEntry {
            surt_key: String::new(),
            timestamp14: ts.into(),
            original_url: url.into(),
            mime: mime.into(),
            status,
            digest: String::new(),
            length: 0,
            offset: 0,
            filename: String::new(),
        }
    }

    #[test]
    fn one_html_capture() {
        let s = summarize_cdx(&[entry("https://a.com/", "20220601120000", 200, "text/html")]);
        assert_eq!(s.total_captures, 1);
        assert_eq!(
            s.by_status_class,
            BTreeMap::from([(StatusClass::Success, 1)])
        );
        assert_eq!(s.by_category, BTreeMap::from([(ResourceCategory::Html, 1)]));
        assert_eq!(s.first_capture.as_deref(), Some("20220601120000"));
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains(r#""by_status_class":{"2xx":1}"#), "{json}");
        assert!(json.contains(r#""by_category":{"html":1}"#), "{json}");
    }

    #[test]
    fn empty_index() {
        let s = summarize_cdx(&[]);
        assert_eq!(s.total_captures, 0);
        assert!(s.first_capture.is_none() && s.last_capture.is_none());
    }

    #[test]
    fn first_and_last_by_timestamp_not_position() {
        let s = summarize_cdx(&[
            entry("https://b.com/", "20220601120005", 404, "text/html"),
            entry("https://a.com/x.js", "20220601115959", 0, "warc/revisit"),
            entry("https://a.com/", "20220601120001", 302, "unk"),
        ]);
        assert_eq!(s.first_capture.as_deref(), Some("20220601115959"));
        assert_eq!(s.last_capture.as_deref(), Some("20220601120005"));
        assert_eq!(s.by_status_class.get(&StatusClass::Other), Some(&1));
        assert_eq!(s.by_category.get(&ResourceCategory::Javascript), Some(&1));
        assert_eq!(s.by_category.get(&ResourceCategory::Other), Some(&1));
    }
}
