use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

use super::{classify_resource, extract_references, MetricsError, ResourceCategory};
use crate::race::{compute_speedrun_time, EventKind, ProgressEvent};
use crate::warc::{http_body, http_header, parse_http_response, RecordType, WarcRecord};

/// Per-crawler, per-round performance summary written as
/// `results-<crawler>-round<N>.json`.
///
/// A reference that was captured with a 404 is counted both in
/// `resources_404` and as missing in its category. Missing URIs are
/// deduplicated across pages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceResults {
    pub crawler_name: String,
    pub round: u32,
    pub pages_archived: u64,
    pub speedrun_seconds: f64,
    pub resources_404: u64,
    pub resources_other_4xx_5xx: u64,
    #[serde(default)]
    pub missing_by_type: BTreeMap<ResourceCategory, u64>,
}

impl PerformanceResults {
    pub fn missing(&self, category: ResourceCategory) -> u64 {
        self.missing_by_type.get(&category).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }

    pub fn file_name(&self) -> String {
        format!("results-{}-round{}.json", self.crawler_name, self.round)
    }

    pub fn read(path: &Path) -> Result<Self, MetricsError> {
        let text = std::fs::read_to_string(path).map_err(|e| MetricsError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| MetricsError::BadResults {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), MetricsError> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(|e| MetricsError::io(path, e))
    }
}

/// What the WARC side of the analysis found, before the crawl log is
/// consulted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArchiveAnalysis {
    pub response_records: u64,
    pub resources_404: u64,
    pub resources_other_4xx_5xx: u64,
    /// Referenced but never successfully captured, with their category.
    pub missing: BTreeMap<String, ResourceCategory>,
}

impl ArchiveAnalysis {
    pub fn missing_by_type(&self) -> BTreeMap<ResourceCategory, u64> {
        let mut out = BTreeMap::new();
        for cat in self.missing.values() {
            *out.entry(*cat).or_insert(0) += 1;
        }
        out
    }
}

fn normalize(uri: &str) -> Option<String> {
    let mut url = Url::parse(uri.trim()).ok()?;
    url.set_fragment(None);
    Some(url.into())
}

const MAX_REDIRECT_HOPS: usize = 10;

/// Count error captures and work out which referenced resources are
/// missing.
///
/// Successful captures are 2xx `response` records and any `revisit` record.
/// A 3xx capture counts as successful when its `Location` chain ends in a
/// successful capture. References come from 2xx HTML and CSS payloads.
pub fn analyze_records(records: &[WarcRecord]) -> ArchiveAnalysis {
    let mut analysis = ArchiveAnalysis::default();
    let mut captured: BTreeSet<String> = BTreeSet::new();
    let mut redirects: HashMap<String, String> = HashMap::new();
    let mut referenced: BTreeSet<String> = BTreeSet::new();

    for record in records {
        let Some(uri) = record.target_uri.as_deref().and_then(normalize) else {
            continue;
        };
        match record.record_type {
            RecordType::Revisit => {
                captured.insert(uri);
            }
            RecordType::Response => {
                analysis.response_records += 1;
                let Ok(meta) = parse_http_response(&record.payload) else {
                    continue;
                };
                match meta.status_code {
                    404 => analysis.resources_404 += 1,
                    400..=599 => analysis.resources_other_4xx_5xx += 1,
                    300..=399 => {
                        let target = http_header(&record.payload, "Location")
                            .and_then(|loc| Url::parse(&uri).ok()?.join(&loc).ok())
                            .and_then(|u| normalize(u.as_str()));
                        if let Some(target) = target {
                            redirects.insert(uri.clone(), target);
                        }
                    }
                    200..=299 => {
                        let category =
                            classify_resource(meta.declared_content_type.as_deref(), &uri);
                        if matches!(category, ResourceCategory::Html | ResourceCategory::Css) {
                            let base = Url::parse(&uri).expect("normalized URI parses");
                            let body = http_body(&record.payload).unwrap_or_default();
                            referenced.extend(extract_references(body, category, &base));
                        }
                        captured.insert(uri);
                    }
                    _ => {}
                }
            }
            _ => {}
        }
    }

    let resolves = |uri: &String| {
        let mut current = uri;
        for _ in 0..=MAX_REDIRECT_HOPS {
            if captured.contains(current) {
                return true;
            }
            match redirects.get(current) {
                Some(next) => current = next,
                None => return false,
            }
        }
        false
    };
    for uri in referenced {
        if !resolves(&uri) {
            // the failed capture's own Content-Type is usually an error page,
            // so the category comes from the reference itself
            let category = classify_resource(None, &uri);
            analysis.missing.insert(uri, category);
        }
    }
    analysis
}

/// First `round_start` and last `round_finish` in a crawl log.
pub fn round_bounds(
    crawl_log: &[ProgressEvent],
) -> Result<(DateTime<Utc>, DateTime<Utc>), MetricsError> {
    let start = crawl_log
        .iter()
        .find(|e| e.kind == EventKind::RoundStart)
        .ok_or(MetricsError::MissingBoundary("round_start"))?;
    let finish = crawl_log
        .iter()
        .rev()
        .find(|e| e.kind == EventKind::RoundFinish)
        .ok_or(MetricsError::MissingBoundary("round_finish"))?;
    Ok((start.at, finish.at))
}

/// Build the results file for one crawler's round. Both round boundaries
/// must be present in `crawl_log`.
pub fn compute_performance_results(
    records: &[WarcRecord],
    crawl_log: &[ProgressEvent],
    crawler_name: &str,
    round: u32,
) -> Result<PerformanceResults, MetricsError> {
    let (start, finish) = round_bounds(crawl_log)?;
    compute_performance_results_between(records, crawl_log, crawler_name, round, start, finish)
}

/// Like [`compute_performance_results`] with explicit round boundaries, for
/// crawlers that never reported a finish (timeouts, crashes).
pub fn compute_performance_results_between(
    records: &[WarcRecord],
    crawl_log: &[ProgressEvent],
    crawler_name: &str,
    round: u32,
    start: DateTime<Utc>,
    finish: DateTime<Utc>,
) -> Result<PerformanceResults, MetricsError> {
    if round == 0 {
        return Err(MetricsError::InvalidRound);
    }
    let speedrun_seconds = compute_speedrun_time(start, finish)?;
    let pages_archived = crawl_log
        .iter()
        .filter(|e| e.kind == EventKind::PageComplete)
        .count() as u64;
    let analysis = analyze_records(records);
    Ok(PerformanceResults {
        crawler_name: crawler_name.to_owned(),
        round,
        pages_archived,
        speedrun_seconds,
        resources_404: analysis.resources_404,
        resources_other_4xx_5xx: analysis.resources_other_4xx_5xx,
        missing_by_type: analysis.missing_by_type(),
    })
}
