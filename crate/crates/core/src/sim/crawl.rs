use std::collections::{BTreeSet, VecDeque};
use std::fs::File;
use std::io::{BufWriter, ErrorKind, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::Utc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use url::Url;

use super::SimError;
use crate::metrics::{classify_resource, extract_references, ResourceCategory};
use crate::race::ProgressEvent;
use crate::warc::{parse_http_response, write_warc_record, WarcRecord};

const CONNECT_TIMEOUT: Duration = Duration::from_secs(5);
const READ_TIMEOUT: Duration = Duration::from_secs(30);
pub(crate) const WARC_FILE_NAME: &str = "sim-00000.warc.gz";

/// Pacing for the simulated crawler: before each seed page it waits
/// `per_page_delay_ms` plus a jitter drawn uniformly from `0..=jitter_ms`
/// by a generator seeded with `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeedProfile {
    pub per_page_delay_ms: u64,
    #[serde(default)]
    pub jitter_ms: u64,
    #[serde(default)]
    pub seed: u64,
}

impl SpeedProfile {
    pub fn fixed(per_page_delay_ms: u64) -> Self {
        SpeedProfile {
            per_page_delay_ms,
            jitter_ms: 0,
            seed: 0,
        }
    }

    /// The wait before each of `pages` pages, in order.
    pub fn delays(&self, pages: usize) -> Vec<Duration> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..pages)
            .map(|_| {
                let jitter = if self.jitter_ms == 0 {
                    0
                } else {
                    rng.gen_range(0..=self.jitter_ms)
                };
                Duration::from_millis(self.per_page_delay_ms + jitter)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimCrawlOutcome {
    pub warc_paths: Vec<PathBuf>,
    pub event_count: usize,
    pub pages_completed: u64,
}

enum Fetch {
    Response(Vec<u8>),
    /// The server closed the connection without a usable response.
    Dropped,
}

fn fetch(url: &Url) -> Result<Fetch, SimError> {
    let unreachable = |source| SimError::Unreachable {
        uri: url.to_string(),
        source,
    };
    let host = url.host_str().unwrap_or_default();
    let port = url.port_or_known_default().unwrap_or(80);
    let addr = (host, port)
        .to_socket_addrs()
        .map_err(unreachable)?
        .next()
        .ok_or_else(|| unreachable(std::io::Error::new(ErrorKind::NotFound, "no address")))?;
    let mut stream = TcpStream::connect_timeout(&addr, CONNECT_TIMEOUT).map_err(unreachable)?;

    let mut target = url.path().to_owned();
    if let Some(q) = url.query() {
        target.push('?');
        target.push_str(q);
    }
    let host_header = match url.port() {
        Some(p) => format!("{host}:{p}"),
        None => host.to_owned(),
    };
    let request = format!(
        "GET {target} HTTP/1.1\r\nHost: {host_header}\r\nUser-Agent: warcrace-sim/{}\r\nAccept: */*\r\nConnection: close\r\n\r\n",
        env!("CARGO_PKG_VERSION")
    );
    let mut raw = Vec::new();
    let io = stream
        .set_read_timeout(Some(READ_TIMEOUT))
        .and_then(|_| stream.write_all(request.as_bytes()))
        .and_then(|_| stream.read_to_end(&mut raw));
    if io.is_err() || raw.is_empty() || parse_http_response(&raw).is_err() {
        return Ok(Fetch::Dropped);
    }
    Ok(Fetch::Response(raw))
}

struct Session {
    warc: BufWriter<File>,
    warc_path: PathBuf,
    events: BufWriter<File>,
    events_path: PathBuf,
    event_count: usize,
}

impl Session {
    fn event(&mut self, e: ProgressEvent) -> Result<(), SimError> {
        let path = &self.events_path;
        writeln!(self.events, "{}", e.to_line())
            .and_then(|_| self.events.flush())
            .map_err(|err| SimError::io(path, err))?;
        self.event_count += 1;
        Ok(())
    }

    fn record(&mut self, rec: &WarcRecord) -> Result<(), SimError> {
        let bytes = write_warc_record(rec, true)?;
        self.warc
            .write_all(&bytes)
            .map_err(|e| SimError::io(&self.warc_path, e))
    }

    fn finish(&mut self) -> Result<(), SimError> {
        self.warc
            .flush()
            .map_err(|e| SimError::io(&self.warc_path, e))
    }
}

/// Fetch every seed and its embedded resources, one request at a time.
///
/// Before each seed the crawler waits as `profile` says, then fetches the
/// page and, breadth first, everything its HTML and CSS reference that has
/// not been fetched yet this crawl. Every HTTP response is written to a
/// single gzipped WARC file in `output_dir`; dropped connections are not.
/// A seed counts as complete once any response for it was stored.
///
/// If the server cannot be reached at all, an `error` event is written,
/// `round_finish` is withheld and [`SimError::Unreachable`] is returned.
pub fn run_sim_crawl(
    seeds: &[String],
    profile: &SpeedProfile,
    output_dir: &Path,
    events_file: &Path,
) -> Result<SimCrawlOutcome, SimError> {
    let parsed: Vec<Url> = seeds
        .iter()
        .map(|s| {
            let url = Url::parse(s).map_err(|e| SimError::BadSeed {
                uri: s.clone(),
                reason: e.to_string(),
            })?;
            if url.scheme() != "http" {
                return Err(SimError::BadSeed {
                    uri: s.clone(),
                    reason: "only http:// is supported".into(),
                });
            }
            Ok(url)
        })
        .collect::<Result<_, _>>()?;

    std::fs::create_dir_all(output_dir).map_err(|e| SimError::io(output_dir, e))?;
    let warc_path = output_dir.join(WARC_FILE_NAME);
    let warc = File::create(&warc_path).map_err(|e| SimError::io(&warc_path, e))?;
    let events = File::create(events_file).map_err(|e| SimError::io(events_file, e))?;
    let mut session = Session {
        warc: BufWriter::new(warc),
        warc_path: warc_path.clone(),
        events: BufWriter::new(events),
        events_path: events_file.to_path_buf(),
        event_count: 0,
    };

    session.event(ProgressEvent::round_start(Utc::now()))?;
    session.record(&WarcRecord::warcinfo(
        WARC_FILE_NAME,
        Utc::now(),
        &[
            (
                "software",
                concat!("warcrace-sim/", env!("CARGO_PKG_VERSION")),
            ),
            ("format", "WARC File Format 1.1"),
        ],
    ))?;

    let mut visited: BTreeSet<String> = BTreeSet::new();
    let mut pages: u64 = 0;
    let delays = profile.delays(parsed.len());
    for (seed, delay) in parsed.iter().zip(delays) {
        std::thread::sleep(delay);
        match crawl_page(seed, &mut visited, &mut session) {
            Ok(true) => {
                pages += 1;
                session.event(ProgressEvent::page_complete(
                    Utc::now(),
                    seed.as_str(),
                    pages,
                ))?;
            }
            Ok(false) => tracing::warn!("no response for seed {seed}"),
            Err(e) => {
                session.finish()?;
                session.event(ProgressEvent::error(Utc::now(), pages, e.to_string()))?;
                return Err(e);
            }
        }
    }
    session.finish()?;
    session.event(ProgressEvent::round_finish(Utc::now(), pages))?;

    Ok(SimCrawlOutcome {
        warc_paths: vec![warc_path],
        event_count: session.event_count,
        pages_completed: pages,
    })
}

/// Returns whether the page itself got a response.
fn crawl_page(
    page: &Url,
    visited: &mut BTreeSet<String>,
    session: &mut Session,
) -> Result<bool, SimError> {
    let mut queue = VecDeque::from([page.clone()]);
    let mut page_stored = false;
    let mut first = true;
    while let Some(url) = queue.pop_front() {
        let is_page = std::mem::take(&mut first);
        if !is_page && !visited.insert(url.to_string()) {
            continue;
        }
        visited.insert(url.to_string());
        let Fetch::Response(raw) = fetch(&url)? else {
            continue;
        };
        page_stored |= is_page;
        let meta = parse_http_response(&raw)?;
        if (200..300).contains(&meta.status_code) {
            let category = classify_resource(meta.declared_content_type.as_deref(), url.as_str());
            if matches!(category, ResourceCategory::Html | ResourceCategory::Css) {
                let body = crate::warc::http_body(&raw).unwrap_or_default();
                for reference in extract_references(body, category, &url) {
                    if reference.starts_with("http://") && !visited.contains(&reference) {
                        if let Ok(next) = Url::parse(&reference) {
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
        let mut rec = WarcRecord::response(url.as_str(), Utc::now(), raw);
        rec.extra_headers
            .push(("WARC-Payload-Digest".to_owned(), meta.payload_digest));
        session.record(&rec)?;
    }
    Ok(page_stored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::race::{read_events_file, validate_events, EventKind};
    use crate::warc::read_warc_file;

    #[test]
    fn jitter_is_reproducible_and_bounded() {
        let p = SpeedProfile {
            per_page_delay_ms: 10,
            jitter_ms: 5,
            seed: 7,
        };
        let a = p.delays(50);
        assert_eq!(a, p.delays(50));
        assert!(a
            .iter()
            .all(|d| (10..=15).contains(&(d.as_millis() as u64))));
        assert_ne!(a, SpeedProfile { seed: 8, ..p }.delays(50));
        assert!(SpeedProfile::fixed(3)
            .delays(4)
            .iter()
            .all(|d| d.as_millis() == 3));
    }

    #[test]
    fn zero_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let events = dir.path().join("events.jsonl");
        let out =
            run_sim_crawl(&[], &SpeedProfile::fixed(0), &dir.path().join("w"), &events).unwrap();
        let log = read_events_file(&events).unwrap();
        let kinds: Vec<_> = log.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::RoundStart, EventKind::RoundFinish]);
        assert_eq!(out.event_count, 2);
        let parsed = read_warc_file(&out.warc_paths[0], true).unwrap();
        assert_eq!(parsed.records.len(), 1, "warcinfo only");
    }

    #[test]
    fn unreachable_server_withholds_finish() {
        let port = {
            let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().port()
        };
        let dir = tempfile::tempdir().unwrap();
        let events = dir.path().join("events.jsonl");
        let err = run_sim_crawl(
            &[format!("http://127.0.0.1:{port}/")],
            &SpeedProfile::fixed(0),
            dir.path(),
            &events,
        )
        .unwrap_err();
        assert!(matches!(err, SimError::Unreachable { .. }), "{err}");
        let log = read_events_file(&events).unwrap();
        validate_events(&log).unwrap();
        assert_eq!(log.last().unwrap().kind, EventKind::Error);
        assert!(log.iter().all(|e| e.kind != EventKind::RoundFinish));
    }

    #[test]
    fn rejects_non_http_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let err = run_sim_crawl(
            &["https://example.com/".into()],
            &SpeedProfile::fixed(0),
            dir.path(),
            &dir.path().join("e"),
        )
        .unwrap_err();
        assert!(matches!(err, SimError::BadSeed { .. }));
    }
}
