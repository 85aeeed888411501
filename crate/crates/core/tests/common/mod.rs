#![allow(dead_code)]

use std::path::{Path, PathBuf};

use warcrace_core::sim::{
    run_sim_crawl, serve_fixture, FaultRule, ServerHandle, SimCrawlOutcome, SpeedProfile,
};

pub const CRAWL_PAGES: [&str; 5] = [
    "/index.html",
    "/about.html",
    "/gallery.html",
    "/blog.html",
    "/contact.html",
];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn site() -> PathBuf {
    fixtures().join("site")
}

pub fn start(faults: &[FaultRule]) -> ServerHandle {
    serve_fixture(&site(), faults, 0).expect("fixture server starts")
}

pub fn seeds(server: &ServerHandle, paths: &[&str]) -> Vec<String> {
    paths.iter().map(|p| server.url(p)).collect()
}

/// Crawl into `dir/warcs` with events in `dir/events.jsonl`.
pub fn crawl(dir: &Path, seeds: &[String], profile: SpeedProfile) -> SimCrawlOutcome {
    run_sim_crawl(
        seeds,
        &profile,
        &dir.join("warcs"),
        &dir.join("events.jsonl"),
    )
    .expect("sim crawl")
}
