use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::time::{Duration, Instant};

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use super::{halfway_split, write_seed_list, CrawlerAdapter, EventKind, ProgressEvent, RaceError};
use crate::metrics::{compute_performance_results_between, PerformanceResults};
use crate::warc::{Compression, WarcReader, WarcRecord};

const POLL_INTERVAL: Duration = Duration::from_millis(2);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum CrawlerOutcome {
    Finished,
    /// Exited before writing `round_finish`.
    Exited {
        code: Option<i32>,
    },
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrawlerRound {
    pub outcome: CrawlerOutcome,
    pub events: Vec<ProgressEvent>,
    pub warc_paths: Vec<PathBuf>,
    pub results: PerformanceResults,
}

impl CrawlerRound {
    pub fn finish_event(&self) -> Option<&ProgressEvent> {
        self.events
            .iter()
            .find(|e| e.kind == EventKind::RoundFinish)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub round: u32,
    pub seeds: Vec<String>,
    pub per_crawler: BTreeMap<String, CrawlerRound>,
    pub winner: Option<String>,
}

impl RoundResult {
    /// Crawler with the most pages archived, for display when nobody
    /// finished.
    pub fn leader(&self) -> Option<&str> {
        self.per_crawler
            .iter()
            .max_by(|a, b| {
                a.1.results
                    .pages_archived
                    .cmp(&b.1.results.pages_archived)
                    .then_with(|| b.0.cmp(a.0))
            })
            .map(|(name, _)| name.as_str())
    }

    /// Time at which `crawler` finished the ⌈n/2⌉-th seed.
    pub fn halfway_split(&self, crawler: &str) -> Option<DateTime<Utc>> {
        halfway_split(&self.per_crawler.get(crawler)?.events, self.seeds.len())
    }

    pub fn write(&self, path: &Path) -> Result<(), RaceError> {
        let text = serde_json::to_string_pretty(self).expect("round serializes");
        fs::write(path, text + "\n").map_err(|e| RaceError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, RaceError> {
        let text = fs::read_to_string(path).map_err(|e| RaceError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| RaceError::BadRoundFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }
}

/// Smallest time wins; exact ties go to the lexicographically smaller name.
pub(crate) fn pick_fastest<'a, I>(candidates: I) -> Option<&'a str>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    candidates
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)))
        .map(|(name, _)| name)
}

/// The round winner: the fastest crawler among those that archived every
/// seed and reported `round_finish`.
pub fn determine_winner(result: &RoundResult) -> Option<String> {
    let seed_count = result.seeds.len() as u64;
    pick_fastest(
        result
            .per_crawler
            .iter()
            .filter(|(_, c)| c.results.pages_archived == seed_count && c.finish_event().is_some())
            .map(|(name, c)| (name.as_str(), c.results.speedrun_seconds)),
    )
    .map(str::to_owned)
}

/// Incrementally reads complete lines from a file another process appends to.
struct EventTail {
    path: PathBuf,
    offset: u64,
    partial: Vec<u8>,
    events: Vec<ProgressEvent>,
}

impl EventTail {
    fn new(path: PathBuf) -> Self {
        EventTail {
            path,
            offset: 0,
            partial: Vec::new(),
            events: Vec::new(),
        }
    }

    fn poll(&mut self) {
        let Ok(mut file) = File::open(&self.path) else {
            return;
        };
        if file.seek(SeekFrom::Start(self.offset)).is_err() {
            return;
        }
        let mut fresh = Vec::new();
        let Ok(n) = file.read_to_end(&mut fresh) else {
            return;
        };
        self.offset += n as u64;
        self.partial.extend_from_slice(&fresh);
        while let Some(pos) = self.partial.iter().position(|&b| b == b'\n') {
            let line: Vec<u8> = self.partial.drain(..=pos).collect();
            self.push_line(&line);
        }
    }

    /// Also takes a last line that was never newline-terminated.
    fn finish(&mut self) {
        self.poll();
        let rest = std::mem::take(&mut self.partial);
        self.push_line(&rest);
    }

    fn push_line(&mut self, line: &[u8]) {
        let text = String::from_utf8_lossy(line);
        let text = text.trim();
        if text.is_empty() {
            return;
        }
        match serde_json::from_str::<ProgressEvent>(text) {
            Ok(e) => self.events.push(e),
            Err(e) => warn!(path = %self.path.display(), error = %e, "ignoring bad event line"),
        }
    }

    fn has_finished(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::RoundFinish)
    }
}

struct Runner<'a> {
    adapter: &'a CrawlerAdapter,
    dir: PathBuf,
    warc_dir: PathBuf,
    child: Option<Child>,
    tail: EventTail,
    deadline: Instant,
    outcome: Option<CrawlerOutcome>,
    stopped_at: Option<DateTime<Utc>>,
}

impl Runner<'_> {
    fn settle(&mut self, status: ExitStatus) {
        self.tail.poll();
        self.outcome = Some(if self.tail.has_finished() {
            CrawlerOutcome::Finished
        } else {
            CrawlerOutcome::Exited {
                code: status.code(),
            }
        });
        self.stopped_at = Some(Utc::now());
    }

    fn step(&mut self) -> Result<(), RaceError> {
        if self.outcome.is_some() {
            return Ok(());
        }
        self.tail.poll();
        let child = self.child.as_mut().expect("running child");
        match child.try_wait() {
            Ok(Some(status)) => self.settle(status),
            Ok(None) if Instant::now() >= self.deadline => {
                let stopped = Utc::now();
                kill_tree(child);
                let _ = child.wait();
                self.tail.poll();
                self.outcome = Some(if self.tail.has_finished() {
                    CrawlerOutcome::Finished
                } else {
                    warn!(crawler = %self.adapter.name, "timed out");
                    CrawlerOutcome::TimedOut
                });
                self.stopped_at = Some(stopped);
            }
            Ok(None) => {}
            Err(e) => return Err(RaceError::io(&self.dir, e)),
        }
        Ok(())
    }
}

#[cfg(unix)]
fn configure_group(cmd: &mut Command) {
    use std::os::unix::process::CommandExt;
    cmd.process_group(0);
}

#[cfg(not(unix))]
fn configure_group(_cmd: &mut Command) {}

/// Kill the crawler and anything it spawned.
fn kill_tree(child: &mut Child) {
    #[cfg(unix)]
    {
        let pid = child.id() as libc::pid_t;
        // SAFETY: signalling the process group we created for this child
        unsafe {
            libc::kill(-pid, libc::SIGKILL);
        }
    }
    let _ = child.kill();
}

fn warc_files(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.path())
        .filter(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            name.ends_with(".warc") || name.ends_with(".warc.gz")
        })
        .collect();
    out.sort();
    out
}

/// Every record that can be read from the given files. A fatal error in one
/// file keeps the records read before it.
pub fn load_warc_records(paths: &[PathBuf]) -> Result<Vec<WarcRecord>, RaceError> {
    let mut records = Vec::new();
    for path in paths {
        let file = File::open(path).map_err(|e| RaceError::io(path, e))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        for item in WarcReader::new(file, Compression::Auto).with_filename(name) {
            match item {
                Ok(r) => records.push(r),
                Err(e) if e.is_recoverable() => {
                    warn!(path = %path.display(), error = %e, "skipped record")
                }
                Err(e) => {
                    warn!(path = %path.display(), error = %e, "stopped reading WARC");
                    break;
                }
            }
        }
    }
    Ok(records)
}

pub fn round_dir(workdir: &Path, round: u32) -> PathBuf {
    workdir.join("rounds").join(format!("round-{round}"))
}

/// Race `adapters` over `seeds`.
///
/// One round-start timestamp is taken before any crawler is launched, and
/// every crawler's speedrun time is measured from it. Files land under
/// `<workdir>/rounds/round-<N>/<crawler>/{events.jsonl, warcs/, results.json}`
/// and the whole result in `round.json`.
pub fn run_round(
    adapters: &[CrawlerAdapter],
    seeds: &[String],
    round: u32,
    workdir: &Path,
) -> Result<RoundResult, RaceError> {
    if adapters.len() < 2 {
        return Err(RaceError::NotEnoughAdapters(adapters.len()));
    }
    if seeds.is_empty() {
        return Err(RaceError::NoSeeds);
    }
    if round == 0 {
        return Err(RaceError::InvalidRound);
    }
    let mut names = std::collections::BTreeSet::new();
    for a in adapters {
        a.validate()?;
        if !names.insert(a.name.as_str()) {
            return Err(RaceError::DuplicateName(a.name.clone()));
        }
    }

    let dir = round_dir(workdir, round);
    fs::create_dir_all(&dir).map_err(|e| RaceError::io(&dir, e))?;
    let seeds_file = dir.join("seeds.txt");
    write_seed_list(&seeds_file, seeds)?;

    let mut runners = Vec::with_capacity(adapters.len());
    let mut commands = Vec::with_capacity(adapters.len());
    for adapter in adapters {
        let cdir = dir.join(&adapter.name);
        let warc_dir = cdir.join("warcs");
        if warc_dir.exists() {
            fs::remove_dir_all(&warc_dir).map_err(|e| RaceError::io(&warc_dir, e))?;
        }
        fs::create_dir_all(&warc_dir).map_err(|e| RaceError::io(&warc_dir, e))?;
        let events_file = cdir.join("events.jsonl");
        File::create(&events_file).map_err(|e| RaceError::io(&events_file, e))?;

        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(adapter.render_command(&seeds_file, &warc_dir, &events_file))
            .stdin(Stdio::null())
            .stdout(log_file(&cdir.join("stdout.log"))?)
            .stderr(log_file(&cdir.join("stderr.log"))?);
        configure_group(&mut cmd);
        commands.push(cmd);
        runners.push(Runner {
            adapter,
            dir: cdir,
            warc_dir,
            child: None,
            tail: EventTail::new(events_file),
            deadline: Instant::now(),
            outcome: None,
            stopped_at: None,
        });
    }

    let round_start = Utc::now().trunc_subsecs(3);
    let launch = Instant::now();
    for (runner, cmd) in runners.iter_mut().zip(commands.iter_mut()) {
        let child = cmd.spawn().map_err(|source| RaceError::Spawn {
            name: runner.adapter.name.clone(),
            source,
        })?;
        runner.child = Some(child);
        runner.deadline = launch + Duration::from_secs_f64(runner.adapter.timeout_seconds);
    }
    info!(round, crawlers = runners.len(), "round started");

    let mut supervise = || -> Result<(), RaceError> {
        loop {
            for r in runners.iter_mut() {
                r.step()?;
            }
            if runners.iter().all(|r| r.outcome.is_some()) {
                return Ok(());
            }
            std::thread::sleep(POLL_INTERVAL);
        }
    };
    if let Err(e) = supervise() {
        for r in runners.iter_mut() {
            if let Some(child) = r.child.as_mut() {
                kill_tree(child);
                let _ = child.wait();
            }
        }
        return Err(e);
    }

    let mut per_crawler = BTreeMap::new();
    for mut r in runners {
        r.tail.finish();
        let outcome = r.outcome.take().expect("settled");
        let mut events = vec![ProgressEvent::round_start(round_start)];
        events.extend(
            r.tail
                .events
                .iter()
                .filter(|e| e.kind != EventKind::RoundStart)
                .cloned(),
        );
        let finish = match (
            &outcome,
            events.iter().find(|e| e.kind == EventKind::RoundFinish),
        ) {
            (CrawlerOutcome::Finished, Some(f)) => f.at,
            _ => r.stopped_at.unwrap_or_else(Utc::now).trunc_subsecs(3),
        };
        // an adapter clock that runs behind the supervisor's cannot produce a
        // negative time
        let finish = finish.max(round_start);
        let warc_paths = warc_files(&r.warc_dir);
        let records = load_warc_records(&warc_paths)?;
        let results = compute_performance_results_between(
            &records,
            &events,
            &r.adapter.name,
            round,
            round_start,
            finish,
        )?;
        results.write(&r.dir.join("results.json"))?;
        info!(crawler = %r.adapter.name, ?outcome, seconds = results.speedrun_seconds, "crawler done");
        per_crawler.insert(
            r.adapter.name.clone(),
            CrawlerRound {
                outcome,
                events,
                warc_paths,
                results,
            },
        );
    }

    let mut result = RoundResult {
        round,
        seeds: seeds.to_vec(),
        per_crawler,
        winner: None,
    };
    result.winner = determine_winner(&result);
    result.write(&dir.join("round.json"))?;

    let anyone_finished = result
        .per_crawler
        .values()
        .any(|c| c.outcome == CrawlerOutcome::Finished);
    if !anyone_finished {
        return Err(RaceError::AllCrawlersFailed { round });
    }
    Ok(result)
}

fn log_file(path: &Path) -> Result<File, RaceError> {
    File::create(path).map_err(|e| RaceError::io(path, e))
}
