use std::path::{Path, PathBuf};
use std::time::Instant;

use warcrace_core::race::{
    build_leaderboard, run_round, validate_events, CrawlerAdapter, CrawlerOutcome, EventKind,
    RaceError, RoundResult,
};

/// A crawler written in sh: sleeps `$4` seconds per seed and reports
/// progress. With `$5` = "crash" it exits 3 after the first page.
const SCRIPT: &str = r#"seeds=$1; out=$2; ev=$3; delay=$4; mode=$5
now() { date -u +%Y-%m-%dT%H:%M:%S.%3NZ; }
echo "{\"kind\":\"round_start\",\"at\":\"$(now)\",\"pages_so_far\":0}" >> "$ev"
n=0
for uri in $(grep -v '^#' "$seeds"); do
  sleep "$delay"
  n=$((n+1))
  echo "{\"kind\":\"page_complete\",\"at\":\"$(now)\",\"uri\":\"$uri\",\"pages_so_far\":$n}" >> "$ev"
  if [ "$mode" = crash ]; then exit 3; fi
done
echo "{\"kind\":\"round_finish\",\"at\":\"$(now)\",\"pages_so_far\":$n}" >> "$ev"
"#;

fn script(dir: &Path) -> PathBuf {
    let path = dir.join("crawler.sh");
    std::fs::write(&path, SCRIPT).unwrap();
    path
}

fn adapter(script: &Path, name: &str, delay: &str, mode: &str) -> CrawlerAdapter {
    CrawlerAdapter::new(
        name,
        format!(
            "sh '{}' {{seeds_file}} {{output_dir}} {{events_file}} {delay} {mode}",
            script.display()
        ),
    )
}

fn seeds(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("http://example.test/{i}")).collect()
}

#[test]
fn faster_crawler_wins_and_files_land_in_round_dir() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path());
    let adapters = [
        adapter(&s, "slow", "0.15", ""),
        adapter(&s, "fast", "0.05", ""),
    ];
    let work = dir.path().join("work");
    let r = run_round(&adapters, &seeds(3), 1, &work).unwrap();

    assert_eq!(r.winner.as_deref(), Some("fast"));
    let fast = &r.per_crawler["fast"];
    let slow = &r.per_crawler["slow"];
    assert_eq!(fast.outcome, CrawlerOutcome::Finished);
    assert_eq!(fast.results.pages_archived, 3);
    assert!(
        fast.results.speedrun_seconds >= 0.15,
        "{}",
        fast.results.speedrun_seconds
    );
    assert!(
        slow.results.speedrun_seconds >= 0.45,
        "{}",
        slow.results.speedrun_seconds
    );
    validate_events(&fast.events).unwrap();
    // both measured from the same start
    assert_eq!(fast.events[0].at, slow.events[0].at);

    let round = work.join("rounds").join("round-1");
    for name in ["fast", "slow"] {
        for f in ["events.jsonl", "results.json", "stdout.log", "stderr.log"] {
            assert!(round.join(name).join(f).is_file(), "{name}/{f}");
        }
        assert!(round.join(name).join("warcs").is_dir());
    }
    assert_eq!(RoundResult::read(&round.join("round.json")).unwrap(), r);
    assert_eq!(
        r.halfway_split("fast"),
        fast.events
            .iter()
            .filter(|e| e.kind == EventKind::PageComplete)
            .nth(1)
            .map(|e| e.at)
    );

    let board = build_leaderboard(&[r]);
    assert_eq!(board.crawlers, vec!["fast", "slow"]);
    assert_eq!(board.overall_winner_counts["fast"], 1);
}

#[test]
fn crashing_crawler_cannot_win() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path());
    let adapters = [
        adapter(&s, "crashy", "0", "crash"),
        adapter(&s, "steady", "0.05", ""),
    ];
    let r = run_round(&adapters, &seeds(3), 2, dir.path()).unwrap();
    assert_eq!(
        r.per_crawler["crashy"].outcome,
        CrawlerOutcome::Exited { code: Some(3) }
    );
    assert_eq!(r.per_crawler["crashy"].results.pages_archived, 1);
    assert_eq!(r.winner.as_deref(), Some("steady"));
}

#[test]
fn timeout_kills_the_crawler() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path());
    let adapters = [
        adapter(&s, "stuck", "30", "").with_timeout(0.5),
        adapter(&s, "quick", "0", ""),
    ];
    let began = Instant::now();
    let r = run_round(&adapters, &seeds(2), 1, dir.path()).unwrap();
    assert!(began.elapsed().as_secs() < 10, "{:?}", began.elapsed());
    let stuck = &r.per_crawler["stuck"];
    assert_eq!(stuck.outcome, CrawlerOutcome::TimedOut);
    assert!(stuck.results.speedrun_seconds >= 0.5);
    assert_eq!(r.winner.as_deref(), Some("quick"));
}

#[test]
fn nobody_finishing_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = script(dir.path());
    let adapters = [
        adapter(&s, "a", "0", "crash"),
        adapter(&s, "b", "0", "crash"),
    ];
    let err = run_round(&adapters, &seeds(2), 1, dir.path()).unwrap_err();
    assert!(
        matches!(err, RaceError::AllCrawlersFailed { round: 1 }),
        "{err}"
    );
    // the round record is still written for inspection
    assert!(dir.path().join("rounds/round-1/round.json").is_file());
}
