use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use warcrace_core::gamemap::{
    build_game_config, emit_automation_script, patch_roster, write_automation_script, GameProfile,
    RosterLayout,
};
use warcrace_core::metrics::{compute_performance_results, summarize_cdx, PerformanceResults};
use warcrace_core::race::{
    build_leaderboard, format_hms, load_seed_list, load_warc_records, read_events_file, run_round,
    CrawlerAdapter, Leaderboard, RaceError,
};
use warcrace_core::sim::{load_fault_rules, run_sim_crawl, serve_fixture, SpeedProfile};
use warcrace_core::warc::{generate_cdxj, parse_cdxj, read_warc_file, write_cdxj};

use crate::{Command, Format};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Race {
            seeds,
            adapters,
            rounds,
            workdir,
        } => race(&seeds, &adapters, rounds, &workdir),
        Command::Analyze {
            warcs,
            events,
            name,
            round,
            out,
        } => analyze(&warcs, &events, &name, round, &out),
        Command::CdxIndex { warcs, out } => cdx_index(&warcs, &out),
        Command::CdxSummary { cdxj } => cdx_summary(&cdxj),
        Command::Gamemap {
            results,
            profile,
            out_config,
            out_script,
            roster,
            layout,
            out_roster,
            adapters,
            seed_count,
        } => gamemap(GamemapArgs {
            results,
            profile,
            out_config,
            out_script,
            roster: roster
                .zip(layout)
                .zip(out_roster)
                .map(|((r, l), o)| (r, l, o)),
            adapters,
            seed_count,
        }),
        Command::Leaderboard {
            results,
            format,
            seed_count,
        } => leaderboard(&results, format, seed_count),
        Command::SimServe { site, faults, port } => sim_serve(&site, faults.as_deref(), port),
        Command::SimCrawl {
            seeds,
            delay_ms,
            jitter_ms,
            seed,
            out,
            events,
        } => sim_crawl(
            &seeds,
            SpeedProfile {
                per_page_delay_ms: delay_ms,
                jitter_ms,
                seed,
            },
            &out,
            &events,
        ),
    }
}

fn race(seeds: &Path, adapters: &[PathBuf], rounds: u32, workdir: &Path) -> Result<()> {
    let seeds = load_seed_list(seeds)?;
    let adapters = adapters
        .iter()
        .map(|p| CrawlerAdapter::load(p))
        .collect::<Result<Vec<_>, _>>()?;

    let mut completed = Vec::new();
    let mut failed_rounds = Vec::new();
    for round in 1..=rounds {
        match run_round(&adapters, &seeds, round, workdir) {
            Ok(result) => {
                let winner = result.winner.as_deref().unwrap_or("nobody");
                let times: Vec<String> = result
                    .per_crawler
                    .iter()
                    .map(|(n, c)| format!("{n} {}", format_hms(c.results.speedrun_seconds)))
                    .collect();
                println!("round {round}: winner {winner} ({})", times.join(", "));
                completed.push(result);
            }
            Err(RaceError::AllCrawlersFailed { round }) => {
                eprintln!("round {round}: no crawler finished");
                failed_rounds.push(round);
            }
            Err(e) => return Err(e.into()),
        }
    }

    let board = build_leaderboard(&completed);
    let md = board.to_markdown();
    write_file(&workdir.join("leaderboard.md"), md.as_bytes())?;
    write_file(
        &workdir.join("leaderboard.json"),
        board.to_json().as_bytes(),
    )?;
    println!("\n{md}");
    if !failed_rounds.is_empty() {
        bail!("no crawler finished in round(s) {failed_rounds:?}");
    }
    Ok(())
}

fn analyze(warcs: &[PathBuf], events: &Path, name: &str, round: u32, out: &Path) -> Result<()> {
    for w in warcs {
        if !w.is_file() {
            bail!("{}: no such file", w.display());
        }
    }
    let records = load_warc_records(warcs)?;
    let log = read_events_file(events)?;
    let results = compute_performance_results(&records, &log, name, round)?;
    results.write(out)?;
    println!(
        "{name} round {round}: {} pages in {} ({:.3} s), {} x 404, {} other 4xx/5xx, {} missing",
        results.pages_archived,
        format_hms(results.speedrun_seconds),
        results.speedrun_seconds,
        results.resources_404,
        results.resources_other_4xx_5xx,
        results.missing_by_type.values().sum::<u64>()
    );
    Ok(())
}

fn cdx_index(warcs: &[PathBuf], out: &Path) -> Result<()> {
    let mut entries = Vec::new();
    let mut skipped_records = 0;
    for path in warcs {
        let parsed = read_warc_file(path, false).with_context(|| path.display().to_string())?;
        skipped_records += parsed.skipped.len();
        let filename = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        entries.extend(generate_cdxj(&parsed.records, &filename).entries);
    }
    entries.sort_by(|a, b| {
        a.sort_key()
            .cmp(&b.sort_key())
            .then_with(|| a.filename.cmp(&b.filename))
    });
    let file = File::create(out).with_context(|| out.display().to_string())?;
    let mut w = BufWriter::new(file);
    write_cdxj(&mut w, &entries)
        .and_then(|_| w.flush())
        .with_context(|| out.display().to_string())?;
    println!("{} captures indexed into {}", entries.len(), out.display());
    if skipped_records > 0 {
        eprintln!("{skipped_records} malformed record(s) skipped");
    }
    Ok(())
}

fn cdx_summary(path: &Path) -> Result<()> {
    let file = File::open(path).with_context(|| path.display().to_string())?;
    let entries = parse_cdxj(BufReader::new(file)).with_context(|| path.display().to_string())?;
    let summary = summarize_cdx(&entries);
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

struct GamemapArgs {
    results: Vec<PathBuf>,
    profile: String,
    out_config: PathBuf,
    out_script: Option<PathBuf>,
    roster: Option<(PathBuf, PathBuf, PathBuf)>,
    adapters: Vec<PathBuf>,
    seed_count: Option<u64>,
}

fn load_profile(name_or_path: &str) -> Result<GameProfile> {
    let path = Path::new(name_or_path);
    if path.exists() {
        return Ok(GameProfile::load(path)?);
    }
    match name_or_path {
        "gun-mayhem-2" => Ok(GameProfile::gun_mayhem_2()),
        "nfl-challenge" => Ok(GameProfile::nfl_challenge()),
        _ => bail!("{name_or_path}: no such profile file (bundled: gun-mayhem-2, nfl-challenge)"),
    }
}

fn gamemap(args: GamemapArgs) -> Result<()> {
    let results = args
        .results
        .iter()
        .map(|p| PerformanceResults::read(p))
        .collect::<Result<Vec<_>, _>>()?;
    let profile = load_profile(&args.profile)?;
    let mut contributors = BTreeMap::new();
    for path in &args.adapters {
        let a = CrawlerAdapter::load(path)?;
        contributors.insert(a.name, a.contributors);
    }

    let config = build_game_config(&results, &profile, &contributors, args.seed_count)?;
    config.write(&args.out_config)?;
    for a in &config.assignments {
        println!(
            "rank {}: {} -> {} [{}]",
            a.rank,
            a.crawler_name,
            a.weapon_tier,
            a.perks.join(", ")
        );
    }

    if let Some(path) = &args.out_script {
        let actions = emit_automation_script(&config, &profile)?;
        write_automation_script(path, &actions)?;
        println!("{} UI actions written to {}", actions.len(), path.display());
    }
    if let Some((roster, layout, out)) = &args.roster {
        let text = std::fs::read_to_string(roster).with_context(|| roster.display().to_string())?;
        let layout = RosterLayout::load(layout)?;
        let patched = patch_roster(&text, &layout, &config)?;
        write_file(out, patched.as_bytes())?;
        println!("roster written to {}", out.display());
    }
    Ok(())
}

fn expand(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for p in patterns {
        if p.contains(['*', '?', '[']) {
            let before = paths.len();
            for entry in glob::glob(p).with_context(|| format!("bad pattern {p:?}"))? {
                paths.push(entry?);
            }
            if paths.len() == before {
                bail!("{p}: no files match");
            }
        } else {
            paths.push(PathBuf::from(p));
        }
    }
    paths.sort();
    paths.dedup();
    Ok(paths)
}

fn leaderboard(patterns: &[String], format: Format, seed_count: Option<u64>) -> Result<()> {
    let results = expand(patterns)?
        .iter()
        .map(|p| PerformanceResults::read(p))
        .collect::<Result<Vec<_>, _>>()?;
    let board = Leaderboard::from_results(&results, seed_count);
    match format {
        Format::Markdown => print!("{}", board.to_markdown()),
        Format::Json => println!("{}", board.to_json()),
    }
    Ok(())
}

fn sim_serve(site: &Path, faults: Option<&Path>, port: u16) -> Result<()> {
    let rules = match faults {
        Some(p) => load_fault_rules(p)?,
        None => Vec::new(),
    };
    let server = serve_fixture(site, &rules, port)?;
    println!("serving {} at {}", site.display(), server.url("/"));
    std::io::stdout().flush()?;
    loop {
        std::thread::park();
    }
}

fn sim_crawl(seeds: &Path, profile: SpeedProfile, out: &Path, events: &Path) -> Result<()> {
    let seeds = load_seed_list(seeds)?;
    let outcome = run_sim_crawl(&seeds, &profile, out, events)?;
    println!(
        "{} of {} pages archived, {} events, WARC: {}",
        outcome.pages_completed,
        seeds.len(),
        outcome.event_count,
        outcome
            .warc_paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| path.display().to_string())
}
