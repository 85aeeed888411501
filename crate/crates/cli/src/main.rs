//! `warcrace`: run crawler races, analyze their WARCs, index captures,
//! turn results into game settings and drive the crawl simulator.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "warcrace", version, about = "Web archiving speedrun toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Race crawlers over a seed list for one or more rounds
    Race {
        #[arg(long)]
        seeds: PathBuf,
        /// Crawler adapter file (JSON); give at least two
        #[arg(long = "adapter", required = true)]
        adapters: Vec<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        rounds: u32,
        #[arg(long)]
        workdir: PathBuf,
    },
    /// Compute one crawler's results for one round
    Analyze {
        #[arg(long = "warc", required = true)]
        warcs: Vec<PathBuf>,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        round: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a sorted CDXJ index for WARC files
    CdxIndex {
        #[arg(long = "warc", required = true)]
        warcs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print capture counts for a CDXJ index as JSON
    CdxSummary { cdxj: PathBuf },
    /// Turn round results into game settings
    Gamemap {
        #[arg(long = "results", required = true)]
        results: Vec<PathBuf>,
        /// Profile file, or a bundled profile: gun-mayhem-2, nfl-challenge
        #[arg(long)]
        profile: String,
        #[arg(long)]
        out_config: PathBuf,
        #[arg(long)]
        out_script: Option<PathBuf>,
        #[arg(long, requires_all = ["layout", "out_roster"])]
        roster: Option<PathBuf>,
        #[arg(long, requires = "roster")]
        layout: Option<PathBuf>,
        #[arg(long, requires = "roster")]
        out_roster: Option<PathBuf>,
        /// Adapter files whose contributors become player names
        #[arg(long = "adapter")]
        adapters: Vec<PathBuf>,
        /// Pages a crawler must archive to count as finished
        #[arg(long)]
        seed_count: Option<u64>,
    },
    /// Render standings from results files
    Leaderboard {
        /// Results files or glob patterns (`**` allowed)
        #[arg(required = true)]
        results: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        /// Pages a crawler must archive to count as finished
        #[arg(long)]
        seed_count: Option<u64>,
    },
    /// Serve the fixture site until interrupted
    SimServe {
        #[arg(long)]
        site: PathBuf,
        /// JSON list of fault rules
        #[arg(long)]
        faults: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        port: u16,
    },
    /// Crawl a seed list with the simulated crawler
    SimCrawl {
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long, default_value_t = 0)]
        delay_ms: u64,
        #[arg(long, default_value_t = 0)]
        jitter_ms: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        events: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_env("WARCRACE_LOG").unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();

    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
