#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use warcrace_core::metrics::PerformanceResults;

pub const CRAWL_PAGES: [&str; 5] = [
    "/index.html",
    "/about.html",
    "/gallery.html",
    "/blog.html",
    "/contact.html",
];

pub const BROZZLER_TIMES: [f64; 10] = [
    1156.0, 1156.0, 1178.0, 1217.0, 1127.0, 1189.0, 1156.0, 1177.0, 1193.0, 1187.0,
];
pub const BROWSERTRIX_TIMES: [f64; 10] = [
    1312.0, 1273.0, 1342.0, 1408.0, 1155.0, 1336.0, 1319.0, 1338.0, 1324.0, 1314.0,
];

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_warcrace"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("warcrace runs")
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

pub fn results(name: &str, round: u32, secs: f64, pages: u64) -> PerformanceResults {
    PerformanceResults {
        crawler_name: name.into(),
        round,
        pages_archived: pages,
        speedrun_seconds: secs,
        resources_404: 0,
        resources_other_4xx_5xx: 0,
        missing_by_type: Default::default(),
    }
}

/// The ten published Brozzler/Browsertrix round times as results files under `<dir>/rounds/round-<N>/<crawler>/`.
pub fn write_published_times(dir: &Path) {
    for round in 1..=10u32 {
        let i = round as usize - 1;
        for (name, secs) in [
            ("Brozzler", BROZZLER_TIMES[i]),
            ("Browsertrix", BROWSERTRIX_TIMES[i]),
        ] {
            let d = dir.join(format!("rounds/round-{round}/{name}"));
            std::fs::create_dir_all(&d).unwrap();
            results(name, round, secs, 20)
                .write(&d.join("results.json"))
                .unwrap();
        }
    }
}

/// A `warcrace sim-serve` child process, killed on drop.
pub struct Server {
    child: Child,
    pub base: String,
}

impl Server {
    pub fn start(faults: Option<&Path>) -> Server {
        let site = fixtures().join("site");
        let mut cmd = bin();
        cmd.args(["sim-serve", "--site", p(&site), "--port", "0"]);
        if let Some(f) = faults {
            cmd.args(["--faults", p(f)]);
        }
        let mut child = cmd
            .stdout(Stdio::piped())
            .spawn()
            .expect("sim-serve starts");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let base = line
            .split_whitespace()
            .last()
            .expect("server prints its URL")
            .trim_end_matches('/')
            .to_owned();
        Server { child, base }
    }

    pub fn seeds_file(&self, path: &Path, pages: &[&str]) {
        let text: String = pages
            .iter()
            .map(|pg| format!("{}{pg}\n", self.base))
            .collect();
        std::fs::write(path, text).unwrap();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
