use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::round::pick_fastest;
use super::{format_hms, RoundResult};
use crate::metrics::PerformanceResults;

/// One crawler's time in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardCell {
    pub speedrun_seconds: f64,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub round: u32,
    /// Absent when the crawler did not take part in the round.
    pub times: BTreeMap<String, LeaderboardCell>,
    pub winner: Option<String>,
}

/// Multi-round standings. Times are kept unrounded; rounding to whole
/// seconds happens only in [`Leaderboard::to_markdown`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    /// Column order: best average first, crawlers that never finished last.
    pub crawlers: Vec<String>,
    pub rows: Vec<LeaderboardRow>,
    /// Mean speedrun time over the rounds each crawler finished.
    pub averages: BTreeMap<String, Option<f64>>,
    pub overall_winner_counts: BTreeMap<String, u32>,
    /// Crawlers whose average covers fewer rounds than the board has.
    pub flagged: BTreeSet<String>,
}

impl Leaderboard {
    fn from_rows(mut rows: Vec<LeaderboardRow>) -> Self {
        rows.sort_by_key(|r| r.round);
        let all: BTreeSet<String> = rows.iter().flat_map(|r| r.times.keys().cloned()).collect();

        let mut averages = BTreeMap::new();
        let mut flagged = BTreeSet::new();
        let mut overall_winner_counts: BTreeMap<String, u32> =
            all.iter().map(|n| (n.clone(), 0)).collect();
        for name in &all {
            let finished: Vec<f64> = rows
                .iter()
                .filter_map(|r| r.times.get(name))
                .filter(|c| c.finished)
                .map(|c| c.speedrun_seconds)
                .collect();
            if finished.len() < rows.len() {
                flagged.insert(name.clone());
            }
            let avg = (!finished.is_empty())
                .then(|| finished.iter().sum::<f64>() / finished.len() as f64);
            averages.insert(name.clone(), avg);
        }
        for row in &rows {
            if let Some(w) = &row.winner {
                *overall_winner_counts.entry(w.clone()).or_insert(0) += 1;
            }
        }

        let mut crawlers: Vec<String> = all.into_iter().collect();
        crawlers.sort_by(|a, b| {
            let (x, y) = (averages[a], averages[b]);
            match (x, y) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            }
            .then_with(|| a.cmp(b))
        });

        Leaderboard {
            crawlers,
            rows,
            averages,
            overall_winner_counts,
            flagged,
        }
    }

    /// Build from results files alone. A crawler counts as finished when it
    /// archived `seed_count` pages; without a seed count, when it matched
    /// the most pages any crawler archived that round.
    pub fn from_results(results: &[PerformanceResults], seed_count: Option<u64>) -> Self {
        let mut by_round: BTreeMap<u32, Vec<&PerformanceResults>> = BTreeMap::new();
        for r in results {
            by_round.entry(r.round).or_default().push(r);
        }
        let rows = by_round
            .into_iter()
            .map(|(round, rs)| {
                let target = seed_count
                    .unwrap_or_else(|| rs.iter().map(|r| r.pages_archived).max().unwrap_or(0));
                let times: BTreeMap<String, LeaderboardCell> = rs
                    .iter()
                    .map(|r| {
                        (
                            r.crawler_name.clone(),
                            LeaderboardCell {
                                speedrun_seconds: r.speedrun_seconds,
                                finished: r.pages_archived == target,
                            },
                        )
                    })
                    .collect();
                let winner = pick_fastest(
                    times
                        .iter()
                        .filter(|(_, c)| c.finished)
                        .map(|(n, c)| (n.as_str(), c.speedrun_seconds)),
                )
                .map(str::to_owned);
                LeaderboardRow {
                    round,
                    times,
                    winner,
                }
            })
            .collect();
        Leaderboard::from_rows(rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("leaderboard serializes")
    }

    /// A Markdown table with one column per crawler, the round winner in
    /// bold, `DNF` for unfinished runs and an average row. Crawlers marked
    /// `*` are averaged over fewer rounds than the table shows.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .crawlers
            .iter()
            .map(|c| {
                let flag = if self.flagged.contains(c) { "*" } else { "" };
                format!("{c}{flag} speedrun time")
            })
            .collect();
        let _ = writeln!(out, "| Round | {} |", header.join(" | "));
        let _ = writeln!(out, "|---|{}", "---:|".repeat(self.crawlers.len()));
        for row in &self.rows {
            let cells: Vec<String> = self
                .crawlers
                .iter()
                .map(|c| match row.times.get(c) {
                    None => "-".to_owned(),
                    Some(cell) if !cell.finished => "DNF".to_owned(),
                    Some(cell) if row.winner.as_deref() == Some(c) => {
                        format!("**{}**", format_hms(cell.speedrun_seconds))
                    }
                    Some(cell) => format_hms(cell.speedrun_seconds),
                })
                .collect();
            let _ = writeln!(out, "| {} | {} |", row.round, cells.join(" | "));
        }
        let best = self
            .crawlers
            .first()
            .filter(|c| self.averages[*c].is_some());
        let avgs: Vec<String> = self
            .crawlers
            .iter()
            .map(|c| match self.averages[c] {
                None => "-".to_owned(),
                Some(a) if Some(c) == best => format!("**{}**", format_hms(a)),
                Some(a) => format_hms(a),
            })
            .collect();
        let _ = writeln!(out, "| Average speedrun time | {} |", avgs.join(" | "));
        let wins: Vec<String> = self
            .crawlers
            .iter()
            .map(|c| self.overall_winner_counts[c].to_string())
            .collect();
        let _ = writeln!(out, "| Rounds won | {} |", wins.join(" | "));
        if !self.flagged.is_empty() {
            let _ = writeln!(out, "\n\\* averaged only over rounds the crawler finished");
        }
        out
    }
}

/// Standings over completed race rounds.
pub fn build_leaderboard(rounds: &[RoundResult]) -> Leaderboard {
    let rows = rounds
        .iter()
        .map(|r| {
            let seed_count = r.seeds.len() as u64;
            LeaderboardRow {
                round: r.round,
                times: r
                    .per_crawler
                    .iter()
                    .map(|(name, c)| {
                        (
                            name.clone(),
                            LeaderboardCell {
                                speedrun_seconds: c.results.speedrun_seconds,
                                finished: c.results.pages_archived == seed_count
                                    && c.finish_event().is_some(),
                            },
                        )
                    })
                    .collect(),
                winner: r.winner.clone(),
            }
        })
        .collect();
    Leaderboard::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(name: &str, round: u32, secs: f64, pages: u64) -> PerformanceResults {
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

    #[test]
    fn one_round_average_is_that_time() {
        let b = Leaderboard::from_results(&[res("a", 1, 61.4, 3), res("b", 1, 70.0, 3)], None);
        assert_eq!(b.averages["a"], Some(61.4));
        assert_eq!(b.overall_winner_counts["a"], 1);
        assert_eq!(b.overall_winner_counts["b"], 0);
        assert_eq!(b.crawlers, vec!["a", "b"]);
        assert!(b.flagged.is_empty());
    }

    #[test]
    fn unfinished_rounds_flagged_and_excluded() {
        let rs = [
            res("a", 1, 10.0, 5),
            res("b", 1, 8.0, 4),
            res("a", 2, 12.0, 5),
            res("b", 2, 9.0, 5),
            res("a", 3, 11.0, 5),
        ];
        let b = Leaderboard::from_results(&rs, Some(5));
        assert_eq!(b.averages["a"], Some(11.0));
        assert_eq!(b.averages["b"], Some(9.0));
        assert!(b.flagged.contains("b") && !b.flagged.contains("a"));
        assert_eq!(b.rows[0].winner.as_deref(), Some("a"));
        assert_eq!(b.rows[1].winner.as_deref(), Some("b"));
        let total: u32 = b.overall_winner_counts.values().sum();
        assert_eq!(total, 3);

        let md = b.to_markdown();
        assert!(md.contains("| 1 | DNF | **0:00:10** |"), "{md}");
        assert!(md.contains("| 3 | - | **0:00:11** |"), "{md}");
        assert!(md.contains("b* speedrun time"), "{md}");
    }

    #[test]
    fn never_finished_has_no_average() {
        let b = Leaderboard::from_results(&[res("a", 1, 10.0, 5), res("b", 1, 3.0, 2)], None);
        assert_eq!(b.averages["b"], None);
        assert_eq!(b.crawlers, vec!["a", "b"]);
        assert!(b
            .to_markdown()
            .contains("| Average speedrun time | **0:00:10** | - |"));
    }
}
