use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::GameMapError;
use crate::metrics::PerformanceResults;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierAssignment {
    pub crawler_name: String,
    /// 1 is best.
    pub rank: u32,
    pub tier_label: String,
}

fn tier_label(rank: u32, of: u32) -> String {
    match rank {
        1 => "fastest".to_owned(),
        r if r == of => "slowest".to_owned(),
        r => format!("rank-{r}"),
    }
}

/// Order crawlers by speed.
///
/// Finishers come first by ascending speedrun time; crawlers that did not
/// finish follow by descending pages archived; remaining ties go by name.
/// A crawler finished when it archived `expected_pages` pages, or when
/// `expected_pages` is `None`, the most pages of anyone in the round.
pub fn rank_crawlers(
    results: &[PerformanceResults],
    expected_pages: Option<u64>,
) -> Result<Vec<TierAssignment>, GameMapError> {
    if results.len() < 2 {
        return Err(GameMapError::NotEnoughResults(results.len()));
    }
    let round = results[0].round;
    if let Some(other) = results.iter().find(|r| r.round != round) {
        return Err(GameMapError::MixedRounds(round, other.round));
    }
    let mut seen = BTreeSet::new();
    for r in results {
        if !seen.insert(r.crawler_name.as_str()) {
            return Err(GameMapError::DuplicateName(r.crawler_name.clone()));
        }
    }

    let target = expected_pages
        .unwrap_or_else(|| results.iter().map(|r| r.pages_archived).max().unwrap_or(0));
    let mut order: Vec<&PerformanceResults> = results.iter().collect();
    order.sort_by(|a, b| {
        let fa = a.pages_archived == target;
        let fb = b.pages_archived == target;
        match (fa, fb) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (true, true) => a.speedrun_seconds.total_cmp(&b.speedrun_seconds),
            (false, false) => b.pages_archived.cmp(&a.pages_archived),
        }
        .then_with(|| a.crawler_name.cmp(&b.crawler_name))
    });

    let n = order.len() as u32;
    Ok(order
        .into_iter()
        .zip(1..)
        .map(|(r, rank)| TierAssignment {
            crawler_name: r.crawler_name.clone(),
            rank,
            tier_label: tier_label(rank, n),
        })
        .collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn res(name: &str, secs: f64, pages: u64) -> PerformanceResults {
        PerformanceResults {
            crawler_name: name.into(),
            round: 1,
            pages_archived: pages,
            speedrun_seconds: secs,
            resources_404: 0,
            resources_other_4xx_5xx: 0,
            missing_by_type: Default::default(),
        }
    }

    fn names(r: &[TierAssignment]) -> Vec<&str> {
        r.iter().map(|t| t.crawler_name.as_str()).collect()
    }

    #[test]
    fn published_round_one() {
        let r = rank_crawlers(
            &[res("Browsertrix", 1312.0, 20), res("Brozzler", 1156.0, 20)],
            None,
        )
        .unwrap();
        assert_eq!(names(&r), vec!["Brozzler", "Browsertrix"]);
        assert_eq!((r[0].rank, r[0].tier_label.as_str()), (1, "fastest"));
        assert_eq!((r[1].rank, r[1].tier_label.as_str()), (2, "slowest"));
    }

    #[test]
    fn equal_times_fall_back_to_name() {
        let r = rank_crawlers(&[res("b", 5.0, 3), res("a", 5.0, 3)], None).unwrap();
        assert_eq!(names(&r), vec!["a", "b"]);
        assert_eq!(r.iter().map(|t| t.rank).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn unfinished_rank_last_by_pages() {
        let r = rank_crawlers(
            &[
                res("quick-quitter", 1.0, 2),
                res("slow", 90.0, 10),
                res("halfway", 2.0, 5),
            ],
            Some(10),
        )
        .unwrap();
        assert_eq!(names(&r), vec!["slow", "halfway", "quick-quitter"]);
        assert_eq!(r[1].tier_label, "rank-2");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            rank_crawlers(&[res("a", 1.0, 1)], None),
            Err(GameMapError::NotEnoughResults(1))
        ));
        assert!(matches!(
            rank_crawlers(&[res("a", 1.0, 1), res("a", 2.0, 1)], None),
            Err(GameMapError::DuplicateName(_))
        ));
        let mut other = res("b", 1.0, 1);
        other.round = 2;
        assert!(matches!(
            rank_crawlers(&[res("a", 1.0, 1), other], None),
            Err(GameMapError::MixedRounds(1, 2))
        ));
    }

    #[test]
    fn three_distinct_times_match_exhaustive_oracle() {
        // Oracle: of all 3! orderings, the ranking is the unique one in which
        // every adjacent pair is in non-decreasing time order.
        let input = [res("x", 30.5, 4), res("y", 12.25, 4), res("z", 19.0, 4)];
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let sorted: Vec<[usize; 3]> = perms
            .into_iter()
            .filter(|p| {
                p.windows(2)
                    .all(|w| input[w[0]].speedrun_seconds <= input[w[1]].speedrun_seconds)
            })
            .collect();
        assert_eq!(sorted.len(), 1);
        let expected: Vec<&str> = sorted[0]
            .iter()
            .map(|&i| input[i].crawler_name.as_str())
            .collect();
        let got = rank_crawlers(&input, None).unwrap();
        assert_eq!(names(&got), expected);
    }
}
