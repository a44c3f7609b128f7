//! Exhaustive or sampled iteration over vertex pairs, grouped by source
//! vertex so each source needs one shortest-path pass.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::VertexId;
use crate::rng;

/// Graphs up to this size are verified exhaustively under [`PairSelection::Auto`].
pub const AUTO_EXHAUSTIVE_LIMIT: usize = 2000;
/// Pair budget used by [`PairSelection::Auto`] above the exhaustive limit.
pub const AUTO_SAMPLE_BUDGET: usize = 10_000;

const SAMPLE_BATCH: usize = 32;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum PairSelection {
    #[default]
    Auto,
    All,
    /// Visit sources in a seeded random order until at least `budget`
    /// qualifying pairs have been checked.
    Sample { budget: usize },
}

impl PairSelection {
    /// Resolves `Auto` against the graph size.
    pub fn resolve(self, n: usize) -> PairSelection {
        match self {
            PairSelection::Auto if n <= AUTO_EXHAUSTIVE_LIMIT => PairSelection::All,
            PairSelection::Auto => PairSelection::Sample {
                budget: AUTO_SAMPLE_BUDGET,
            },
            other => other,
        }
    }
}

impl fmt::Display for PairSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSelection::Auto => write!(f, "auto"),
            PairSelection::All => write!(f, "all"),
            PairSelection::Sample { budget } => write!(f, "sample:{budget}"),
        }
    }
}

impl FromStr for PairSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(PairSelection::Auto),
            "all" => Ok(PairSelection::All),
            _ => {
                let budget = s
                    .strip_prefix("sample:")
                    .and_then(|b| b.parse::<usize>().ok())
                    .filter(|&b| b > 0)
                    .ok_or_else(|| format!("expected all, auto or sample:N, got {s:?}"))?;
                Ok(PairSelection::Sample { budget })
            }
        }
    }
}

/// Per-source result that knows how many pairs it covered.
pub(crate) trait PairCount {
    fn pair_count(&self) -> usize;
}

/// Runs `per_source` over the sources chosen by `selection` and returns the
/// results in a deterministic order.
pub(crate) fn for_each_source<S, F>(n: usize, selection: PairSelection, seed: u64, per_source: F) -> Vec<S>
where
    S: Send + PairCount,
    F: Fn(VertexId) -> S + Sync,
{
    match selection.resolve(n) {
        PairSelection::Sample { budget } => {
            let mut order: Vec<VertexId> = (0..n).collect();
            order.shuffle(&mut rng::substream(seed, "pair-sample", 0));
            let mut out = Vec::new();
            let mut covered = 0;
            for batch in order.chunks(SAMPLE_BATCH) {
                if covered >= budget {
                    break;
                }
                let results: Vec<S> = batch.par_iter().map(|&s| per_source(s)).collect();
                covered += results.iter().map(PairCount::pair_count).sum::<usize>();
                out.extend(results);
            }
            out
        }
        _ => (0..n).into_par_iter().map(&per_source).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Hit(usize);
    impl PairCount for Hit {
        fn pair_count(&self) -> usize {
            self.0
        }
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["auto", "all", "sample:1000"] {
            assert_eq!(s.parse::<PairSelection>().unwrap().to_string(), s);
        }
        assert!("sample:0".parse::<PairSelection>().is_err());
        assert!("some".parse::<PairSelection>().is_err());
    }

    #[test]
    fn auto_resolution() {
        assert_eq!(PairSelection::Auto.resolve(10), PairSelection::All);
        assert_eq!(
            PairSelection::Auto.resolve(AUTO_EXHAUSTIVE_LIMIT + 1),
            PairSelection::Sample {
                budget: AUTO_SAMPLE_BUDGET
            }
        );
    }

    #[test]
    fn sampling_stops_after_budget_and_is_deterministic() {
        let run = || for_each_source(1000, PairSelection::Sample { budget: 100 }, 3, |_| Hit(1));
        let a = run();
        assert_eq!(a.len(), 128);
        assert_eq!(a.len(), run().len());
        let all = for_each_source(50, PairSelection::All, 3, |s| Hit(s));
        assert_eq!(all.iter().map(|h| h.0).collect::<Vec<_>>(), (0..50).collect::<Vec<_>>());
    }
}
