use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of `runs.jsonl`. Holds only seed-determined fields so repeated
/// experiments produce identical files; timings go to `timings.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub success: bool,
    pub success_generation: Option<usize>,
    pub best_q: f64,
    pub mean_tree_nodes: f64,
    /// Q of the archive rebuilt over raw inputs (ledger runs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstructed_q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub run: usize,
    pub seed: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub success_count: usize,
    pub runs: usize,
    pub success_rate: f64,
    /// Over successful runs only.
    pub mean_success_generation: Option<f64>,
    /// Lower-middle element for even counts.
    pub median_success_generation: Option<usize>,
    pub mean_best_q: f64,
    pub mean_tree_nodes: f64,
    pub wall_time: Duration,
}

/// Aggregates per-run records. `wall_time` is left at zero for the caller.
pub fn summarize(records: &[RunRecord]) -> Result<ExperimentSummary> {
    if records.is_empty() {
        return Err(Error::usage("cannot summarize zero runs"));
    }
    let runs = records.len();
    let mut gens: Vec<usize> = records.iter().filter_map(|r| r.success_generation).collect();
    gens.sort_unstable();
    let success_count = records.iter().filter(|r| r.success).count();
    let mean = |xs: &mut dyn Iterator<Item = f64>| xs.sum::<f64>() / runs as f64;
    Ok(ExperimentSummary {
        success_count,
        runs,
        success_rate: success_count as f64 / runs as f64,
        mean_success_generation: (!gens.is_empty())
            .then(|| gens.iter().sum::<usize>() as f64 / gens.len() as f64),
        median_success_generation: (!gens.is_empty()).then(|| gens[(gens.len() - 1) / 2]),
        mean_best_q: mean(&mut records.iter().map(|r| r.best_q)),
        mean_tree_nodes: mean(&mut records.iter().map(|r| r.mean_tree_nodes)),
        wall_time: Duration::ZERO,
    })
}

pub const SUMMARY_HEADER: &str = "problem,algo,pop,gens,runs,seed,success_rate,mean_success_gen,mean_best_q,elapsed_s";

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(success_generation: Option<usize>, best_q: f64) -> RunRecord {
        RunRecord {
            run: 0,
            seed: 0,
            success: success_generation.is_some(),
            success_generation,
            best_q,
            mean_tree_nodes: 10.0,
            reconstructed_q: None,
        }
    }

    #[test]
    fn rate_is_exact() {
        let records: Vec<_> = (0..100).map(|i| if i < 93 { rec(Some(i), 0.0) } else { rec(None, 2.0) }).collect();
        let s = summarize(&records).unwrap();
        assert_eq!(s.success_count, 93);
        assert_eq!(s.success_rate, 0.93);
        assert_eq!(s.mean_best_q, 0.14);
    }

    #[test]
    fn no_successes() {
        let s = summarize(&[rec(None, 1.0), rec(None, 3.0)]).unwrap();
        assert_eq!(s.success_rate, 0.0);
        assert_eq!(s.mean_success_generation, None);
        assert_eq!(s.median_success_generation, None);
        assert_eq!(s.mean_best_q, 2.0);
    }

    #[test]
    fn single_success_and_lower_median() {
        let s = summarize(&[rec(Some(7), 0.0)]).unwrap();
        assert_eq!(s.mean_success_generation, Some(7.0));
        assert_eq!(s.median_success_generation, Some(7));
        let s = summarize(&[rec(Some(9), 0.0), rec(Some(3), 0.0), rec(Some(5), 0.0), rec(Some(20), 0.0)]).unwrap();
        assert_eq!(s.median_success_generation, Some(5));
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(summarize(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn record_json_shape() {
        let line = serde_json::to_string(&rec(Some(4), 0.0)).unwrap();
        assert_eq!(
            line,
            r#"{"run":0,"seed":0,"success":true,"success_generation":4,"best_q":0.0,"mean_tree_nodes":10.0}"#
        );
    }
}
