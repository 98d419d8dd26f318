//! Per-cell summaries of sweep records.

use pbil_core::Problem;
use serde::Serialize;

use crate::sweep::TrialRecord;

/// Aggregate over all trials that share a parameter cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub problem: Problem,
    pub n: usize,
    pub lambda: usize,
    pub mu: usize,
    pub eta: f64,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Trials that hit the budget; their evaluation counts understate the
    /// true runtime, so quantiles of a cell with censoring are lower
    /// bounds.
    pub censored: u64,
    pub median_evaluations: f64,
    pub q25_evaluations: f64,
    pub q75_evaluations: f64,
}

/// Groups records into cells (in first-appearance order) and summarizes
/// each. Quantiles are type R-7: linear interpolation between order
/// statistics, the default of most statistics environments.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    #[derive(PartialEq)]
    struct Key {
        problem: Problem,
        n: usize,
        lambda: usize,
        mu: usize,
        eta_bits: u64,
    }

    let mut keys: Vec<Key> = Vec::new();
    let mut groups: Vec<Vec<&TrialRecord>> = Vec::new();
    for record in records {
        let key = Key {
            problem: record.problem,
            n: record.n,
            lambda: record.lambda,
            mu: record.mu,
            eta_bits: record.eta.to_bits(),
        };
        match keys.iter().position(|k| *k == key) {
            Some(index) => groups[index].push(record),
            None => {
                keys.push(key);
                groups.push(vec![record]);
            }
        }
    }

    groups
        .iter()
        .map(|group| {
            let first = group[0];
            let trials = group.len() as u64;
            let successes = group.iter().filter(|r| r.success).count() as u64;
            let censored = group.iter().filter(|r| r.censored).count() as u64;
            let mut evaluations: Vec<f64> =
                group.iter().map(|r| r.evaluations as f64).collect();
            evaluations.sort_by(f64::total_cmp);
            CellSummary {
                problem: first.problem,
                n: first.n,
                lambda: first.lambda,
                mu: first.mu,
                eta: first.eta,
                trials,
                successes,
                success_rate: successes as f64 / trials as f64,
                censored,
                median_evaluations: quantile_r7(&evaluations, 0.5),
                q25_evaluations: quantile_r7(&evaluations, 0.25),
                q75_evaluations: quantile_r7(&evaluations, 0.75),
            }
        })
        .collect()
}

/// R-7 quantile of an ascending-sorted non-empty slice.
pub fn quantile_r7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty slice is undefined");
    assert!((0.0..=1.0).contains(&p), "quantile level must be in [0, 1]");
    let position = (sorted.len() - 1) as f64 * p;
    let below = position.floor() as usize;
    let above = (below + 1).min(sorted.len() - 1);
    let fraction = position - below as f64;
    sorted[below] + fraction * (sorted[above] - sorted[below])
}
