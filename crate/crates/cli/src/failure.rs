//! Direct measurement of how often marginals sag below the threshold the
//! runtime analysis needs.
//!
//! The level-based argument requires the marginals left of the current
//! selection floor to stay at or above `γ₀ / (1 + ε)`, where `γ₀` is the
//! selection ratio. The probe steps a run generation by generation,
//! inspecting the model *before* each sampling step, and counts how many
//! of those already-secured positions dip below the threshold. The
//! analysis guarantees a vanishing rate once
//! `λ ≥ c · ((1 + 1/ε)/γ₀)² · ln n`; the report includes the `c` the
//! probed configuration corresponds to, so rates can be read in context.

use std::fmt;

use pbil_core::{AlgorithmError, PbilConfig, PbilRun, Problem};
use serde::Serialize;

/// Outcome of one probe run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureReport {
    /// `γ₀ / (1 + ε)`: the marginal floor being monitored.
    pub threshold: f64,
    /// Position-generation pairs inspected (positions left of the
    /// selection floor, summed over generations).
    pub inspected: u64,
    /// Inspected pairs whose marginal sat below the threshold.
    pub violations: u64,
    /// `violations / inspected`; 0 when nothing was inspected.
    pub rate: f64,
    /// `λ / (((1 + 1/ε)/γ₀)² · ln n)`: how large the population is
    /// relative to the scale the guarantee asks for.
    pub implied_constant: f64,
    pub generations_run: u64,
    /// Whether the run reached the optimum within its budget.
    pub reached_optimum: bool,
}

/// Steps a fresh run under `config`, counting threshold violations among
/// marginals left of each generation's selection floor.
pub fn marginal_failure_rate(
    config: PbilConfig,
    problem: Problem,
    epsilon: f64,
) -> Result<FailureReport, FailureError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(FailureError::InvalidEpsilon { epsilon });
    }
    let gamma0 = config.selection_ratio();
    let threshold = gamma0 / (1.0 + epsilon);
    let implied_constant = config.lambda as f64
        / (((1.0 + 1.0 / epsilon) / gamma0).powi(2) * (config.n as f64).ln());

    let budget = config.max_generations;
    let mut run = PbilRun::new(config, problem)?;
    let mut inspected = 0u64;
    let mut violations = 0u64;
    let mut reached_optimum = false;
    while run.generation() < budget {
        let probs_before = run.model().probs().to_vec();
        let report = run.advance()?;
        inspected += report.selection_floor_level as u64;
        violations += probs_before[..report.selection_floor_level]
            .iter()
            .filter(|&&p| p < threshold)
            .count() as u64;
        if report.optimum_found {
            reached_optimum = true;
            break;
        }
    }

    Ok(FailureReport {
        threshold,
        inspected,
        violations,
        rate: if inspected == 0 {
            0.0
        } else {
            violations as f64 / inspected as f64
        },
        implied_constant,
        generations_run: run.generation(),
        reached_optimum,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum FailureError {
    InvalidEpsilon { epsilon: f64 },
    Run(String),
}

impl From<AlgorithmError> for FailureError {
    fn from(err: AlgorithmError) -> Self {
        FailureError::Run(err.to_string())
    }
}

impl fmt::Display for FailureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureError::InvalidEpsilon { epsilon } => {
                write!(f, "epsilon must be positive and finite, got {epsilon}")
            }
            FailureError::Run(detail) => f.write_str(detail),
        }
    }
}

impl std::error::Error for FailureError {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_sized_populations_rarely_violate_the_threshold() {
        // lambda = 60 at n = 24 sits comfortably above the guarantee scale
        // for gamma0 = 0.25, epsilon = 1.
        let config = PbilConfig::with_budget(24, 60, 15, 1.0, 7, 20_000).unwrap();
        let report = marginal_failure_rate(config, Problem::LeadingOnes, 1.0).unwrap();
        assert!(report.reached_optimum);
        assert!(report.inspected > 0);
        assert!(
            report.rate < 0.05,
            "violation rate {} unexpectedly high",
            report.rate
        );
        assert_eq!(report.threshold, 0.125);
    }

    #[test]
    fn implied_constant_matches_the_formula() {
        let config = PbilConfig::with_budget(32, 100, 25, 1.0, 1, 10).unwrap();
        let report = marginal_failure_rate(config, Problem::LeadingOnes, 0.5).unwrap();
        let expected = 100.0 / (((1.0 + 2.0) / 0.25f64).powi(2) * 32f64.ln());
        assert!((report.implied_constant - expected).abs() < 1e-12);
    }

    #[test]
    fn bad_epsilon_is_rejected() {
        let config = PbilConfig::new(8, 10, 3, 1.0, 0).unwrap();
        assert!(matches!(
            marginal_failure_rate(config.clone(), Problem::BinVal, 0.0),
            Err(FailureError::InvalidEpsilon { .. })
        ));
        assert!(matches!(
            marginal_failure_rate(config, Problem::BinVal, f64::INFINITY),
            Err(FailureError::InvalidEpsilon { .. })
        ));
    }

    #[test]
    fn probe_is_deterministic() {
        let config = PbilConfig::with_budget(16, 30, 8, 0.5, 99, 5_000).unwrap();
        let a = marginal_failure_rate(config.clone(), Problem::LeadingOnes, 0.5).unwrap();
        let b = marginal_failure_rate(config, Problem::LeadingOnes, 0.5).unwrap();
        assert_eq!(a, b);
    }
}
