//! Fitting measured runtimes against the `a·nλln λ + b·n²` scaling shape.
//!
//! The model has two nonnegative coefficients, so exact nonnegative least
//! squares is cheap: solve the 2×2 normal equations, and if the
//! unconstrained optimum leaves the nonnegative quadrant, compare the
//! single-term boundary fits instead.

use std::fmt;

use serde::Serialize;

use crate::stats::CellSummary;

/// One measured cell: problem size, population size, and the runtime
/// statistic to fit (median evaluations).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingPoint {
    pub n: f64,
    pub lambda: f64,
    pub evaluations: f64,
}

/// Result of the scaling fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    /// Coefficient of the population term `n·λ·ln λ`.
    pub population_coefficient: f64,
    /// Coefficient of the quadratic term `n²`.
    pub quadratic_coefficient: f64,
    /// `‖prediction - observed‖₂ / ‖observed‖₂`.
    pub relative_residual: f64,
    pub points: usize,
}

impl ScalingFit {
    /// Model prediction at a given problem and population size.
    pub fn predict(&self, n: f64, lambda: f64) -> f64 {
        self.population_coefficient * population_term(n, lambda)
            + self.quadratic_coefficient * n * n
    }
}

fn population_term(n: f64, lambda: f64) -> f64 {
    n * lambda * lambda.ln()
}

/// Fits nonnegative coefficients `(a, b)` minimizing
/// `Σ (a·nλlnλ + b·n² - evaluations)²`. Needs at least three distinct
/// problem sizes so the two terms can be told apart.
pub fn fit_scaling(points: &[ScalingPoint]) -> Result<ScalingFit, FitError> {
    let mut distinct: Vec<f64> = Vec::new();
    for point in points {
        if !distinct.iter().any(|&n| n == point.n) {
            distinct.push(point.n);
        }
    }
    if distinct.len() < 3 {
        return Err(FitError::NotEnoughSizes {
            found: distinct.len(),
        });
    }

    let mut s11 = 0.0;
    let mut s12 = 0.0;
    let mut s22 = 0.0;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    let mut y_norm_sq = 0.0;
    for point in points {
        let f1 = population_term(point.n, point.lambda);
        let f2 = point.n * point.n;
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        b1 += f1 * point.evaluations;
        b2 += f2 * point.evaluations;
        y_norm_sq += point.evaluations * point.evaluations;
    }
    if s11 == 0.0 && s22 == 0.0 {
        return Err(FitError::DegenerateFeatures);
    }

    let sse = |a: f64, b: f64| {
        points
            .iter()
            .map(|p| {
                let predicted = a * population_term(p.n, p.lambda) + b * p.n * p.n;
                let residual = predicted - p.evaluations;
                residual * residual
            })
            .sum::<f64>()
    };

    let mut candidates: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    if s11 > 0.0 {
        candidates.push(((b1 / s11).max(0.0), 0.0));
    }
    if s22 > 0.0 {
        candidates.push((0.0, (b2 / s22).max(0.0)));
    }
    let determinant = s11 * s22 - s12 * s12;
    if determinant > 1e-12 * s11 * s22 {
        let a = (b1 * s22 - b2 * s12) / determinant;
        let b = (b2 * s11 - b1 * s12) / determinant;
        if a >= 0.0 && b >= 0.0 {
            candidates.push((a, b));
        }
    }

    let (a, b) = candidates
        .into_iter()
        .min_by(|x, y| sse(x.0, x.1).total_cmp(&sse(y.0, y.1)))
        .expect("candidate list is never empty");

    let relative_residual = if y_norm_sq > 0.0 {
        (sse(a, b) / y_norm_sq).sqrt()
    } else {
        0.0
    };
    Ok(ScalingFit {
        population_coefficient: a,
        quadratic_coefficient: b,
        relative_residual,
        points: points.len(),
    })
}

/// Builds fit input from cell summaries, one point per cell.
pub fn points_from_summaries(summaries: &[CellSummary]) -> Vec<ScalingPoint> {
    summaries
        .iter()
        .map(|cell| ScalingPoint {
            n: cell.n as f64,
            lambda: cell.lambda as f64,
            evaluations: cell.median_evaluations,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitError {
    NotEnoughSizes { found: usize },
    DegenerateFeatures,
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::NotEnoughSizes { found } => write!(
                f,
                "scaling fit needs at least 3 distinct problem sizes, got {found}"
            ),
            FitError::DegenerateFeatures => {
                write!(f, "both model terms vanish on every point; nothing to fit")
            }
        }
    }
}

impl std::error::Error for FitError {}
