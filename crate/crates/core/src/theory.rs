//! Closed-form bound calculators and the probabilistic utilities behind
//! them.
//!
//! The calculators cover: the level-based expected-runtime bound for
//! non-elitist populations, the population-size floor under which that bound
//! holds, its instantiation for the LeadingOnes/BinVal level structure, the
//! Dvoretzky-Kiefer-Wolfowitz (DKW) tail bound on empirical distribution
//! functions, and the selective-pressure constraint linking the selection
//! ratio to the learning rate. The supporting utilities - majorization,
//! border smoothing, Poisson-binomial PMFs, AM-GM means, and the
//! border-margin function - are exactly the quantities the randomized
//! suites in [`crate::verify`] exercise.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Slack allowed on each prefix-sum comparison in [`majorises`]; absorbs
/// accumulation error on long vectors.
pub const MAJORISATION_PREFIX_SLACK: f64 = 1e-12;

/// Tolerance on the total-mass equality check in [`majorises`].
pub const MAJORISATION_TOTAL_TOL: f64 = 1e-9;

/// Guard subtracted before taking a ceiling, so values a hair above an
/// integer (float noise on an analytically integral quantity) do not round
/// up an extra step.
pub const CEIL_GUARD: f64 = 1e-12;

/// Parameters shared by the level-based calculators.
///
/// `upgrade_probs[j]` is the probability floor of upgrading past level
/// `j + 1` (1-based levels `1..m-1`); the number of levels is
/// `upgrade_probs.len() + 1`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoryParams {
    delta: f64,
    epsilon: f64,
    gamma0: f64,
    eta: f64,
    upgrade_probs: Vec<f64>,
}

impl TheoryParams {
    pub fn new(
        delta: f64,
        epsilon: f64,
        gamma0: f64,
        eta: f64,
        upgrade_probs: Vec<f64>,
    ) -> Result<Self, TheoryError> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(TheoryError::InvalidDelta { delta });
        }
        if !(epsilon > 0.0) {
            return Err(TheoryError::InvalidEpsilon { epsilon });
        }
        if !(gamma0 > 0.0 && gamma0 < 1.0) {
            return Err(TheoryError::InvalidSelectionRatio { gamma0 });
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(TheoryError::InvalidLearningRate { eta });
        }
        if upgrade_probs.is_empty() {
            return Err(TheoryError::NoLevels);
        }
        for (index, &value) in upgrade_probs.iter().enumerate() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(TheoryError::InvalidUpgradeProbability { index, value });
            }
        }
        Ok(TheoryParams {
            delta,
            epsilon,
            gamma0,
            eta,
            upgrade_probs,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn upgrade_probs(&self) -> &[f64] {
        &self.upgrade_probs
    }

    /// Number of levels `m` (one more than the number of upgrades).
    pub fn levels(&self) -> usize {
        self.upgrade_probs.len() + 1
    }

    /// Smallest upgrade probability; strictly positive by construction.
    pub fn min_upgrade_prob(&self) -> f64 {
        self.upgrade_probs
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Expected-evaluations upper bound of the level-based method:
/// `(8/δ²) · Σ_j [ λ·ln(6δλ / (4 + z_j·δ·λ)) + 1/z_j ]`.
///
/// Valid when `lambda` meets [`min_population_size`]; the formula itself is
/// evaluated for any `lambda ≥ 1`.
pub fn level_based_bound(params: &TheoryParams, lambda: u64) -> f64 {
    assert!(lambda >= 1, "population size must be at least 1");
    let d = params.delta();
    let lam = lambda as f64;
    let mut acc = KahanSum::new();
    for &z in params.upgrade_probs() {
        acc.add(lam * (6.0 * d * lam / (4.0 + z * d * lam)).ln() + 1.0 / z);
    }
    (8.0 / (d * d)) * acc.total()
}

/// Population size above which the level-based bound applies:
/// `(4 / (γ₀·δ²)) · ln(128·m / (z*·δ²))`.
pub fn min_population_size(params: &TheoryParams) -> f64 {
    let d = params.delta();
    let m = params.levels() as f64;
    let z_star = params.min_upgrade_prob();
    (4.0 / (params.gamma0() * d * d)) * (128.0 * m / (z_star * d * d)).ln()
}

/// Level-based runtime bound instantiated for the LeadingOnes/BinVal level
/// structure: `m = n + 1` levels, every upgrade probability
/// `γ₀ / ((1 + ε)·n)`. Grows as `O(n·λ·ln λ + n²)`.
pub fn expected_runtime_bound(
    n: usize,
    lambda: u64,
    gamma0: f64,
    epsilon: f64,
    delta: f64,
) -> Result<f64, TheoryError> {
    if n == 0 {
        return Err(TheoryError::NoLevels);
    }
    if !(epsilon > 0.0) {
        return Err(TheoryError::InvalidEpsilon { epsilon });
    }
    let z = gamma0 / ((1.0 + epsilon) * n as f64);
    let params = TheoryParams::new(delta, epsilon, gamma0, 1.0, vec![z; n])?;
    Ok(level_based_bound(&params, lambda))
}

/// DKW bound on the sup-deviation of an empirical distribution function
/// from its source after `lambda` samples: `Pr(sup > ε) ≤ 2·e^(-2λε²)`.
/// Vacuous (above 1) for small `lambda·ε²`.
pub fn dkw_bound(lambda: u64, epsilon: f64) -> f64 {
    let lam = lambda as f64;
    2.0 * (-2.0 * lam * epsilon * epsilon).exp()
}

/// Asymptotic cap on the number of leading positions an equal-sum
/// dominating vector can hold strictly below the upper border:
/// `ln(p0) / (p0 - 1)`, for `p0` in (0, 1). Always above 1, growing like
/// `ln(1/p0)` as `p0` shrinks.
pub fn border_deficit(p0: f64) -> Result<f64, TheoryError> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(TheoryError::InvalidProbability { p0 });
    }
    Ok(p0.ln() / (p0 - 1.0))
}

/// `⌈x⌉` computed with [`CEIL_GUARD`] slack below `x`.
pub fn ceil_with_guard(x: f64) -> i64 {
    (x - CEIL_GUARD).ceil() as i64
}

/// Normalized shortfall when `j` leading marginals with product at least
/// `p0` are pushed toward the upper border:
/// `j·(p0^(1/j) - 1) / (1 - p0)`. Decreases with `j` and approaches
/// `-border_deficit(p0)` from above.
pub fn border_margin(p0: f64, j: f64) -> Result<f64, TheoryError> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(TheoryError::InvalidProbability { p0 });
    }
    if !(j >= 1.0) {
        return Err(TheoryError::InvalidLevelIndex { j });
    }
    // p0^(1/j) - 1 via exp_m1 to avoid cancellation at large j.
    Ok(j * (p0.ln() / j).exp_m1() / (1.0 - p0))
}

/// How many of `j` leading positions an equal-sum dominating vector can
/// place at the upper border `1 - 1/n`, given their current sum:
/// `⌊(marginal_sum - j·p0) / (1 - 1/n - p0)⌋`.
///
/// Diagnostic companion to [`border_margin`]: when the `j` marginals have
/// product at least `p0`, the capacity is at least
/// `j - ceil_with_guard(border_deficit(p0))`.
pub fn upper_border_capacity(
    marginal_sum: f64,
    j: usize,
    n: usize,
    p0: f64,
) -> Result<f64, TheoryError> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(TheoryError::InvalidProbability { p0 });
    }
    let gap = 1.0 - 1.0 / n as f64 - p0;
    if !(gap > 0.0) {
        return Err(TheoryError::BorderGapNotPositive { n, p0 });
    }
    Ok(((marginal_sum - j as f64 * p0) / gap).floor())
}

/// Outcome of the selective-pressure check: whether the selection ratio is
/// small enough, relative to the learning rate, for the runtime guarantee
/// to apply.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConstraintReport {
    pub gamma0: f64,
    pub eta: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// `γ₀ / (1 + ε)`.
    pub p0: f64,
    /// `ln(p0) / (p0 - 1)`.
    pub border_deficit: f64,
    /// `⌈border_deficit⌉`, guard-rounded.
    pub ceil_border_deficit: i64,
    /// Largest admissible selection ratio: `η^(⌈deficit⌉+1) / ((1+δ)·e)`.
    pub max_selection_ratio: f64,
    pub satisfied: bool,
}

/// Checks `γ₀ ≤ η^(⌈ξ⌉+1) / ((1+δ)·e)` where `ξ = border_deficit(γ₀/(1+ε))`.
pub fn check_selective_pressure(
    gamma0: f64,
    eta: f64,
    delta: f64,
    epsilon: f64,
) -> Result<ConstraintReport, TheoryError> {
    if !(gamma0 > 0.0 && gamma0 < 1.0) {
        return Err(TheoryError::InvalidSelectionRatio { gamma0 });
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(TheoryError::InvalidLearningRate { eta });
    }
    if !(delta > 0.0) {
        return Err(TheoryError::InvalidDelta { delta });
    }
    if !(epsilon > 0.0) {
        return Err(TheoryError::InvalidEpsilon { epsilon });
    }
    let p0 = gamma0 / (1.0 + epsilon);
    let deficit = border_deficit(p0)?;
    let ceil_deficit = ceil_with_guard(deficit);
    let exponent = ceil_deficit + 1;
    let max_ratio = eta.powi(exponent as i32) / ((1.0 + delta) * core::f64::consts::E);
    Ok(ConstraintReport {
        gamma0,
        eta,
        delta,
        epsilon,
        p0,
        border_deficit: deficit,
        ceil_border_deficit: ceil_deficit,
        max_selection_ratio: max_ratio,
        satisfied: gamma0 <= max_ratio,
    })
}

/// Largest selection ratio satisfying [`check_selective_pressure`] for the
/// given learning rate.
///
/// The feasible set is a union of intervals (the admissible cap jumps up
/// whenever the deficit ceiling drops), so instead of bisecting we scan the
/// candidate caps: for each exponent `K`, the cap is
/// `η^(K+1) / ((1+δ)·e)`, and it is self-consistent exactly when the
/// deficit ceiling at that ratio stays at most `K`. Errors when no exponent
/// works (for `η` below roughly `1/e` the constraint is unsatisfiable).
pub fn max_feasible_selection_ratio(
    eta: f64,
    delta: f64,
    epsilon: f64,
) -> Result<f64, TheoryError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(TheoryError::InvalidLearningRate { eta });
    }
    if !(delta > 0.0) {
        return Err(TheoryError::InvalidDelta { delta });
    }
    if !(epsilon > 0.0) {
        return Err(TheoryError::InvalidEpsilon { epsilon });
    }
    let mut best: Option<f64> = None;
    for exponent in 1..=4096i32 {
        let cap = eta.powi(exponent + 1) / ((1.0 + delta) * core::f64::consts::E);
        if !(cap > 0.0 && cap < 1.0) {
            continue;
        }
        let deficit = border_deficit(cap / (1.0 + epsilon))?;
        if ceil_with_guard(deficit) <= exponent as i64
            && best.is_none_or(|b| cap > b)
        {
            best = Some(cap);
        }
    }
    best.ok_or(TheoryError::NoFeasibleRatio { eta, delta, epsilon })
}

/// True iff `p` majorises `q`: equal totals (within
/// [`MAJORISATION_TOTAL_TOL`]) and every descending-sorted prefix sum of `p`
/// at least that of `q` (within [`MAJORISATION_PREFIX_SLACK`]).
pub fn majorises(p: &[f64], q: &[f64]) -> Result<bool, TheoryError> {
    if p.len() != q.len() {
        return Err(TheoryError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut ps = p.to_vec();
    let mut qs = q.to_vec();
    ps.sort_by(|a, b| b.total_cmp(a));
    qs.sort_by(|a, b| b.total_cmp(a));
    let mut sum_p = KahanSum::new();
    let mut sum_q = KahanSum::new();
    for (&a, &b) in ps.iter().zip(&qs) {
        sum_p.add(a);
        sum_q.add(b);
        if sum_p.total() < sum_q.total() - MAJORISATION_PREFIX_SLACK {
            return Ok(false);
        }
    }
    Ok((sum_p.total() - sum_q.total()).abs() <= MAJORISATION_TOTAL_TOL)
}

/// The margin-update map with an all-ones selection:
/// `z_i = (1 - eta)·p_i + eta`. Majorization between vectors survives this
/// map, which is what keeps dominance arguments valid across generations.
pub fn apply_smoothing(p: &[f64], eta: f64) -> Vec<f64> {
    p.iter().map(|&pi| (1.0 - eta) * pi + eta).collect()
}

/// Exact PMF of the number of successes among independent Bernoulli trials
/// with probabilities `p`, by the O(n²) convolution recurrence. Entry `k`
/// is `Pr(S = k)`; the vector has `p.len() + 1` entries summing to 1.
pub fn poisson_binomial_pmf(p: &[f64]) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for &pi in p {
        pmf.push(0.0);
        for k in (1..pmf.len()).rev() {
            pmf[k] = pmf[k] * (1.0 - pi) + pmf[k - 1] * pi;
        }
        pmf[0] *= 1.0 - pi;
    }
    pmf
}

/// Arithmetic and geometric means of a non-empty list of non-negative
/// reals. The geometric mean is computed in log space (zero entries short-
/// circuit to 0), so long vectors neither overflow nor underflow.
pub fn am_gm_means(x: &[f64]) -> (f64, f64) {
    assert!(!x.is_empty(), "means of an empty list are undefined");
    let n = x.len() as f64;
    let am = kahan_sum(x) / n;
    if x.iter().any(|&v| v == 0.0) {
        return (am, 0.0);
    }
    let mut log_acc = KahanSum::new();
    for &v in x {
        log_acc.add(v.ln());
    }
    (am, (log_acc.total() / n).exp())
}

/// Compensated (Kahan) summation.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.total()
}

/// Streaming compensated accumulator (the Neumaier variant, which keeps
/// the correction even when an addend cancels the running sum).
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TheoryError {
    InvalidDelta { delta: f64 },
    InvalidEpsilon { epsilon: f64 },
    InvalidSelectionRatio { gamma0: f64 },
    InvalidLearningRate { eta: f64 },
    InvalidProbability { p0: f64 },
    InvalidLevelIndex { j: f64 },
    InvalidUpgradeProbability { index: usize, value: f64 },
    NoLevels,
    LengthMismatch { left: usize, right: usize },
    BorderGapNotPositive { n: usize, p0: f64 },
    NoFeasibleRatio { eta: f64, delta: f64, epsilon: f64 },
}

impl fmt::Display for TheoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoryError::InvalidDelta { delta } => {
                write!(f, "delta must be in (0, 1], got {delta}")
            }
            TheoryError::InvalidEpsilon { epsilon } => {
                write!(f, "epsilon must be positive, got {epsilon}")
            }
            TheoryError::InvalidSelectionRatio { gamma0 } => {
                write!(f, "selection ratio must be in (0, 1), got {gamma0}")
            }
            TheoryError::InvalidLearningRate { eta } => {
                write!(f, "learning rate must be in (0, 1], got {eta}")
            }
            TheoryError::InvalidProbability { p0 } => {
                write!(f, "probability must be in (0, 1), got {p0}")
            }
            TheoryError::InvalidLevelIndex { j } => {
                write!(f, "level index must be at least 1, got {j}")
            }
            TheoryError::InvalidUpgradeProbability { index, value } => write!(
                f,
                "upgrade probability {value} at level {index} must be in (0, 1]"
            ),
            TheoryError::NoLevels => write!(f, "at least one upgrade probability is required"),
            TheoryError::LengthMismatch { left, right } => {
                write!(f, "vectors have mismatched lengths {left} and {right}")
            }
            TheoryError::BorderGapNotPositive { n, p0 } => write!(
                f,
                "upper border 1 - 1/{n} does not exceed p0 = {p0}; capacity undefined"
            ),
            TheoryError::NoFeasibleRatio { eta, delta, epsilon } => write!(
                f,
                "no selection ratio satisfies the constraint at eta={eta}, delta={delta}, epsilon={epsilon}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TheoryError {}
