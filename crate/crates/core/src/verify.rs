//! Randomized check suites for the probabilistic facts the bound
//! calculators rest on.
//!
//! Each suite hammers one lemma with seeded random instances and reports
//! how many cases were checked, how many failed, and the first
//! counterexample found. The suites are deterministic given
//! [`SuiteConfig::seed`], so a reported counterexample can always be
//! replayed.
//!
//! The five suites:
//!
//! * **all-ones-ordering** - transferring probability mass from a smaller
//!   marginal to a larger one (which makes the vector majorise the
//!   original) can only lower the probability of sampling the all-ones
//!   string, whether that probability is computed as a plain product or
//!   through the Poisson-binomial PMF;
//! * **smoothing** - the margin-update map `p ↦ (1-η)p + η` preserves
//!   majorization between vectors;
//! * **dkw** - empirical exceedance frequencies of the sup-deviation of an
//!   ECDF stay below the `2e^(-2λε²)` tail bound;
//! * **am-gm** - the geometric mean never exceeds the arithmetic mean;
//! * **border-asymptote** - the border-margin curve stays above the
//!   negated border deficit and converges to it.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::seed::{derive_seed, rng_from_seed};
use crate::theory::{
    am_gm_means, apply_smoothing, border_deficit, border_margin, dkw_bound, majorises,
    poisson_binomial_pmf,
};

/// How hard to push each suite, and from which seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    /// Random cases per suite (trials per grid cell for the DKW suite,
    /// curve resolution for the asymptote suite).
    pub iterations: u64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            iterations: 10_000,
            seed: 0,
        }
    }
}

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    pub first_counterexample: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record_failure(&mut self, detail: String) {
        self.failures += 1;
        if self.first_counterexample.is_none() {
            self.first_counterexample = Some(detail);
        }
    }
}

/// Absolute tolerance when comparing two PMF entries.
const PMF_ORDER_TOL: f64 = 1e-12;

/// Tolerance between a PMF's all-ones entry and the directly computed
/// product; tight enough to expose a deliberately corrupted PMF routine.
const PMF_PRODUCT_TOL: f64 = 1e-9;

/// Draws a marginal vector and a copy pushed toward the extremes by `k`
/// small transfers from lower entries to higher ones. The pushed copy
/// majorises the original by construction.
fn random_transfer_pair<R: Rng>(rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let n = rng.gen_range(2..=40usize);
    let base: Vec<f64> = (0..n).map(|_| rng.gen_range(0.02..0.98)).collect();
    let mut pushed = base.clone();
    let transfers = rng.gen_range(1..=5usize);
    for _ in 0..transfers {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        // Give to the larger entry, take from the smaller.
        let (hi, lo) = if pushed[a] >= pushed[b] { (a, b) } else { (b, a) };
        let room = (1.0 - 0.001 - pushed[hi]).min(pushed[lo] - 0.001);
        if room <= 0.0 {
            continue;
        }
        let amount = rng.gen_range(0.0..room);
        pushed[hi] += amount;
        pushed[lo] -= amount;
    }
    (pushed, base)
}

/// Checks that pushing mass toward extreme marginals lowers the all-ones
/// probability. Uses the default Poisson-binomial routine.
pub fn all_ones_ordering_suite(cfg: &SuiteConfig) -> SuiteReport {
    all_ones_ordering_suite_with(cfg, poisson_binomial_pmf)
}

/// [`all_ones_ordering_suite`] with a caller-supplied PMF routine, so a
/// deliberately faulty routine can be shown to trip the suite.
pub fn all_ones_ordering_suite_with(
    cfg: &SuiteConfig,
    pmf: impl Fn(&[f64]) -> Vec<f64>,
) -> SuiteReport {
    let mut report = SuiteReport {
        name: "all-ones-ordering",
        cases: 0,
        failures: 0,
        first_counterexample: None,
    };
    let mut rng = rng_from_seed(cfg.seed);
    for case in 0..cfg.iterations {
        report.cases += 1;
        let (pushed, base) = random_transfer_pair(&mut rng);
        let n = base.len();

        if !majorises(&pushed, &base).unwrap_or(false) {
            report.record_failure(format!(
                "case {case}: transfer pair fails the majorization predicate; pushed={pushed:?}, base={base:?}"
            ));
            continue;
        }

        let product_pushed: f64 = pushed.iter().product();
        let product_base: f64 = base.iter().product();
        if product_pushed > product_base * (1.0 + 1e-12) {
            report.record_failure(format!(
                "case {case}: all-ones product rose under the majorising vector: {product_pushed} > {product_base}"
            ));
            continue;
        }

        let pmf_pushed = pmf(&pushed);
        let pmf_base = pmf(&base);
        if pmf_pushed[n] > pmf_base[n] + PMF_ORDER_TOL {
            report.record_failure(format!(
                "case {case}: PMF all-ones entry rose under the majorising vector: {} > {}",
                pmf_pushed[n], pmf_base[n]
            ));
            continue;
        }

        let drift_pushed = (pmf_pushed[n] - product_pushed).abs();
        let drift_base = (pmf_base[n] - product_base).abs();
        if drift_pushed > PMF_PRODUCT_TOL || drift_base > PMF_PRODUCT_TOL {
            report.record_failure(format!(
                "case {case}: PMF all-ones entry disagrees with the direct product by {:.3e} (pushed) / {:.3e} (base)",
                drift_pushed, drift_base
            ));
        }
    }
    report
}

/// Checks that the margin-update map preserves majorization across a grid
/// of learning rates.
pub fn smoothing_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut report = SuiteReport {
        name: "smoothing",
        cases: 0,
        failures: 0,
        first_counterexample: None,
    };
    let rates = [0.1, 0.3, 0.5, 0.7, 0.9, 1.0];
    let mut rng = rng_from_seed(cfg.seed);
    for case in 0..cfg.iterations {
        let (pushed, base) = random_transfer_pair(&mut rng);
        let eta = rates[case as usize % rates.len()];
        report.cases += 1;
        let smoothed_pushed = apply_smoothing(&pushed, eta);
        let smoothed_base = apply_smoothing(&base, eta);
        if !majorises(&smoothed_pushed, &smoothed_base).unwrap_or(false) {
            report.record_failure(format!(
                "case {case}: smoothing with eta={eta} broke majorization; pushed={pushed:?}, base={base:?}"
            ));
        }
    }
    report
}

/// Checks that observed sup-deviation exceedance frequencies stay below the
/// DKW tail bound, across a (sample count, deviation) grid.
///
/// The samples are Bernoulli, whose ECDF has a single jump, so the
/// sup-deviation is exactly `|p̂ - p|`; that makes each trial a handful of
/// coin flips instead of a full ECDF scan.
pub fn dkw_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut report = SuiteReport {
        name: "dkw",
        cases: 0,
        failures: 0,
        first_counterexample: None,
    };
    let trials = cfg.iterations.max(1);
    let mut rng = rng_from_seed(cfg.seed);
    for &lambda in &[100u64, 1000] {
        for &epsilon in &[0.05f64, 0.1] {
            report.cases += 1;
            let mut exceedances = 0u64;
            for _ in 0..trials {
                let p: f64 = rng.gen_range(0.1..0.9);
                let ones = (0..lambda).filter(|_| rng.gen::<f64>() < p).count();
                let deviation = (ones as f64 / lambda as f64 - p).abs();
                if deviation > epsilon {
                    exceedances += 1;
                }
            }
            let frequency = exceedances as f64 / trials as f64;
            let bound = dkw_bound(lambda, epsilon).min(1.0);
            // Allow three standard errors of Monte Carlo noise on top of
            // the bound; a frequency beyond that is a genuine violation.
            let slack = 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
            if frequency > bound + slack {
                report.record_failure(format!(
                    "lambda={lambda}, epsilon={epsilon}: exceedance frequency {frequency} above bound {bound} + slack {slack}"
                ));
            }
        }
    }
    report
}

/// Checks the arithmetic-geometric mean inequality on random vectors,
/// including vectors with zeros and equal-entry vectors where the two
/// means must coincide.
pub fn am_gm_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut report = SuiteReport {
        name: "am-gm",
        cases: 0,
        failures: 0,
        first_counterexample: None,
    };
    let mut rng = rng_from_seed(cfg.seed);
    for case in 0..cfg.iterations {
        report.cases += 1;
        let n = rng.gen_range(1..=64usize);
        let scale = 10f64.powi(rng.gen_range(-3..=3));
        let mut values: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * scale).collect();
        match case % 8 {
            // Every eighth case plants a zero: the GM must vanish.
            0 => values[rng.gen_range(0..n)] = 0.0,
            // Every eighth case flattens the vector: AM must equal GM.
            1 => {
                let v = values[0];
                values.iter_mut().for_each(|x| *x = v);
            }
            _ => {}
        }
        let (am, gm) = am_gm_means(&values);
        let tol = 1e-12 * am.abs().max(1.0);
        if gm > am + tol {
            report.record_failure(format!(
                "case {case}: geometric mean {gm} exceeds arithmetic mean {am} on {values:?}"
            ));
            continue;
        }
        if case % 8 == 0 && gm != 0.0 {
            report.record_failure(format!(
                "case {case}: geometric mean {gm} nonzero despite a zero entry"
            ));
            continue;
        }
        if case % 8 == 1 && (gm - am).abs() > tol {
            report.record_failure(format!(
                "case {case}: equal entries but am={am} differs from gm={gm}"
            ));
        }
    }
    report
}

/// Checks the border-margin curve: it stays at or above the negated border
/// deficit everywhere, decreases along `j`, and closes to within `1e-3` of
/// the limit by `j = 10^6`.
pub fn asymptote_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut report = SuiteReport {
        name: "border-asymptote",
        cases: 0,
        failures: 0,
        first_counterexample: None,
    };
    let points = cfg.iterations.clamp(50, 5_000) as usize;
    let j_max: f64 = 1e6;
    for &p0 in &[0.05f64, 0.1, 0.25, 0.5, 0.9] {
        let deficit = border_deficit(p0).expect("grid p0 values lie in (0, 1)");
        let mut previous = f64::INFINITY;
        for step in 0..points {
            report.cases += 1;
            // Log-spaced from 1 to j_max inclusive.
            let j = (j_max.ln() * step as f64 / (points - 1) as f64).exp();
            let margin = border_margin(p0, j).expect("grid j values are >= 1");
            if margin + deficit < -1e-9 {
                report.record_failure(format!(
                    "p0={p0}, j={j}: margin {margin} dips below the limit {}",
                    -deficit
                ));
                continue;
            }
            if margin > previous + 1e-12 {
                report.record_failure(format!(
                    "p0={p0}, j={j}: margin {margin} rose above the previous point {previous}"
                ));
                continue;
            }
            previous = margin;
            if step == points - 1 && (margin + deficit).abs() > 1e-3 {
                report.record_failure(format!(
                    "p0={p0}: margin at j={j} is {margin}, still {:.3e} away from the limit {}",
                    (margin + deficit).abs(),
                    -deficit
                ));
            }
        }
    }
    report
}

/// Runs every suite, each on its own stream derived from `cfg.seed`.
pub fn run_all(cfg: &SuiteConfig) -> Vec<SuiteReport> {
    let stream = |index: u64| SuiteConfig {
        iterations: cfg.iterations,
        seed: derive_seed(cfg.seed, index, 0),
    };
    alloc::vec![
        all_ones_ordering_suite(&stream(0)),
        smoothing_suite(&stream(1)),
        dkw_suite(&stream(2)),
        am_gm_suite(&stream(3)),
        asymptote_suite(&stream(4)),
    ]
}
