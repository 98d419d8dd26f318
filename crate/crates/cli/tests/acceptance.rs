//! Acceptance gate for the whole workspace: ten end-to-end checks covering
//! the UMDA/PBIL identity, the ordering and smoothing lemmas behind the
//! runtime analysis, the bound calculators, and the empirical scaling of
//! real runs.
//!
//! Each check prints exactly one line, `ACCEPTANCE PASS <name>` or
//! `ACCEPTANCE FAIL <name>: <detail>`; run with `--nocapture` to see them:
//!
//! ```text
//! cargo test -p pbil-cli --test acceptance -- --nocapture
//! ```

use std::num::NonZeroU64;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_bigint::BigUint;
use pbil_cli::fit::{fit_scaling, points_from_summaries};
use pbil_cli::stats::{summarize, CellSummary};
use pbil_cli::sweep::{run_sweep, BudgetRule, LambdaRule, SweepSpec};
use pbil_core::theory::{
    apply_smoothing, border_deficit, border_margin, check_selective_pressure, dkw_bound,
    expected_runtime_bound, level_based_bound, majorises, max_feasible_selection_ratio,
    min_population_size, poisson_binomial_pmf, TheoryParams,
};
use pbil_core::verify::{asymptote_suite, dkw_suite, SuiteConfig};
use pbil_core::{
    binval_exact, leading_ones, level_of, rng_from_seed, run_pbil_with, run_umda_with,
    Bitstring, PbilConfig, Problem, RunOptions, SampleRng,
};
use rand::Rng;

/// Runs one acceptance check and prints its verdict line. A failed check
/// also fails the surrounding test so `cargo test` reports it.
fn criterion<F>(name: &str, body: F)
where
    F: FnOnce() -> Result<(), String>,
{
    let verdict = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => None,
        Ok(Err(detail)) => Some(detail),
        Err(payload) => Some(
            payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panicked with a non-string payload".to_string()),
        ),
    };
    match verdict {
        None => println!("ACCEPTANCE PASS {name}"),
        Some(detail) => {
            println!("ACCEPTANCE FAIL {name}: {detail}");
            panic!("acceptance check {name} failed: {detail}");
        }
    }
}

fn close(label: &str, actual: f64, expected: f64, relative_tol: f64) -> Result<(), String> {
    let scale = expected.abs().max(1e-300);
    if (actual - expected).abs() <= relative_tol * scale {
        Ok(())
    } else {
        Err(format!("{label}: got {actual}, expected {expected}"))
    }
}

// --- 1. UMDA is PBIL at full learning rate -------------------------------

#[test]
fn umda_matches_pbil_at_full_learning_rate() {
    criterion("umda-equals-pbil-at-eta-1", || {
        let mut rng = rng_from_seed(101);
        for case in 0..100u32 {
            let n = rng.gen_range(2..=24usize);
            let lambda = rng.gen_range(2..=24usize);
            let mu = rng.gen_range(1..=lambda);
            let seed: u64 = rng.gen();
            let problem = if rng.gen_bool(0.5) {
                Problem::LeadingOnes
            } else {
                Problem::BinVal
            };
            // run_umda must ignore whatever learning rate the config carries.
            let stray_eta = 0.05 + 0.9 * rng.gen::<f64>();
            let umda_config = PbilConfig::with_budget(n, lambda, mu, stray_eta, seed, 60)
                .map_err(|err| format!("case {case}: {err}"))?;
            let pbil_config = PbilConfig::with_budget(n, lambda, mu, 1.0, seed, 60)
                .map_err(|err| format!("case {case}: {err}"))?;
            let options = RunOptions {
                trace_best: true,
                snapshot_every: NonZeroU64::new(2),
                initial_model: None,
            };
            let umda = run_umda_with(umda_config, problem, options.clone())
                .map_err(|err| format!("case {case}: {err}"))?;
            let pbil = run_pbil_with(pbil_config, problem, options)
                .map_err(|err| format!("case {case}: {err}"))?;
            if umda != pbil {
                return Err(format!(
                    "case {case} (n={n}, lambda={lambda}, mu={mu}, seed={seed}, {problem}): \
                     trajectories differ: {umda:?} vs {pbil:?}"
                ));
            }
        }
        Ok(())
    });
}

// --- 2. Spreading probability mass lowers the all-ones chance ------------

const GRID: u64 = 20;

/// Calls `visit` for every non-increasing vector of the given length with
/// entries in `1..=GRID` (a 0.05-step probability grid without zeros).
fn each_descending_vector<F: FnMut(&[u64])>(length: usize, prefix: &mut Vec<u64>, visit: &mut F) {
    if prefix.len() == length {
        visit(prefix);
        return;
    }
    let cap = prefix.last().copied().unwrap_or(GRID);
    for entry in (1..=cap).rev() {
        prefix.push(entry);
        each_descending_vector(length, prefix, visit);
        prefix.pop();
    }
}

fn product_of(probs: &[f64]) -> f64 {
    probs.iter().product()
}

/// Draws a random base vector and a copy pushed toward the extremes by a
/// few mass-preserving transfers; the pushed copy majorises the base.
fn transfer_pair(rng: &mut SampleRng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let base: Vec<f64> = (0..n).map(|_| 0.02 + 0.96 * rng.gen::<f64>()).collect();
    let mut pushed = base.clone();
    for _ in 0..rng.gen_range(1..=5) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let (rich, poor) = if pushed[a] >= pushed[b] { (a, b) } else { (b, a) };
        let headroom = (1.0 - pushed[rich]).min(pushed[poor]);
        if headroom <= 0.0 {
            continue;
        }
        let amount = 0.5 * headroom * rng.gen::<f64>();
        pushed[rich] += amount;
        pushed[poor] -= amount;
    }
    (pushed, base)
}

#[test]
fn spreading_mass_lowers_the_all_ones_probability() {
    criterion("mass-transfers-lower-the-all-ones-probability", || {
        // Exhaustive sweep of every unit transfer on the 0.05 probability
        // grid, lengths 2..=10. Each transfer moves one grid step from a
        // smaller entry to a larger one, so the result majorises the
        // original; the all-ones probability (the product) must not rise.
        // Integer products keep the exhaustive comparison exact; sampled
        // edges cross-check the float predicates against that ground truth.
        let mut edges = 0u64;
        let mut sampled = 0u64;
        let mut failure: Option<String> = None;
        for length in 2..=10usize {
            let mut prefix = Vec::with_capacity(length);
            each_descending_vector(length, &mut prefix, &mut |entries| {
                if failure.is_some() {
                    return;
                }
                let product: u64 = entries.iter().product();
                for receive in 0..entries.len() {
                    if entries[receive] == GRID
                        || (receive > 0 && entries[receive - 1] == entries[receive])
                    {
                        continue;
                    }
                    for give in (receive + 1)..entries.len() {
                        if entries[give] == 1
                            || (give + 1 < entries.len() && entries[give] == entries[give + 1])
                        {
                            continue;
                        }
                        edges += 1;
                        let before = entries[receive] * entries[give];
                        let after = (entries[receive] + 1) * (entries[give] - 1);
                        let transferred = product / before * after;
                        if transferred > product {
                            failure = Some(format!(
                                "unit transfer on {entries:?} (positions {receive} <- {give}) \
                                 raised the all-ones weight {product} to {transferred}"
                            ));
                            return;
                        }
                        if edges % 50_000 == 0 {
                            sampled += 1;
                            let base: Vec<f64> =
                                entries.iter().map(|&u| u as f64 / GRID as f64).collect();
                            let mut pushed = base.clone();
                            pushed[receive] = (entries[receive] + 1) as f64 / GRID as f64;
                            pushed[give] = (entries[give] - 1) as f64 / GRID as f64;
                            if majorises(&pushed, &base) != Ok(true) {
                                failure = Some(format!(
                                    "majorises() rejected the unit transfer on {entries:?}"
                                ));
                                return;
                            }
                            let all_ones_pushed = poisson_binomial_pmf(&pushed)[base.len()];
                            let all_ones_base = poisson_binomial_pmf(&base)[base.len()];
                            if all_ones_pushed > all_ones_base + 1e-12 {
                                failure = Some(format!(
                                    "PMF tail rose under the unit transfer on {entries:?}: \
                                     {all_ones_pushed} > {all_ones_base}"
                                ));
                                return;
                            }
                        }
                    }
                }
            });
            if let Some(detail) = failure {
                return Err(detail);
            }
        }
        if edges < 10_000_000 || sampled < 100 {
            return Err(format!(
                "exhaustive sweep looked too small: {edges} transfers, {sampled} sampled cross-checks"
            ));
        }

        // Random continuous pairs at larger dimensions: the pushed vector
        // majorises the base, so both the plain product and the exact
        // Poisson-binomial tail must order the same way.
        for &n in &[20usize, 50] {
            let mut rng = rng_from_seed(777 + n as u64);
            for case in 0..10_000u32 {
                let (pushed, base) = transfer_pair(&mut rng, n);
                if majorises(&pushed, &base) != Ok(true) {
                    return Err(format!("n={n}, case {case}: transfer pair not majorising"));
                }
                let (product_pushed, product_base) = (product_of(&pushed), product_of(&base));
                if product_pushed > product_base * (1.0 + 1e-9) + 1e-300 {
                    return Err(format!(
                        "n={n}, case {case}: product rose from {product_base} to {product_pushed}"
                    ));
                }
                let tail_pushed = poisson_binomial_pmf(&pushed)[n];
                let tail_base = poisson_binomial_pmf(&base)[n];
                if tail_pushed > tail_base * (1.0 + 1e-9) + 1e-300 {
                    return Err(format!(
                        "n={n}, case {case}: PMF tail rose from {tail_base} to {tail_pushed}"
                    ));
                }
            }
        }

        // The PMF itself must agree with brute-force enumeration.
        let mut rng = rng_from_seed(99);
        for &n in &[1usize, 2, 3, 5, 8, 12] {
            for _ in 0..5 {
                let probs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let pmf = poisson_binomial_pmf(&probs);
                let mut enumerated = vec![0.0f64; n + 1];
                for mask in 0u32..(1 << n) {
                    let mut weight = 1.0;
                    for (position, &p) in probs.iter().enumerate() {
                        weight *= if mask >> position & 1 == 1 { p } else { 1.0 - p };
                    }
                    enumerated[mask.count_ones() as usize] += weight;
                }
                for (count, (&fast, &slow)) in pmf.iter().zip(enumerated.iter()).enumerate() {
                    if (fast - slow).abs() > 1e-10 {
                        return Err(format!(
                            "PMF({probs:?})[{count}] = {fast} but enumeration gives {slow}"
                        ));
                    }
                }
            }
        }
        Ok(())
    });
}

// --- 3. Smoothing preserves majorization ----------------------------------

#[test]
fn smoothing_preserves_majorization() {
    criterion("smoothing-preserves-majorization", || {
        let mut rng = rng_from_seed(555);
        let mut violations = 0u64;
        let mut first = String::new();
        for case in 0..10_000u32 {
            let n = rng.gen_range(2..=50usize);
            let (pushed, base) = transfer_pair(&mut rng, n);
            if majorises(&pushed, &base) != Ok(true) {
                return Err(format!("case {case}: generator produced a non-majorising pair"));
            }
            for &eta in &[0.1f64, 0.5, 1.0] {
                let smoothed_pushed = apply_smoothing(&pushed, eta);
                let smoothed_base = apply_smoothing(&base, eta);
                if majorises(&smoothed_pushed, &smoothed_base) != Ok(true) {
                    violations += 1;
                    if first.is_empty() {
                        first = format!("case {case}, eta={eta}: order lost after smoothing");
                    }
                }
            }
        }
        if violations > 0 {
            return Err(format!("{violations} violations; first: {first}"));
        }
        Ok(())
    });
}

// --- 4. The DKW tail bound dominates observed deviations -------------------

#[test]
fn dkw_bound_dominates_observed_deviations() {
    criterion("dkw-bound-dominates", || {
        let report = dkw_suite(&SuiteConfig {
            iterations: 100_000,
            seed: 1717,
        });
        if report.cases != 4 {
            return Err(format!("expected 4 grid cells, saw {}", report.cases));
        }
        if !report.passed() {
            return Err(report
                .first_counterexample
                .unwrap_or_else(|| "unknown failure".to_string()));
        }
        Ok(())
    });
}

// --- 5. The bound calculators reproduce their reference values ------------

#[test]
fn calculators_reproduce_reference_values() {
    criterion("bound-calculators-match-references", || {
        let two_levels = TheoryParams::new(1.0, 0.1, 0.5, 1.0, vec![0.5])
            .map_err(|err| err.to_string())?;
        close(
            "level_based_bound(delta=1, z=[0.5], lambda=8)",
            level_based_bound(&two_levels, 8),
            130.672_606_030_595_52,
            1e-9,
        )?;
        close(
            "min_population_size(gamma0=0.5, delta=1, z*=0.5)",
            min_population_size(&two_levels),
            49.906_597_000_316_06,
            1e-9,
        )?;
        close(
            "expected_runtime_bound(n=10, lambda=50, gamma0=0.25, eps=0.1, delta=0.5)",
            expected_runtime_bound(10, 50, 0.25, 0.1, 0.5).map_err(|err| err.to_string())?,
            69_944.320_319_287_06,
            1e-9,
        )?;
        close(
            "dkw_bound(100, 0.1)",
            dkw_bound(100, 0.1),
            0.270_670_566_473_225_4,
            1e-9,
        )?;
        close(
            "dkw_bound(1000, 0.05)",
            dkw_bound(1000, 0.05),
            0.013_475_893_998_170_934,
            1e-9,
        )?;
        close(
            "border_deficit(0.5)",
            border_deficit(0.5).map_err(|err| err.to_string())?,
            core::f64::consts::LN_2 * 2.0,
            1e-9,
        )?;

        let report = check_selective_pressure(0.25, 1.0, 0.1, 0.1).map_err(|err| err.to_string())?;
        close("p0 = gamma0/(1+eps)", report.p0, 0.227_272_727_272_727_27, 1e-9)?;
        close(
            "border deficit at p0",
            report.border_deficit,
            1.917_370_582_372_514_2,
            1e-9,
        )?;
        if report.ceil_border_deficit != 2 {
            return Err(format!(
                "ceil of the border deficit: got {}, expected 2",
                report.ceil_border_deficit
            ));
        }
        close(
            "admissible ratio cap at eta=1",
            report.max_selection_ratio,
            0.334_435_855_610_402_07,
            1e-9,
        )?;
        if !report.satisfied {
            return Err("gamma0=0.25 at eta=1 should satisfy the constraint".to_string());
        }

        let strict = check_selective_pressure(0.25, 0.5, 0.1, 0.1).map_err(|err| err.to_string())?;
        close(
            "admissible ratio cap at eta=0.5",
            strict.max_selection_ratio,
            0.041_804_481_951_300_26,
            1e-9,
        )?;
        if strict.satisfied {
            return Err("gamma0=0.25 at eta=0.5 should violate the constraint".to_string());
        }

        close(
            "max feasible selection ratio at eta=1",
            max_feasible_selection_ratio(1.0, 0.1, 0.1).map_err(|err| err.to_string())?,
            0.334_435_855_610_402_07,
            1e-9,
        )?;

        // Doubling n at fixed small lambda roughly quadruples the bound:
        // the quadratic term dominates.
        let at_100 = expected_runtime_bound(100, 20, 0.25, 0.1, 0.5).map_err(|err| err.to_string())?;
        let at_200 = expected_runtime_bound(200, 20, 0.25, 0.1, 0.5).map_err(|err| err.to_string())?;
        close("bound ratio n=200/n=100", at_200 / at_100, 3.781_433_601_169_343, 1e-9)?;
        Ok(())
    });
}

// --- 6. The border margin falls to its asymptote ---------------------------

#[test]
fn border_margin_approaches_its_asymptote() {
    criterion("border-margin-asymptote", || {
        // 200 log-spaced points per p0, ending exactly at j = 1e6.
        let report = asymptote_suite(&SuiteConfig {
            iterations: 200,
            seed: 0,
        });
        if report.cases != 5 * 200 {
            return Err(format!("expected 1000 grid points, saw {}", report.cases));
        }
        if !report.passed() {
            return Err(report
                .first_counterexample
                .unwrap_or_else(|| "unknown failure".to_string()));
        }
        // Spot-check the terminal gap directly.
        for &p0 in &[0.05f64, 0.1, 0.25, 0.5, 0.9] {
            let deficit = border_deficit(p0).map_err(|err| err.to_string())?;
            let terminal = border_margin(p0, 1e6).map_err(|err| err.to_string())?;
            if (terminal + deficit).abs() > 1e-3 {
                return Err(format!(
                    "p0={p0}: margin at j=1e6 is {terminal}, limit is {}",
                    -deficit
                ));
            }
        }
        Ok(())
    });
}

// --- 7. LeadingOnes runs scale like the bound ------------------------------

fn medians_by_size(cells: &[CellSummary], sizes: &[usize]) -> Result<Vec<f64>, String> {
    sizes
        .iter()
        .map(|&n| {
            cells
                .iter()
                .find(|cell| cell.n == n)
                .map(|cell| cell.median_evaluations)
                .ok_or_else(|| format!("no summary cell for n={n}"))
        })
        .collect()
}

fn demand_all_successes(cells: &[CellSummary]) -> Result<(), String> {
    for cell in cells {
        if cell.success_rate < 1.0 || cell.censored > 0 {
            return Err(format!(
                "{} n={}: success rate {:.3} with {} censored runs",
                cell.problem, cell.n, cell.success_rate, cell.censored
            ));
        }
    }
    Ok(())
}

#[test]
fn leading_ones_scaling_follows_the_bound() {
    criterion("leading-ones-scaling", || {
        let spec = SweepSpec {
            problem: Problem::LeadingOnes,
            n_values: vec![64, 128, 256],
            lambda_rule: LambdaRule::LogN { c: 6.0 },
            gamma0: 0.25,
            eta: 1.0,
            trials: 30,
            base_seed: 7,
            budget_rule: BudgetRule::Default,
        };
        let outcome = run_sweep(&spec, None).map_err(|err| err.to_string())?;
        if !outcome.skipped.is_empty() {
            return Err(format!("skipped cells: {:?}", outcome.skipped));
        }
        let cells = summarize(&outcome.records);
        demand_all_successes(&cells)?;
        let medians = medians_by_size(&cells, &spec.n_values)?;
        for window in medians.windows(2) {
            let ratio = window[1] / window[0];
            if !(3.0..=6.0).contains(&ratio) {
                return Err(format!(
                    "doubling n multiplied the median by {ratio:.2} (medians {medians:?}); \
                     expected a factor in [3, 6]"
                ));
            }
        }
        let fit = fit_scaling(&points_from_summaries(&cells)).map_err(|err| err.to_string())?;
        if fit.relative_residual >= 0.25 {
            return Err(format!(
                "scaling-law fit leaves a relative residual of {:.3}",
                fit.relative_residual
            ));
        }
        Ok(())
    });
}

// --- 8. PBIL with smoothing solves within ten default budgets --------------

#[test]
fn smoothed_pbil_solves_within_ten_default_budgets() {
    criterion("pbil-smoothing-regime", || {
        // The selection ratio must satisfy the selective-pressure
        // constraint at eta = 0.5 before the runs mean anything.
        let report = check_selective_pressure(0.0013, 0.5, 0.1, 0.1).map_err(|err| err.to_string())?;
        if !report.satisfied {
            return Err(format!(
                "gamma0=0.0013 should be admissible at eta=0.5 (cap {})",
                report.max_selection_ratio
            ));
        }
        // lambda = max(ceil(6 ln n), ceil(2/gamma0)) = 1539 for both sizes.
        let spec = SweepSpec {
            problem: Problem::LeadingOnes,
            n_values: vec![32, 64],
            lambda_rule: LambdaRule::List(vec![1539]),
            gamma0: 0.0013,
            eta: 0.5,
            trials: 20,
            base_seed: 5,
            budget_rule: BudgetRule::Scaled { factor: 10.0 },
        };
        let outcome = run_sweep(&spec, None).map_err(|err| err.to_string())?;
        if !outcome.skipped.is_empty() {
            return Err(format!("skipped cells: {:?}", outcome.skipped));
        }
        if outcome.records.len() != 40 {
            return Err(format!("expected 40 trial records, saw {}", outcome.records.len()));
        }
        for record in &outcome.records {
            if record.lambda != 1539 || record.mu != 2 {
                return Err(format!(
                    "n={}: expected lambda=1539, mu=2; saw lambda={}, mu={}",
                    record.n, record.lambda, record.mu
                ));
            }
        }
        demand_all_successes(&summarize(&outcome.records))?;
        Ok(())
    });
}

// --- 9. Both problems run on the same timescale ----------------------------

#[test]
fn problems_share_a_runtime_scale() {
    criterion("leading-ones-and-binval-parity", || {
        let spec_for = |problem| SweepSpec {
            problem,
            n_values: vec![32, 64, 128],
            lambda_rule: LambdaRule::PowN { c: 2.0, k: 1.0 },
            gamma0: 0.25,
            eta: 1.0,
            trials: 30,
            base_seed: 11,
            budget_rule: BudgetRule::Default,
        };
        let leading = run_sweep(&spec_for(Problem::LeadingOnes), None)
            .map_err(|err| err.to_string())?;
        let binval = run_sweep(&spec_for(Problem::BinVal), None).map_err(|err| err.to_string())?;
        let leading_cells = summarize(&leading.records);
        let binval_cells = summarize(&binval.records);
        demand_all_successes(&leading_cells)?;
        demand_all_successes(&binval_cells)?;
        let sizes = [32usize, 64, 128];
        let leading_medians = medians_by_size(&leading_cells, &sizes)?;
        let binval_medians = medians_by_size(&binval_cells, &sizes)?;
        for ((&n, &lead), &bin) in sizes.iter().zip(&leading_medians).zip(&binval_medians) {
            let ratio = lead / bin;
            if !(1.0 / 3.0..=3.0).contains(&ratio) {
                return Err(format!(
                    "n={n}: median ratio LeadingOnes/BinVal = {ratio:.2} \
                     ({lead} vs {bin}); expected within [1/3, 3]"
                ));
            }
        }
        Ok(())
    });
}

// --- 10. BinVal levels coincide with LeadingOnes and nest in value bands ---

#[test]
fn binval_levels_nest_in_value_intervals() {
    criterion("binval-level-equivalence", || {
        let one = BigUint::from(1u8);
        for n in 1..=12usize {
            let mut values: Vec<BigUint> = Vec::with_capacity(1 << n);
            let mut strings: Vec<Bitstring> = Vec::with_capacity(1 << n);
            for mask in 0u32..(1u32 << n) {
                let x: Bitstring = (0..n).map(|position| mask >> position & 1 == 1).collect();
                let level = leading_ones(&x);
                if level_of(&x, Problem::LeadingOnes) != level
                    || level_of(&x, Problem::BinVal) != level
                {
                    return Err(format!("level mismatch on {x} (n={n})"));
                }
                let value = binval_exact(&x);
                if level == n {
                    if value != (&one << n) - &one {
                        return Err(format!("all-ones value wrong at n={n}: {value}"));
                    }
                } else {
                    // A level-j string has value in
                    // [2^n - 2^(n-j), 2^n - 2^(n-j) + 2^(n-j-1)).
                    let floor = (&one << n) - (&one << (n - level));
                    let width = &one << (n - level - 1);
                    if value < floor || value >= &floor + &width {
                        return Err(format!(
                            "level {level} string {x} has value {value} outside \
                             [{floor}, {floor}+{width})"
                        ));
                    }
                }
                values.push(value);
                strings.push(x);
            }
            // The word-level comparator must reproduce the exact-value order.
            if n <= 9 {
                for (a, value_a) in values.iter().enumerate() {
                    for (b, value_b) in values.iter().enumerate() {
                        let fast = pbil_core::binval_compare(&strings[a], &strings[b])
                            .map_err(|err| err.to_string())?;
                        if fast != value_a.cmp(value_b) {
                            return Err(format!(
                                "comparator disagrees on {} vs {} (n={n})",
                                strings[a], strings[b]
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    });
}
