//! Argument parsing and command dispatch for the `pbil` binary.
//!
//! Exit codes: 0 on success, 1 on invalid input or a failed verification,
//! 2 when a single run exhausts its generation budget before reaching the
//! optimum. Every command accepts `--config FILE` (JSON); explicit
//! command-line flags override config-file entries, and the effective
//! configuration is echoed in the output so results are self-describing.

use std::error::Error;
use std::fs;
use std::num::NonZeroU64;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pbil_core::fitness::ParseProblemError;
use pbil_core::theory::{
    check_selective_pressure, expected_runtime_bound, max_feasible_selection_ratio,
    min_population_size, poisson_binomial_pmf, TheoryParams,
};
use pbil_core::verify::{
    all_ones_ordering_suite, all_ones_ordering_suite_with, am_gm_suite, asymptote_suite,
    dkw_suite, smoothing_suite, SuiteConfig, SuiteReport,
};
use pbil_core::{derive_seed, run_pbil_with, PbilConfig, Problem, RunOptions};
use serde::Deserialize;
use serde_json::json;

use crate::csvio;
use crate::failure::marginal_failure_rate;
use crate::fit::{fit_scaling, points_from_summaries};
use crate::plot::render_scaling_plot;
use crate::stats::summarize;
use crate::sweep::{run_sweep, BudgetRule, LambdaRule, SweepSpec};

/// Twenty generations per bit by default; plenty for a healthy run, small
/// enough that a stalled one fails fast.
const DEFAULT_LAMBDA_RULE: &str = "6*ln(n)";
const DEFAULT_GAMMA0: f64 = 0.25;

type CommandResult = Result<i32, Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "pbil",
    version,
    about = "PBIL/UMDA with margins on LeadingOnes and BinVal: seeded runs, scaling sweeps, runtime-bound calculators, and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded optimization and report the outcome as JSON.
    Run(RunArgs),
    /// Run a seeded trial grid over problem sizes and write CSV records.
    Sweep(SweepArgs),
    /// Evaluate the expected-runtime bound and its population-size floor.
    Bound(BoundArgs),
    /// Check the selective-pressure constraint on the selection ratio.
    Check(CheckArgs),
    /// Run the randomized verification suites.
    Verify(VerifyArgs),
    /// Render a log-log scaling plot from sweep CSV records.
    Plot(PlotArgs),
}

/// Entry point: parses arguments and returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests arrive as "errors"; report them on
            // stdout and succeed. Genuine usage errors exit with 1.
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => command_run(args),
        Command::Sweep(args) => command_sweep(args),
        Command::Bound(args) => command_bound(args),
        Command::Check(args) => command_check(args),
        Command::Verify(args) => command_verify(args),
        Command::Plot(args) => command_plot(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn parse_problem(s: &str) -> Result<Problem, String> {
    s.parse()
        .map_err(|err: ParseProblemError| err.to_string())
}

/// Optional settings loadable from a JSON file; any command-line flag
/// overrides the corresponding entry.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    problem: Option<Problem>,
    n: Option<usize>,
    n_values: Option<Vec<usize>>,
    lambda: Option<String>,
    gamma0: Option<f64>,
    mu: Option<usize>,
    eta: Option<f64>,
    seed: Option<u64>,
    trials: Option<u64>,
    budget: Option<String>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    workers: Option<usize>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, Box<dyn Error>> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|err| format!("{}: {err}", path.display()))?;
            let config: FileConfig = serde_json::from_str(&text)
                .map_err(|err| format!("{}: {err}", path.display()))?;
            Ok(config)
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Box<dyn Error>> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|err| format!("{}: {err}", path.display()))?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// "leadingones" or "binval".
    #[arg(long, value_parser = parse_problem)]
    problem: Option<Problem>,
    /// Problem size (number of bits).
    #[arg(long)]
    n: Option<usize>,
    /// Population size: a number, or a rule like "6*ln(n)" or "2*n^0.5".
    #[arg(long)]
    lambda: Option<String>,
    /// Selection size; defaults to round(gamma0 * lambda).
    #[arg(long)]
    mu: Option<usize>,
    /// Selection ratio used when --mu is absent.
    #[arg(long)]
    gamma0: Option<f64>,
    /// Learning rate in (0, 1]; 1 is the UMDA special case.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Generation budget: "default", a multiple like "10*default", or an
    /// integer.
    #[arg(long)]
    budget: Option<String>,
    /// Record the best level of every generation.
    #[arg(long)]
    trace: bool,
    /// Snapshot the marginals entering generations 1, 1+K, 1+2K, ...
    #[arg(long, value_name = "K")]
    snapshot_every: Option<u64>,
    /// Probe how often marginals left of the selection floor sag below
    /// gamma0/(1+epsilon), instead of reporting the run itself.
    #[arg(long)]
    probe_margins: bool,
    /// Slack for the probe threshold.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn command_run(args: RunArgs) -> CommandResult {
    let file = load_config(args.config.as_deref())?;
    let problem = args
        .problem
        .or(file.problem)
        .unwrap_or(Problem::LeadingOnes);
    let n = args
        .n
        .or(file.n)
        .ok_or("missing problem size: pass --n or set \"n\" in the config file")?;
    let lambda_rule: LambdaRule = args
        .lambda
        .or(file.lambda)
        .unwrap_or_else(|| DEFAULT_LAMBDA_RULE.to_string())
        .parse()?;
    let lambda = lambda_rule.lambda_for(0, n, 1)?;
    let gamma0 = args.gamma0.or(file.gamma0).unwrap_or(DEFAULT_GAMMA0);
    let mu = args
        .mu
        .or(file.mu)
        .unwrap_or_else(|| (((gamma0 * lambda as f64).round() as usize).max(1)).min(lambda));
    let eta = args.eta.or(file.eta).unwrap_or(1.0);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let budget_rule: BudgetRule = args
        .budget
        .or(file.budget)
        .unwrap_or_else(|| "default".to_string())
        .parse()?;
    let budget = budget_rule.budget_for(n, lambda);
    let config = PbilConfig::with_budget(n, lambda, mu, eta, seed, budget)?;

    if args.probe_margins {
        let epsilon = args.epsilon.or(file.epsilon).unwrap_or(0.1);
        let report = marginal_failure_rate(config.clone(), problem, epsilon)?;
        let document = json!({
            "problem": problem,
            "config": config,
            "margin_probe": report,
        });
        emit(args.output.as_deref(), &serde_json::to_string_pretty(&document)?)?;
        return Ok(0);
    }

    let options = RunOptions {
        trace_best: args.trace,
        snapshot_every: args.snapshot_every.and_then(NonZeroU64::new),
        initial_model: None,
    };
    let result = run_pbil_with(config.clone(), problem, options)?;
    let exit = if result.success { 0 } else { 2 };
    let document = json!({
        "problem": problem,
        "config": config,
        "result": result,
    });
    emit(args.output.as_deref(), &serde_json::to_string_pretty(&document)?)?;
    Ok(exit)
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// "leadingones" or "binval".
    #[arg(long, value_parser = parse_problem)]
    problem: Option<Problem>,
    /// Problem sizes, comma-separated (e.g. 64,128,256).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Population rule: "6*ln(n)", "2*n^0.5", a constant, or a
    /// comma-separated list matching the problem sizes.
    #[arg(long)]
    lambda: Option<String>,
    /// Selection ratio; mu = max(1, round(gamma0 * lambda)).
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Seeded trials per problem size.
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; cell seeds derive from it and the cell coordinates.
    #[arg(long)]
    seed: Option<u64>,
    /// Generation budget rule: "default", "f*default", or an integer.
    #[arg(long)]
    budget: Option<String>,
    /// Cap the number of worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also write per-cell summaries as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn command_sweep(args: SweepArgs) -> CommandResult {
    let file = load_config(args.config.as_deref())?;
    let n_values = args
        .n
        .or(file.n_values)
        .or_else(|| file.n.map(|n| vec![n]))
        .ok_or("missing problem sizes: pass --n or set \"n_values\" in the config file")?;
    let spec = SweepSpec {
        problem: args
            .problem
            .or(file.problem)
            .unwrap_or(Problem::LeadingOnes),
        n_values,
        lambda_rule: args
            .lambda
            .or(file.lambda)
            .unwrap_or_else(|| DEFAULT_LAMBDA_RULE.to_string())
            .parse()?,
        gamma0: args.gamma0.or(file.gamma0).unwrap_or(DEFAULT_GAMMA0),
        eta: args.eta.or(file.eta).unwrap_or(1.0),
        trials: args.trials.or(file.trials).unwrap_or(30),
        base_seed: args.seed.or(file.seed).unwrap_or(0),
        budget_rule: args
            .budget
            .or(file.budget)
            .map(|text| text.parse())
            .transpose()?
            .unwrap_or_default(),
    };
    let workers = args.workers.or(file.workers);

    let outcome = run_sweep(&spec, workers)?;
    csvio::write_records(&args.out, &outcome.records)?;
    let summaries = summarize(&outcome.records);
    if let Some(path) = &args.summary {
        fs::write(path, serde_json::to_string_pretty(&summaries)?)
            .map_err(|err| format!("{}: {err}", path.display()))?;
    }

    println!("spec: {}", serde_json::to_string(&spec)?);
    for cell in &summaries {
        println!(
            "cell problem={} n={} lambda={} mu={} trials={} success_rate={:.3} censored={} median_evaluations={:.1}",
            cell.problem,
            cell.n,
            cell.lambda,
            cell.mu,
            cell.trials,
            cell.success_rate,
            cell.censored,
            cell.median_evaluations
        );
    }
    for skipped in &outcome.skipped {
        println!("skipped n={}: {}", skipped.n, skipped.reason);
    }
    println!(
        "wrote {} records to {}",
        outcome.records.len(),
        args.out.display()
    );
    Ok(0)
}

#[derive(Args)]
struct BoundArgs {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem sizes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Population size: a number, a rule, or a list matching the sizes.
    #[arg(long)]
    lambda: Option<String>,
    /// Selection ratio the bound assumes.
    #[arg(long)]
    gamma0: Option<f64>,
    /// Slack on the per-level upgrade probabilities.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Slack of the level-based method.
    #[arg(long)]
    delta: Option<f64>,
    /// Print only the JSON rows.
    #[arg(long)]
    json: bool,
}

fn command_bound(args: BoundArgs) -> CommandResult {
    let file = load_config(args.config.as_deref())?;
    let n_values = args
        .n
        .or(file.n_values)
        .or_else(|| file.n.map(|n| vec![n]))
        .ok_or("missing problem sizes: pass --n or set \"n_values\" in the config file")?;
    let lambda_rule: LambdaRule = args
        .lambda
        .or(file.lambda)
        .unwrap_or_else(|| DEFAULT_LAMBDA_RULE.to_string())
        .parse()?;
    let gamma0 = args.gamma0.or(file.gamma0).unwrap_or(DEFAULT_GAMMA0);
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(0.1);
    let delta = args.delta.or(file.delta).unwrap_or(0.5);

    let mut rows = Vec::new();
    for (index, &n) in n_values.iter().enumerate() {
        let lambda = lambda_rule.lambda_for(index, n, n_values.len())?;
        let bound = expected_runtime_bound(n, lambda as u64, gamma0, epsilon, delta)?;
        let upgrade_prob = gamma0 / ((1.0 + epsilon) * n as f64);
        let params = TheoryParams::new(delta, epsilon, gamma0, 1.0, vec![upgrade_prob; n])?;
        let floor = min_population_size(&params);
        rows.push(json!({
            "n": n,
            "lambda": lambda,
            "gamma0": gamma0,
            "epsilon": epsilon,
            "delta": delta,
            "bound": bound,
            "min_population_size": floor,
            "lambda_meets_floor": (lambda as f64) >= floor,
        }));
        if !args.json {
            println!("n={n} lambda={lambda} gamma0={gamma0} epsilon={epsilon} delta={delta}");
            println!("  expected-evaluations bound: {bound:.3}");
            println!("  population floor for validity: {floor:.3}");
            if (lambda as f64) < floor {
                println!(
                    "  WARNING: lambda {lambda} is below the validity floor {floor:.1}; the bound is not guaranteed at this population size"
                );
            }
        }
    }
    println!("{}", serde_json::to_string_pretty(&rows)?);
    Ok(0)
}

#[derive(Args)]
struct CheckArgs {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Selection ratio to check.
    #[arg(long)]
    gamma0: Option<f64>,
    /// Learning rate in (0, 1].
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Also report the largest selection ratio the constraint admits for
    /// this learning rate.
    #[arg(long)]
    max_ratio: bool,
    /// Print only the JSON report.
    #[arg(long)]
    json: bool,
}

fn command_check(args: CheckArgs) -> CommandResult {
    let file = load_config(args.config.as_deref())?;
    let gamma0 = args.gamma0.or(file.gamma0).unwrap_or(DEFAULT_GAMMA0);
    let eta = args.eta.or(file.eta).unwrap_or(1.0);
    let delta = args.delta.or(file.delta).unwrap_or(0.1);
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(0.1);

    let report = check_selective_pressure(gamma0, eta, delta, epsilon)?;
    let max_ratio = if args.max_ratio {
        Some(max_feasible_selection_ratio(eta, delta, epsilon)?)
    } else {
        None
    };

    if !args.json {
        println!(
            "selection ratio gamma0={} learning rate eta={} delta={} epsilon={}",
            report.gamma0, report.eta, report.delta, report.epsilon
        );
        println!("  smoothed floor p0 = gamma0/(1+epsilon) = {:.6}", report.p0);
        println!(
            "  border deficit = {:.6} (ceiling {})",
            report.border_deficit, report.ceil_border_deficit
        );
        println!(
            "  admissible ratio cap = eta^{}/((1+delta)e) = {:.6}",
            report.ceil_border_deficit + 1,
            report.max_selection_ratio
        );
        println!(
            "  constraint satisfied: {}",
            if report.satisfied { "yes" } else { "no" }
        );
        if let Some(ratio) = max_ratio {
            println!("  largest admissible selection ratio: {ratio:.6}");
        }
    }
    let mut document = serde_json::to_value(&report)?;
    if let Some(ratio) = max_ratio {
        document["max_feasible_selection_ratio"] = json!(ratio);
    }
    println!("{}", serde_json::to_string_pretty(&document)?);
    Ok(0)
}

#[derive(Args)]
struct VerifyArgs {
    /// Random cases per suite.
    #[arg(long, default_value_t = 10_000)]
    iterations: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run only the named suites (repeatable). Names: all-ones-ordering,
    /// smoothing, dkw, am-gm, border-asymptote.
    #[arg(long)]
    suite: Vec<String>,
    /// Corrupt the Poisson-binomial routine before running, to confirm the
    /// suites catch a wrong distribution. For testing the harness itself.
    #[arg(long, hide = true)]
    inject_faulty_pmf: bool,
}

fn command_verify(args: VerifyArgs) -> CommandResult {
    const SUITE_NAMES: [&str; 5] = [
        "all-ones-ordering",
        "smoothing",
        "dkw",
        "am-gm",
        "border-asymptote",
    ];
    for requested in &args.suite {
        if !SUITE_NAMES.contains(&requested.as_str()) {
            return Err(format!(
                "unknown suite {requested:?} (expected one of: {})",
                SUITE_NAMES.join(", ")
            )
            .into());
        }
    }
    let wanted =
        |name: &str| args.suite.is_empty() || args.suite.iter().any(|s| s == name);

    // Streams match pbil_core::verify::run_all, so a filtered run reports
    // exactly what the full run would for the same suite.
    let stream = |index: u64| SuiteConfig {
        iterations: args.iterations,
        seed: derive_seed(args.seed, index, 0),
    };
    let faulty_pmf = |p: &[f64]| {
        let mut pmf = poisson_binomial_pmf(p);
        let last = pmf.len() - 1;
        pmf[last] *= 1.0 + 1e-6;
        pmf
    };

    let mut reports: Vec<SuiteReport> = Vec::new();
    if wanted(SUITE_NAMES[0]) {
        reports.push(if args.inject_faulty_pmf {
            all_ones_ordering_suite_with(&stream(0), faulty_pmf)
        } else {
            all_ones_ordering_suite(&stream(0))
        });
    }
    if wanted(SUITE_NAMES[1]) {
        reports.push(smoothing_suite(&stream(1)));
    }
    if wanted(SUITE_NAMES[2]) {
        reports.push(dkw_suite(&stream(2)));
    }
    if wanted(SUITE_NAMES[3]) {
        reports.push(am_gm_suite(&stream(3)));
    }
    if wanted(SUITE_NAMES[4]) {
        reports.push(asymptote_suite(&stream(4)));
    }

    let mut all_passed = true;
    for report in &reports {
        if report.passed() {
            println!("PASS {} (cases={})", report.name, report.cases);
        } else {
            all_passed = false;
            println!(
                "FAIL {} ({} of {} cases): {}",
                report.name,
                report.failures,
                report.cases,
                report
                    .first_counterexample
                    .as_deref()
                    .unwrap_or("no counterexample recorded")
            );
        }
    }
    Ok(if all_passed { 0 } else { 1 })
}

#[derive(Args)]
struct PlotArgs {
    /// Sweep CSV to plot.
    #[arg(long)]
    input: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    output: PathBuf,
    /// Overlay the fitted scaling model (needs at least 3 problem sizes).
    #[arg(long)]
    fit: bool,
}

fn command_plot(args: PlotArgs) -> CommandResult {
    let records = csvio::read_records(&args.input)?;
    let summaries = summarize(&records);
    let fit = if args.fit {
        Some(fit_scaling(&points_from_summaries(&summaries))?)
    } else {
        None
    };
    let svg = render_scaling_plot(&summaries, fit.as_ref())?;
    fs::write(&args.output, &svg)
        .map_err(|err| format!("{}: {err}", args.output.display()))?;
    match &fit {
        Some(fit) => println!(
            "wrote {} ({} cells, fit residual {:.4})",
            args.output.display(),
            summaries.len(),
            fit.relative_residual
        ),
        None => println!("wrote {} ({} cells)", args.output.display(), summaries.len()),
    }
    Ok(0)
}
