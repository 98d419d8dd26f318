//! Seeded trial grids over problem sizes.
//!
//! A sweep takes a list of problem sizes, a population-size rule, a
//! selection ratio, and a trial count, and runs every (size, trial) cell
//! with a seed derived from the base seed and the cell coordinates. Cell
//! seeds depend only on the coordinates, never on execution order, so a
//! grid can be re-run with more workers, or extended with more sizes,
//! without changing any existing record.

use std::fmt;
use std::str::FromStr;

use pbil_core::{derive_seed, run_pbil, PbilConfig, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Population size as a function of the problem size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LambdaRule {
    /// `ceil(c * ln n)`.
    LogN { c: f64 },
    /// `ceil(c * n^k)`; `k = 0` gives a constant population.
    PowN { c: f64, k: f64 },
    /// Explicit population per problem size; a single entry applies to
    /// every size.
    List(Vec<usize>),
}

impl LambdaRule {
    /// Population size for the `index`-th problem size `n` of the sweep.
    pub fn lambda_for(&self, index: usize, n: usize, sizes: usize) -> Result<usize, SweepError> {
        let value = match self {
            LambdaRule::LogN { c } => (c * (n as f64).ln()).ceil(),
            LambdaRule::PowN { c, k } => (c * (n as f64).powf(*k)).ceil(),
            LambdaRule::List(values) => {
                return if values.len() == 1 {
                    Ok(values[0])
                } else if values.len() == sizes {
                    Ok(values[index])
                } else {
                    Err(SweepError::LambdaListLength {
                        expected: sizes,
                        found: values.len(),
                    })
                };
            }
        };
        if !value.is_finite() || value > usize::MAX as f64 {
            return Err(SweepError::LambdaOverflow { n });
        }
        Ok((value as usize).max(1))
    }

    fn validate(&self) -> Result<(), SweepError> {
        let ok = match self {
            LambdaRule::LogN { c } => c.is_finite() && *c > 0.0,
            LambdaRule::PowN { c, k } => c.is_finite() && *c > 0.0 && k.is_finite() && *k >= 0.0,
            LambdaRule::List(values) => !values.is_empty() && values.iter().all(|&v| v >= 1),
        };
        if ok {
            Ok(())
        } else {
            Err(SweepError::ParseLambdaRule(format!("{self}")))
        }
    }
}

impl fmt::Display for LambdaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaRule::LogN { c } => write!(f, "{c}*ln(n)"),
            LambdaRule::PowN { c, k } => write!(f, "{c}*n^{k}"),
            LambdaRule::List(values) => {
                let mut first = true;
                for v in values {
                    if !first {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                    first = false;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for LambdaRule {
    type Err = SweepError;

    /// Accepted forms: `c*ln(n)`, `ln(n)`, `c*n^k`, `n^k`, `c*n`, `n`, or a
    /// comma-separated list of integers (a single integer fixes the
    /// population for every size).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let parse_err = || SweepError::ParseLambdaRule(s.to_string());
        let coefficient = |prefix: &str| -> Result<f64, SweepError> {
            if prefix.is_empty() {
                Ok(1.0)
            } else {
                prefix
                    .strip_suffix('*')
                    .ok_or_else(parse_err)?
                    .parse::<f64>()
                    .map_err(|_| parse_err())
            }
        };

        let rule = if let Some(prefix) = compact.strip_suffix("ln(n)") {
            LambdaRule::LogN {
                c: coefficient(prefix)?,
            }
        } else if let Some(pos) = compact.find("n^") {
            let c = coefficient(&compact[..pos])?;
            let k = compact[pos + 2..].parse::<f64>().map_err(|_| parse_err())?;
            LambdaRule::PowN { c, k }
        } else if let Some(prefix) = compact.strip_suffix('n') {
            LambdaRule::PowN {
                c: coefficient(prefix)?,
                k: 1.0,
            }
        } else {
            let values = compact
                .split(',')
                .map(|part| part.parse::<usize>().map_err(|_| parse_err()))
                .collect::<Result<Vec<_>, _>>()?;
            LambdaRule::List(values)
        };
        rule.validate()?;
        Ok(rule)
    }
}

impl TryFrom<String> for LambdaRule {
    type Error = SweepError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<LambdaRule> for String {
    fn from(rule: LambdaRule) -> String {
        rule.to_string()
    }
}

/// Generation budget per run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BudgetRule {
    /// The built-in budget `ceil(50 * (n ln λ + n²/λ))`.
    Default,
    /// A multiple of the built-in budget.
    Scaled { factor: f64 },
    /// A fixed number of generations.
    Fixed(u64),
}

impl BudgetRule {
    pub fn budget_for(&self, n: usize, lambda: usize) -> u64 {
        match self {
            BudgetRule::Default => PbilConfig::default_budget(n, lambda),
            BudgetRule::Scaled { factor } => {
                let base = PbilConfig::default_budget(n, lambda) as f64;
                ((factor * base).ceil() as u64).max(1)
            }
            BudgetRule::Fixed(generations) => *generations,
        }
    }
}

impl Default for BudgetRule {
    fn default() -> Self {
        BudgetRule::Default
    }
}

impl fmt::Display for BudgetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetRule::Default => write!(f, "default"),
            BudgetRule::Scaled { factor } => write!(f, "{factor}*default"),
            BudgetRule::Fixed(generations) => write!(f, "{generations}"),
        }
    }
}

impl FromStr for BudgetRule {
    type Err = SweepError;

    /// Accepted forms: `default`, `f*default`, or a positive integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let parse_err = || SweepError::ParseBudgetRule(s.to_string());
        if compact.eq_ignore_ascii_case("default") {
            return Ok(BudgetRule::Default);
        }
        if let Some(prefix) = compact
            .strip_suffix("*default")
            .or_else(|| compact.strip_suffix("*DEFAULT"))
        {
            let factor = prefix.parse::<f64>().map_err(|_| parse_err())?;
            if !(factor.is_finite() && factor > 0.0) {
                return Err(parse_err());
            }
            return Ok(BudgetRule::Scaled { factor });
        }
        let generations = compact.parse::<u64>().map_err(|_| parse_err())?;
        if generations == 0 {
            return Err(parse_err());
        }
        Ok(BudgetRule::Fixed(generations))
    }
}

impl TryFrom<String> for BudgetRule {
    type Error = SweepError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<BudgetRule> for String {
    fn from(rule: BudgetRule) -> String {
        rule.to_string()
    }
}

/// Everything needed to reproduce a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub problem: Problem,
    pub n_values: Vec<usize>,
    pub lambda_rule: LambdaRule,
    /// Selection ratio; `mu = max(1, round(gamma0 * lambda))`.
    pub gamma0: f64,
    pub eta: f64,
    pub trials: u64,
    pub base_seed: u64,
    #[serde(default)]
    pub budget_rule: BudgetRule,
}

impl SweepSpec {
    fn validate(&self) -> Result<(), SweepError> {
        if self.n_values.is_empty() {
            return Err(SweepError::NoSizes);
        }
        if !(self.gamma0 > 0.0 && self.gamma0 <= 1.0) {
            return Err(SweepError::InvalidSelectionRatio {
                gamma0: self.gamma0,
            });
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(SweepError::InvalidLearningRate { eta: self.eta });
        }
        if self.trials == 0 {
            return Err(SweepError::NoTrials);
        }
        self.lambda_rule.validate()
    }

    /// Selection size for a population of `lambda`.
    pub fn mu_for(&self, lambda: usize) -> usize {
        (((self.gamma0 * lambda as f64).round() as usize).max(1)).min(lambda)
    }
}

/// One run of one sweep cell, in the exact column order of the CSV files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub problem: Problem,
    pub n: usize,
    pub lambda: usize,
    pub mu: usize,
    pub eta: f64,
    pub seed: u64,
    pub generations: u64,
    pub evaluations: u64,
    pub success: bool,
    /// True when the run hit the generation budget before the optimum.
    pub censored: bool,
}

/// A problem size the sweep could not run, and why.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedCell {
    pub n: usize,
    pub reason: String,
}

/// All records of a sweep (cell-major, trial order within each cell) plus
/// any skipped sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<TrialRecord>,
    pub skipped: Vec<SkippedCell>,
}

struct TrialJob {
    n: usize,
    lambda: usize,
    mu: usize,
    budget: u64,
    seed: u64,
}

/// Runs the sweep, optionally capping the worker-thread count. Record
/// order and content depend only on the spec, not on `workers`.
pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepOutcome, SweepError> {
    spec.validate()?;

    let mut jobs = Vec::new();
    let mut skipped = Vec::new();
    for (index, &n) in spec.n_values.iter().enumerate() {
        let lambda = match spec.lambda_rule.lambda_for(index, n, spec.n_values.len()) {
            Ok(lambda) => lambda,
            Err(err) => match err {
                // A wrong-length list is a spec error, not a cell to skip.
                SweepError::LambdaListLength { .. } => return Err(err),
                other => {
                    skipped.push(SkippedCell {
                        n,
                        reason: other.to_string(),
                    });
                    continue;
                }
            },
        };
        let mu = spec.mu_for(lambda);
        let budget = spec.budget_rule.budget_for(n, lambda);
        // Validate the cell once up front; per-trial configs differ only
        // in the seed.
        if let Err(err) = PbilConfig::with_budget(n, lambda, mu, spec.eta, 0, budget) {
            skipped.push(SkippedCell {
                n,
                reason: err.to_string(),
            });
            continue;
        }
        for trial in 0..spec.trials {
            jobs.push(TrialJob {
                n,
                lambda,
                mu,
                budget,
                seed: derive_seed(spec.base_seed, n as u64, trial),
            });
        }
    }

    let problem = spec.problem;
    let eta = spec.eta;
    let execute = |job: &TrialJob| -> Result<TrialRecord, SweepError> {
        let config = PbilConfig::with_budget(job.n, job.lambda, job.mu, eta, job.seed, job.budget)
            .map_err(|err| SweepError::Config(err.to_string()))?;
        let result = run_pbil(config, problem).map_err(|err| SweepError::Run(err.to_string()))?;
        Ok(TrialRecord {
            problem,
            n: job.n,
            lambda: job.lambda,
            mu: job.mu,
            eta,
            seed: job.seed,
            generations: result.generations,
            evaluations: result.evaluations,
            success: result.success,
            censored: !result.success,
        })
    };

    let results: Vec<Result<TrialRecord, SweepError>> = match workers {
        Some(count) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build()
                .map_err(|err| SweepError::ThreadPool(err.to_string()))?;
            pool.install(|| jobs.par_iter().map(execute).collect())
        }
        None => jobs.par_iter().map(execute).collect(),
    };

    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(SweepOutcome { records, skipped })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepError {
    ParseLambdaRule(String),
    ParseBudgetRule(String),
    LambdaListLength { expected: usize, found: usize },
    LambdaOverflow { n: usize },
    NoSizes,
    NoTrials,
    InvalidSelectionRatio { gamma0: f64 },
    InvalidLearningRate { eta: f64 },
    Config(String),
    Run(String),
    ThreadPool(String),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::ParseLambdaRule(s) => write!(
                f,
                "cannot parse population rule {s:?} (expected c*ln(n), c*n^k, c*n, or an integer list)"
            ),
            SweepError::ParseBudgetRule(s) => write!(
                f,
                "cannot parse budget rule {s:?} (expected \"default\", f*default, or a positive integer)"
            ),
            SweepError::LambdaListLength { expected, found } => write!(
                f,
                "population list has {found} entries but the sweep has {expected} problem sizes"
            ),
            SweepError::LambdaOverflow { n } => {
                write!(f, "population rule overflows at n = {n}")
            }
            SweepError::NoSizes => write!(f, "sweep needs at least one problem size"),
            SweepError::NoTrials => write!(f, "sweep needs at least one trial"),
            SweepError::InvalidSelectionRatio { gamma0 } => {
                write!(f, "selection ratio must be in (0, 1], got {gamma0}")
            }
            SweepError::InvalidLearningRate { eta } => {
                write!(f, "learning rate must be in (0, 1], got {eta}")
            }
            SweepError::Config(s) | SweepError::Run(s) | SweepError::ThreadPool(s) => {
                f.write_str(s)
            }
        }
    }
}

impl std::error::Error for SweepError {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_rules_parse_and_round_trip() {
        let cases = [
            ("6*ln(n)", LambdaRule::LogN { c: 6.0 }),
            ("ln(n)", LambdaRule::LogN { c: 1.0 }),
            ("2*n^0.5", LambdaRule::PowN { c: 2.0, k: 0.5 }),
            ("n^2", LambdaRule::PowN { c: 1.0, k: 2.0 }),
            ("3*n", LambdaRule::PowN { c: 3.0, k: 1.0 }),
            ("n", LambdaRule::PowN { c: 1.0, k: 1.0 }),
            ("25", LambdaRule::List(vec![25])),
            ("10, 20,30", LambdaRule::List(vec![10, 20, 30])),
        ];
        for (text, expected) in cases {
            let rule: LambdaRule = text.parse().unwrap();
            assert_eq!(rule, expected, "parsing {text:?}");
            let round_trip: LambdaRule = rule.to_string().parse().unwrap();
            assert_eq!(round_trip, rule, "round-tripping {text:?}");
        }
        assert!("foo".parse::<LambdaRule>().is_err());
        assert!("-2*ln(n)".parse::<LambdaRule>().is_err());
        assert!("0".parse::<LambdaRule>().is_err());
        assert!("".parse::<LambdaRule>().is_err());
    }

    #[test]
    fn lambda_rules_evaluate() {
        let rule: LambdaRule = "6*ln(n)".parse().unwrap();
        // 6 ln 32 = 20.79... -> 21
        assert_eq!(rule.lambda_for(0, 32, 3).unwrap(), 21);
        assert_eq!(rule.lambda_for(1, 64, 3).unwrap(), 25);
        assert_eq!(rule.lambda_for(2, 128, 3).unwrap(), 30);

        let rule: LambdaRule = "0.5*n^2".parse().unwrap();
        assert_eq!(rule.lambda_for(0, 10, 1).unwrap(), 50);

        let rule: LambdaRule = "40".parse().unwrap();
        assert_eq!(rule.lambda_for(5, 999, 7).unwrap(), 40);

        let rule: LambdaRule = "10,20".parse().unwrap();
        assert_eq!(rule.lambda_for(1, 64, 2).unwrap(), 20);
        assert!(matches!(
            rule.lambda_for(0, 32, 3),
            Err(SweepError::LambdaListLength {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn budget_rules_parse_and_evaluate() {
        assert_eq!("default".parse::<BudgetRule>().unwrap(), BudgetRule::Default);
        assert_eq!(
            "10*default".parse::<BudgetRule>().unwrap(),
            BudgetRule::Scaled { factor: 10.0 }
        );
        assert_eq!("5000".parse::<BudgetRule>().unwrap(), BudgetRule::Fixed(5000));
        assert!("0".parse::<BudgetRule>().is_err());
        assert!("x*default".parse::<BudgetRule>().is_err());

        let base = PbilConfig::default_budget(64, 25);
        assert_eq!(BudgetRule::Default.budget_for(64, 25), base);
        assert_eq!(
            BudgetRule::Scaled { factor: 2.0 }.budget_for(64, 25),
            2 * base
        );
        assert_eq!(BudgetRule::Fixed(7).budget_for(64, 25), 7);
    }

    fn small_spec() -> SweepSpec {
        SweepSpec {
            problem: Problem::LeadingOnes,
            n_values: vec![8, 12],
            lambda_rule: "30".parse().unwrap(),
            gamma0: 0.25,
            eta: 1.0,
            trials: 4,
            base_seed: 99,
            budget_rule: BudgetRule::Default,
        }
    }

    #[test]
    fn sweep_produces_cell_major_deterministic_records() {
        let spec = small_spec();
        let outcome = run_sweep(&spec, Some(1)).unwrap();
        assert!(outcome.skipped.is_empty());
        assert_eq!(outcome.records.len(), 8);
        let ns: Vec<usize> = outcome.records.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![8, 8, 8, 8, 12, 12, 12, 12]);
        for record in &outcome.records {
            assert_eq!(record.lambda, 30);
            assert_eq!(record.mu, 8); // round(0.25 * 30)
            assert_eq!(record.censored, !record.success);
            assert_eq!(record.evaluations, record.generations * 30);
        }

        // Worker count must not change anything.
        let again = run_sweep(&spec, Some(4)).unwrap();
        assert_eq!(outcome, again);
    }

    #[test]
    fn sweep_seeds_depend_on_coordinates_not_order() {
        let spec = small_spec();
        let outcome = run_sweep(&spec, None).unwrap();
        for (index, &n) in spec.n_values.iter().enumerate() {
            for trial in 0..spec.trials {
                let record = &outcome.records[index * spec.trials as usize + trial as usize];
                assert_eq!(record.seed, derive_seed(spec.base_seed, n as u64, trial));
            }
        }

        // Extending the grid with a new size leaves old cells untouched.
        let mut extended = spec.clone();
        extended.n_values.push(16);
        let bigger = run_sweep(&extended, None).unwrap();
        assert_eq!(&bigger.records[..8], &outcome.records[..]);
    }

    #[test]
    fn sweep_skips_impossible_sizes() {
        let mut spec = small_spec();
        spec.n_values = vec![1, 8];
        let outcome = run_sweep(&spec, None).unwrap();
        assert_eq!(outcome.skipped.len(), 1);
        assert_eq!(outcome.skipped[0].n, 1);
        assert_eq!(outcome.records.len(), 4);
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let mut spec = small_spec();
        spec.trials = 0;
        assert!(matches!(run_sweep(&spec, None), Err(SweepError::NoTrials)));

        let mut spec = small_spec();
        spec.gamma0 = 0.0;
        assert!(matches!(
            run_sweep(&spec, None),
            Err(SweepError::InvalidSelectionRatio { .. })
        ));

        let mut spec = small_spec();
        spec.lambda_rule = LambdaRule::List(vec![10, 20, 30]);
        assert!(matches!(
            run_sweep(&spec, None),
            Err(SweepError::LambdaListLength { .. })
        ));
    }

    #[test]
    fn specs_serialize_with_readable_rules() {
        let spec = small_spec();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"lambda_rule\":\"30\""));
        let back: SweepSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);

        // budget_rule defaults when omitted.
        let partial = r#"{
            "problem": "binval",
            "n_values": [16],
            "lambda_rule": "6*ln(n)",
            "gamma0": 0.25,
            "eta": 0.5,
            "trials": 2,
            "base_seed": 1
        }"#;
        let spec: SweepSpec = serde_json::from_str(partial).unwrap();
        assert_eq!(spec.budget_rule, BudgetRule::Default);
        assert_eq!(spec.problem, Problem::BinVal);
    }

    #[test]
    fn mu_never_leaves_bounds() {
        let mut spec = small_spec();
        spec.gamma0 = 1.0;
        assert_eq!(spec.mu_for(30), 30);
        spec.gamma0 = 0.001;
        assert_eq!(spec.mu_for(30), 1);
    }
}
