//! The estimation-of-distribution loop: sample a population from the
//! marginal model, keep the fittest slice, fold it back into the model.
//!
//! [`PbilRun`] exposes the loop one generation at a time for callers that
//! want to watch the model evolve; [`run_pbil`] and [`run_umda`] drive it to
//! the optimum or a budget and return a summary.

use alloc::vec::Vec;
use core::fmt;
use core::num::NonZeroU64;

use crate::bits::Bitstring;
use crate::fitness::{binval_compare, Problem};
use crate::model::{MarginalVector, ModelError, PbilConfig};
use crate::seed::{rng_from_seed, SampleRng};

/// Indices of the selected individuals, fittest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionOutcome {
    pub selected: Vec<usize>,
}

/// Picks the `mu` fittest individuals of a population, breaking ties by
/// original position (stable sort), and returns their indices in fitness
/// order.
pub fn truncation_select(
    population: &[Bitstring],
    mu: usize,
    problem: Problem,
) -> Result<SelectionOutcome, AlgorithmError> {
    if population.is_empty() {
        return Err(AlgorithmError::EmptyPopulation);
    }
    if mu == 0 || mu > population.len() {
        return Err(AlgorithmError::SelectionSize {
            mu,
            lambda: population.len(),
        });
    }
    let n = population[0].len();
    if population.iter().any(|x| x.len() != n) {
        return Err(AlgorithmError::MixedLengths);
    }
    let mut order: Vec<usize> = (0..population.len()).collect();
    match problem {
        Problem::LeadingOnes => {
            let levels: Vec<usize> = population.iter().map(Bitstring::leading_ones).collect();
            order.sort_by(|&a, &b| levels[b].cmp(&levels[a]));
        }
        Problem::BinVal => {
            // Lengths were checked above, so comparison cannot fail.
            order.sort_by(|&a, &b| {
                binval_compare(&population[b], &population[a])
                    .expect("equal-length bitstrings always compare")
            });
        }
    }
    order.truncate(mu);
    Ok(SelectionOutcome { selected: order })
}

/// What happened in one generation of a [`PbilRun`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationReport {
    /// 1-based generation index.
    pub generation: u64,
    /// Level (number of leading ones) of the fittest individual.
    pub best_level: usize,
    /// Level of the least-fit individual that still made the selection;
    /// everything folded into the model sits at or above this level.
    pub selection_floor_level: usize,
    /// Whether the fittest individual is the all-ones optimum.
    pub optimum_found: bool,
}

/// A stepwise run: owns the model, the scratch population, and the RNG.
#[derive(Clone, Debug)]
pub struct PbilRun {
    config: PbilConfig,
    problem: Problem,
    model: MarginalVector,
    population: Vec<Bitstring>,
    rng: SampleRng,
    generation: u64,
    finished: bool,
}

impl PbilRun {
    pub fn new(config: PbilConfig, problem: Problem) -> Result<Self, AlgorithmError> {
        let model = MarginalVector::uniform(config.n)?;
        Self::with_initial_model(config, problem, model)
    }

    /// Starts from a caller-supplied model instead of the uniform one. The
    /// model length must match `config.n`.
    pub fn with_initial_model(
        config: PbilConfig,
        problem: Problem,
        model: MarginalVector,
    ) -> Result<Self, AlgorithmError> {
        if model.n() != config.n {
            return Err(AlgorithmError::Model(ModelError::LengthMismatch {
                expected: config.n,
                found: model.n(),
            }));
        }
        let rng = rng_from_seed(config.seed);
        Ok(PbilRun {
            population: Vec::with_capacity(config.lambda),
            config,
            problem,
            model,
            rng,
            generation: 0,
            finished: false,
        })
    }

    pub fn config(&self) -> &PbilConfig {
        &self.config
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    /// The model that the *next* call to [`advance`](Self::advance) will
    /// sample from.
    pub fn model(&self) -> &MarginalVector {
        &self.model
    }

    /// The population sampled by the most recent generation.
    pub fn population(&self) -> &[Bitstring] {
        &self.population
    }

    /// Generations completed so far.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// True once the optimum has been sampled; further `advance` calls
    /// would sample from a stale model, so the run refuses them.
    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Runs one generation: sample `lambda` individuals, select the `mu`
    /// fittest, and - unless the optimum appeared - update the model.
    pub fn advance(&mut self) -> Result<GenerationReport, AlgorithmError> {
        if self.finished {
            return Err(AlgorithmError::RunFinished);
        }
        self.population.clear();
        for _ in 0..self.config.lambda {
            self.population.push(self.model.sample(&mut self.rng));
        }
        self.generation += 1;

        let outcome = truncation_select(&self.population, self.config.mu, self.problem)?;
        let best = &self.population[outcome.selected[0]];
        let best_level = best.leading_ones();
        let floor_index = *outcome
            .selected
            .last()
            .expect("selection returns at least one index");
        let selection_floor_level = self.population[floor_index].leading_ones();
        let optimum_found = best_level == self.config.n;

        if optimum_found {
            self.finished = true;
        } else {
            let parents: Vec<Bitstring> = outcome
                .selected
                .iter()
                .map(|&i| self.population[i].clone())
                .collect();
            self.model = self.model.update(&parents, self.config.eta)?;
        }

        Ok(GenerationReport {
            generation: self.generation,
            best_level,
            selection_floor_level,
            optimum_found,
        })
    }
}

/// Optional instrumentation for [`run_pbil_with`].
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Record the best level of every generation.
    pub trace_best: bool,
    /// Record the marginal vector entering generations `1, 1+k, 1+2k, ...`.
    pub snapshot_every: Option<NonZeroU64>,
    /// Start from this model instead of the uniform one.
    pub initial_model: Option<MarginalVector>,
}

/// The marginal vector as it entered a given generation.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSnapshot {
    pub generation: u64,
    pub probs: Vec<f64>,
}

/// Summary of a complete run.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunResult {
    /// Whether the optimum was sampled within the budget.
    pub success: bool,
    /// Generations executed.
    pub generations: u64,
    /// Fitness evaluations spent: `lambda * generations`.
    pub evaluations: u64,
    /// Per-generation best levels, when requested.
    pub best_level_trace: Option<Vec<usize>>,
    /// Periodic model snapshots, when requested.
    pub marginal_snapshots: Option<Vec<ModelSnapshot>>,
}

/// Runs to the optimum or until `config.max_generations`, without traces.
pub fn run_pbil(config: PbilConfig, problem: Problem) -> Result<RunResult, AlgorithmError> {
    run_pbil_with(config, problem, RunOptions::default())
}

/// Runs to the optimum or until `config.max_generations`. Budget
/// exhaustion is a normal outcome (`success: false`), not an error.
pub fn run_pbil_with(
    config: PbilConfig,
    problem: Problem,
    options: RunOptions,
) -> Result<RunResult, AlgorithmError> {
    let budget = config.max_generations;
    let lambda = config.lambda as u64;
    let mut run = match options.initial_model {
        Some(model) => PbilRun::with_initial_model(config, problem, model)?,
        None => PbilRun::new(config, problem)?,
    };
    let mut trace = options.trace_best.then(Vec::new);
    let mut snapshots = options.snapshot_every.map(|_| Vec::new());

    let mut success = false;
    while run.generation() < budget {
        if let (Some(snaps), Some(every)) = (snapshots.as_mut(), options.snapshot_every) {
            // The upcoming generation is generation() + 1; snapshot the
            // model it will sample from on the 1, 1+k, 1+2k, ... schedule.
            let upcoming = run.generation() + 1;
            if (upcoming - 1) % every.get() == 0 {
                snaps.push(ModelSnapshot {
                    generation: upcoming,
                    probs: run.model().probs().to_vec(),
                });
            }
        }
        let report = run.advance()?;
        if let Some(trace) = trace.as_mut() {
            trace.push(report.best_level);
        }
        if report.optimum_found {
            success = true;
            break;
        }
    }

    let generations = run.generation();
    Ok(RunResult {
        success,
        generations,
        evaluations: lambda * generations,
        best_level_trace: trace,
        marginal_snapshots: snapshots,
    })
}

/// Runs the learning-rate-1 special case, where the new model is the
/// clamped column mean of the selected individuals.
pub fn run_umda(config: PbilConfig, problem: Problem) -> Result<RunResult, AlgorithmError> {
    run_umda_with(config, problem, RunOptions::default())
}

/// [`run_umda`] with instrumentation.
pub fn run_umda_with(
    config: PbilConfig,
    problem: Problem,
    options: RunOptions,
) -> Result<RunResult, AlgorithmError> {
    let config = PbilConfig {
        eta: 1.0,
        ..config
    };
    run_pbil_with(config, problem, options)
}

#[derive(Clone, Debug, PartialEq)]
pub enum AlgorithmError {
    EmptyPopulation,
    SelectionSize { mu: usize, lambda: usize },
    MixedLengths,
    RunFinished,
    Model(ModelError),
}

impl From<ModelError> for AlgorithmError {
    fn from(err: ModelError) -> Self {
        AlgorithmError::Model(err)
    }
}

impl fmt::Display for AlgorithmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmError::EmptyPopulation => write!(f, "population is empty"),
            AlgorithmError::SelectionSize { mu, lambda } => {
                write!(f, "cannot select {mu} of {lambda} individuals")
            }
            AlgorithmError::MixedLengths => {
                write!(f, "population mixes bitstrings of different lengths")
            }
            AlgorithmError::RunFinished => {
                write!(f, "run already sampled the optimum; no further generations")
            }
            AlgorithmError::Model(err) => write!(f, "{err}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AlgorithmError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            AlgorithmError::Model(err) => Some(err),
            _ => None,
        }
    }
}
