//! Probability models over fixed-length bitstrings, and run configuration.
//!
//! The model is a product distribution: position `i` is 1 with probability
//! `probs[i]`, independently. Updates blend the old vector with the bit
//! frequencies of the selected individuals and then clamp every entry into
//! the margin interval `[1/n, 1 - 1/n]`, so no marginal ever fixates.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::bits::Bitstring;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginalVector {
    probs: Vec<f64>,
}

impl MarginalVector {
    /// The standard initial model `(1/2, ..., 1/2)`.
    pub fn uniform(n: usize) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::DimensionTooSmall { n });
        }
        Ok(MarginalVector {
            probs: vec![0.5; n],
        })
    }

    /// Override for the initial model. Entries must already lie inside the
    /// margins, so the margin invariant holds from generation zero onward.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, ModelError> {
        let n = probs.len();
        if n < 2 {
            return Err(ModelError::DimensionTooSmall { n });
        }
        let (lo, hi) = margins(n);
        for (index, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < lo || value > hi {
                return Err(ModelError::EntryOutsideMargins { index, value });
            }
        }
        Ok(MarginalVector { probs })
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn lower_margin(&self) -> f64 {
        margins(self.n()).0
    }

    pub fn upper_margin(&self) -> f64 {
        margins(self.n()).1
    }

    /// Draws one individual. Consumes exactly one uniform draw per position,
    /// in position order, so a run's random stream is reproducible from the
    /// seed alone.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Bitstring {
        self.probs.iter().map(|&p| rng.gen::<f64>() < p).collect()
    }

    /// Next model: `(1 - eta) * probs[i] + eta * freq[i]`, where `freq` is
    /// the per-position one-frequency over `selected`, clamped into the
    /// margins afterwards (never before).
    pub fn update(&self, selected: &[Bitstring], eta: f64) -> Result<Self, ModelError> {
        if selected.is_empty() {
            return Err(ModelError::EmptySelection);
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(ModelError::LearningRateOutOfRange { eta });
        }
        let n = self.n();
        for x in selected {
            if x.len() != n {
                return Err(ModelError::LengthMismatch {
                    expected: n,
                    found: x.len(),
                });
            }
        }
        let mu = selected.len() as f64;
        let (lo, hi) = margins(n);
        let probs = (0..n)
            .map(|i| {
                let ones = selected.iter().filter(|x| x.get(i)).count() as f64;
                let blended = (1.0 - eta) * self.probs[i] + eta * ones / mu;
                blended.clamp(lo, hi)
            })
            .collect();
        Ok(MarginalVector { probs })
    }
}

fn margins(n: usize) -> (f64, f64) {
    let lo = 1.0 / n as f64;
    (lo, 1.0 - lo)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    DimensionTooSmall { n: usize },
    EntryOutsideMargins { index: usize, value: f64 },
    EmptySelection,
    LearningRateOutOfRange { eta: f64 },
    LengthMismatch { expected: usize, found: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::DimensionTooSmall { n } => {
                write!(f, "model needs at least 2 positions, got {n}")
            }
            ModelError::EntryOutsideMargins { index, value } => write!(
                f,
                "initial probability {value} at position {index} lies outside the margins"
            ),
            ModelError::EmptySelection => write!(f, "cannot update from an empty selection"),
            ModelError::LearningRateOutOfRange { eta } => {
                write!(f, "learning rate must be in (0, 1], got {eta}")
            }
            ModelError::LengthMismatch { expected, found } => write!(
                f,
                "selected individual has length {found}, model has {expected} positions"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

/// Parameters of one run: `lambda` offspring per generation, `mu` survivors
/// of truncation selection, learning rate `eta` (1 recovers UMDA), and a
/// generation budget.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PbilConfig {
    pub n: usize,
    pub lambda: usize,
    pub mu: usize,
    pub eta: f64,
    pub seed: u64,
    pub max_generations: u64,
}

impl PbilConfig {
    /// Config with the default budget `ceil(50 * (n ln λ + n²/λ))`.
    pub fn new(
        n: usize,
        lambda: usize,
        mu: usize,
        eta: f64,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        Self::with_budget(n, lambda, mu, eta, seed, Self::default_budget(n, lambda))
    }

    pub fn with_budget(
        n: usize,
        lambda: usize,
        mu: usize,
        eta: f64,
        seed: u64,
        max_generations: u64,
    ) -> Result<Self, ConfigError> {
        if n < 2 {
            return Err(ConfigError::DimensionTooSmall { n });
        }
        if lambda == 0 {
            return Err(ConfigError::EmptyPopulation);
        }
        if mu == 0 || mu > lambda {
            return Err(ConfigError::SelectionSize { mu, lambda });
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(ConfigError::LearningRateOutOfRange { eta });
        }
        if max_generations == 0 {
            return Err(ConfigError::EmptyBudget);
        }
        Ok(PbilConfig {
            n,
            lambda,
            mu,
            eta,
            seed,
            max_generations,
        })
    }

    /// Selection ratio μ/λ (written γ₀ in the bound calculators).
    pub fn selection_ratio(&self) -> f64 {
        self.mu as f64 / self.lambda as f64
    }

    /// Default generation budget `ceil(50 * (n ln λ + n²/λ))`: a wide
    /// multiple of the expected-runtime scale, so hitting it signals a
    /// stalled run rather than an unlucky one.
    pub fn default_budget(n: usize, lambda: usize) -> u64 {
        let nf = n as f64;
        let lam = lambda as f64;
        let budget = (50.0 * (nf * lam.ln() + nf * nf / lam)).ceil();
        (budget as u64).max(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    DimensionTooSmall { n: usize },
    EmptyPopulation,
    SelectionSize { mu: usize, lambda: usize },
    LearningRateOutOfRange { eta: f64 },
    EmptyBudget,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::DimensionTooSmall { n } => {
                write!(f, "problem size must be at least 2, got {n}")
            }
            ConfigError::EmptyPopulation => write!(f, "offspring population must not be empty"),
            ConfigError::SelectionSize { mu, lambda } => {
                write!(f, "mu must satisfy 1 <= mu <= lambda, got mu={mu}, lambda={lambda}")
            }
            ConfigError::LearningRateOutOfRange { eta } => {
                write!(f, "learning rate must be in (0, 1], got {eta}")
            }
            ConfigError::EmptyBudget => write!(f, "generation budget must be at least 1"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}
