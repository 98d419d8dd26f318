//! LeadingOnes and BinVal fitness, their shared level structure, and
//! ranking keys.
//!
//! Both problems partition the search space into the same levels: the level
//! of a string is the length of its leading-ones prefix. For LeadingOnes
//! that is the fitness itself. For BinVal it holds because position weights
//! halve front to back, so a string's first 0-bit caps its value strictly
//! below the smallest value of the next level; the exhaustive tests verify
//! those value intervals directly.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigUint;

use crate::bits::Bitstring;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Problem {
    LeadingOnes,
    BinVal,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::LeadingOnes => "leadingones",
            Problem::BinVal => "binval",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Problem {
    type Err = ParseProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("leadingones") {
            Ok(Problem::LeadingOnes)
        } else if s.eq_ignore_ascii_case("binval") {
            Ok(Problem::BinVal)
        } else {
            Err(ParseProblemError(String::from(s)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseProblemError(pub String);

impl fmt::Display for ParseProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown problem {:?} (expected \"leadingones\" or \"binval\")",
            self.0
        )
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseProblemError {}

/// Number of leading ones; the LeadingOnes fitness and the level of the
/// string under either problem.
pub fn leading_ones(x: &Bitstring) -> usize {
    x.leading_ones()
}

/// Exact BinVal value: position `i` (0-based) contributes `2^(n-1-i)` when
/// set. Arbitrary precision, so lengths beyond 64 bits are exact.
pub fn binval_exact(x: &Bitstring) -> BigUint {
    let mut acc = BigUint::from(0u32);
    for bit in x.iter() {
        acc <<= 1;
        if bit {
            acc += 1u32;
        }
    }
    acc
}

/// BinVal order of two equal-length strings without materializing the
/// values: most-significant-first lexicographic comparison of the bits.
pub fn binval_compare(x: &Bitstring, y: &Bitstring) -> Result<Ordering, FitnessError> {
    if x.len() != y.len() {
        return Err(FitnessError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    for (wx, wy) in x.words().iter().zip(y.words()) {
        let diff = wx ^ wy;
        if diff != 0 {
            // The lowest set bit of the difference is the most significant
            // position where the strings disagree.
            let first = diff.trailing_zeros();
            return if (wx >> first) & 1 == 1 {
                Ok(Ordering::Greater)
            } else {
                Ok(Ordering::Less)
            };
        }
    }
    Ok(Ordering::Equal)
}

/// Level of `x` under the problem's level partition; level `n` is the
/// all-ones optimum.
pub fn level_of(x: &Bitstring, problem: Problem) -> usize {
    match problem {
        // Identical by construction: a BinVal level is delimited by the
        // first 0-bit exactly like a LeadingOnes level.
        Problem::LeadingOnes | Problem::BinVal => x.leading_ones(),
    }
}

/// Fitness order of two equal-length strings under the problem.
pub fn compare(problem: Problem, x: &Bitstring, y: &Bitstring) -> Result<Ordering, FitnessError> {
    if x.len() != y.len() {
        return Err(FitnessError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    match problem {
        Problem::LeadingOnes => Ok(x.leading_ones().cmp(&y.leading_ones())),
        Problem::BinVal => binval_compare(x, y),
    }
}

/// A string's fitness as a sortable, reportable key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FitnessKey {
    /// Count of leading ones.
    LeadingOnes(usize),
    /// The bits themselves, ordered most-significant-first.
    BinVal(Bitstring),
}

impl FitnessKey {
    pub fn of(x: &Bitstring, problem: Problem) -> Self {
        match problem {
            Problem::LeadingOnes => FitnessKey::LeadingOnes(x.leading_ones()),
            Problem::BinVal => FitnessKey::BinVal(x.clone()),
        }
    }

    /// Exact fitness value for reporting.
    pub fn value(&self) -> BigUint {
        match self {
            FitnessKey::LeadingOnes(count) => BigUint::from(*count),
            FitnessKey::BinVal(bits) => binval_exact(bits),
        }
    }

    /// Order within the same problem; keys of different problems or lengths
    /// do not compare.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, FitnessError> {
        match (self, other) {
            (FitnessKey::LeadingOnes(a), FitnessKey::LeadingOnes(b)) => Ok(a.cmp(b)),
            (FitnessKey::BinVal(a), FitnessKey::BinVal(b)) => binval_compare(a, b),
            _ => Err(FitnessError::KindMismatch),
        }
    }
}

impl PartialOrd for FitnessKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FitnessError {
    LengthMismatch { left: usize, right: usize },
    KindMismatch,
}

impl fmt::Display for FitnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitnessError::LengthMismatch { left, right } => {
                write!(f, "cannot compare strings of lengths {left} and {right}")
            }
            FitnessError::KindMismatch => write!(f, "cannot compare keys of different problems"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FitnessError {}
