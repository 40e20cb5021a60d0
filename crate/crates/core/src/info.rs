//! Surprisal, entropy and chain-rule aggregation.
//!
//! All functions are pure and take the logarithm base explicitly. Bits
//! (base 2) are the default everywhere else in the crate, but every identity
//! here holds for any base greater than one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a token in a backend vocabulary.
pub type TokenId = u32;

/// Tolerance used when checking that a distribution is normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Default surprisal assigned to a zero-probability event, in bits.
pub const DEFAULT_CAP_BITS: f64 = 64.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("logarithm base {0} must be finite and greater than 1")]
    InvalidBase(f64),
    #[error("distribution mass is {0}, expected 1")]
    NotNormalized(f64),
    #[error("distribution entries are not sorted at index {0}")]
    Unsorted(usize),
    #[error("complete distribution carries tail mass {0}")]
    TailOnComplete(f64),
    #[error("chain rule needs at least one probability")]
    EmptyChain,
    #[error("rank must be at least 1")]
    ZeroRank,
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ONE: Probability = Probability(1.0);
    pub const ZERO: Probability = Probability(0.0);

    pub fn new(value: f64) -> Result<Self, InfoError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(InfoError::ProbabilityOutOfRange(value))
        }
    }

    /// Builds a probability from a natural-log probability as served by
    /// logprob APIs. Values slightly above zero from rounding clamp to 1.
    pub fn from_ln(logprob: f64) -> Result<Self, InfoError> {
        if logprob.is_nan() {
            return Err(InfoError::ProbabilityOutOfRange(logprob));
        }
        let p = logprob.exp();
        if p > 1.0 && p < 1.0 + NORMALIZATION_TOLERANCE {
            return Ok(Probability::ONE);
        }
        Probability::new(p)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = InfoError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Validated logarithm base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LogBase(f64);

impl LogBase {
    pub const BITS: LogBase = LogBase(2.0);
    pub const NATS: LogBase = LogBase(std::f64::consts::E);

    pub fn new(base: f64) -> Result<Self, InfoError> {
        if base.is_finite() && base > 1.0 {
            Ok(LogBase(base))
        } else {
            Err(InfoError::InvalidBase(base))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `log_base(x)`.
    pub fn log(self, x: f64) -> f64 {
        if self.0 == 2.0 {
            x.log2()
        } else if self.0 == std::f64::consts::E {
            x.ln()
        } else {
            x.ln() / self.0.ln()
        }
    }

    /// `base^x`.
    pub fn pow(self, x: f64) -> f64 {
        if self.0 == 2.0 {
            x.exp2()
        } else if self.0 == std::f64::consts::E {
            x.exp()
        } else {
            self.0.powf(x)
        }
    }

    /// Converts an amount of information in bits into this base's unit.
    pub fn from_bits(self, bits: f64) -> f64 {
        bits / self.0.log2()
    }
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::BITS
    }
}

impl TryFrom<f64> for LogBase {
    type Error = InfoError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        LogBase::new(value)
    }
}

impl From<LogBase> for f64 {
    fn from(b: LogBase) -> f64 {
        b.0
    }
}

/// Information content of an observed event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surprisal {
    pub value: f64,
    /// Set when the event had probability zero and `value` is the cap.
    pub capped: bool,
}

/// `-log_base(p)`, with zero probability mapped to the default cap of
/// [`DEFAULT_CAP_BITS`] expressed in `base`.
pub fn surprisal(p: f64, base: f64) -> Result<Surprisal, InfoError> {
    let base = LogBase::new(base)?;
    surprisal_capped(Probability::new(p)?, base, base.from_bits(DEFAULT_CAP_BITS))
}

/// `-log_base(p)`; `cap` is returned (and flagged) for `p = 0`.
pub fn surprisal_capped(p: Probability, base: LogBase, cap: f64) -> Result<Surprisal, InfoError> {
    let p = p.value();
    if p == 0.0 {
        return Ok(Surprisal { value: cap, capped: true });
    }
    // -log(1) is -0.0; normalize so serialized output never shows "-0".
    let value = -base.log(p) + 0.0;
    Ok(Surprisal { value, capped: false })
}

/// Product of conditional probabilities of consecutive subword tokens.
pub fn chain_rule_probability(subword_probs: &[Probability]) -> Result<Probability, InfoError> {
    if subword_probs.is_empty() {
        return Err(InfoError::EmptyChain);
    }
    let product = subword_probs.iter().map(|p| p.value()).product::<f64>();
    Probability::new(product)
}

/// A next-token distribution, or a top-k truncation of one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenDistribution {
    entries: Vec<(TokenId, f64)>,
    complete: bool,
    tail_mass: f64,
}

impl TokenDistribution {
    /// Validates the entries. `tail_mass` is clamped to zero when tiny negative
    /// values arise from rounding.
    pub fn new(entries: Vec<(TokenId, f64)>, complete: bool, tail_mass: f64) -> Result<Self, InfoError> {
        for &(_, p) in &entries {
            Probability::new(p)?;
        }
        for (i, pair) in entries.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            if a.1 < b.1 || (a.1 == b.1 && a.0 >= b.0) {
                return Err(InfoError::Unsorted(i + 1));
            }
        }
        let tail_mass = if tail_mass < 0.0 && tail_mass > -NORMALIZATION_TOLERANCE {
            0.0
        } else {
            tail_mass
        };
        if tail_mass < 0.0 {
            return Err(InfoError::NotNormalized(1.0 - tail_mass));
        }
        if complete && tail_mass != 0.0 {
            return Err(InfoError::TailOnComplete(tail_mass));
        }
        let mass: f64 = entries.iter().map(|e| e.1).sum::<f64>() + tail_mass;
        if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(InfoError::NotNormalized(mass));
        }
        Ok(TokenDistribution { entries, complete, tail_mass })
    }

    /// Builds a complete distribution from unsorted `(id, p)` pairs.
    pub fn complete_from_unsorted(mut entries: Vec<(TokenId, f64)>) -> Result<Self, InfoError> {
        sort_candidates(&mut entries);
        TokenDistribution::new(entries, true, 0.0)
    }

    /// Builds a truncated distribution whose tail is `1 - Σ entries`.
    pub fn truncated(mut entries: Vec<(TokenId, f64)>) -> Result<Self, InfoError> {
        sort_candidates(&mut entries);
        let covered: f64 = entries.iter().map(|e| e.1).sum();
        TokenDistribution::new(entries, false, 1.0 - covered)
    }

    pub fn entries(&self) -> &[(TokenId, f64)] {
        &self.entries
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }
}

/// Sorts `(id, p)` pairs by descending probability, ascending id on ties.
pub fn sort_candidates(entries: &mut [(TokenId, f64)]) {
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub value: f64,
    /// True when computed from a truncated distribution: the value is then a
    /// lower bound in which the tail counts as a single outcome.
    pub estimate: bool,
}

/// Shannon entropy `-Σ p log p`, with `0 log 0 = 0`.
pub fn entropy(d: &TokenDistribution, base: f64) -> Result<Entropy, InfoError> {
    let base = LogBase::new(base)?;
    let term = |p: f64| if p > 0.0 { -p * base.log(p) } else { 0.0 };
    let mut value: f64 = d.entries.iter().map(|&(_, p)| term(p)).sum();
    if !d.complete {
        value += term(d.tail_mass);
    }
    Ok(Entropy { value: value + 0.0, estimate: !d.complete })
}
