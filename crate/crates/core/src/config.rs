use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::buckets::BucketTable;
use crate::info::{LogBase, DEFAULT_CAP_BITS};

/// Upper bound on displayed alternatives per position.
pub const MAX_TOP_K: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("top_k must be between 1 and {MAX_TOP_K}, got {0}")]
    TopK(usize),
    #[error("formulaic threshold must be positive, got {0}")]
    Threshold(f64),
    #[error("formulaic minimum run length must be at least 2, got {0}")]
    MinLen(usize),
    #[error("window stride fraction must lie in (0, 1], got {0}")]
    Stride(f64),
    #[error("zero-probability cap must be positive, got {0}")]
    Cap(f64),
    #[error("invalid option: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaicConfig {
    /// Maximum word surprisal inside a run, in the configured log unit.
    pub threshold: f64,
    pub min_len: usize,
}

impl Default for FormulaicConfig {
    fn default() -> Self {
        FormulaicConfig { threshold: 1.0, min_len: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlitterConfig {
    pub log_base: LogBase,
    pub top_k: usize,
    pub buckets: BucketTable,
    /// Surprisal reported for zero-probability tokens, in bits.
    pub zero_probability_cap_bits: f64,
    pub formulaic: FormulaicConfig,
    /// Window stride as a fraction of the backend's context length.
    pub stride_fraction: f64,
}

impl Default for GlitterConfig {
    fn default() -> Self {
        GlitterConfig {
            log_base: LogBase::BITS,
            top_k: MAX_TOP_K,
            buckets: BucketTable::default(),
            zero_probability_cap_bits: DEFAULT_CAP_BITS,
            formulaic: FormulaicConfig::default(),
            stride_fraction: 0.5,
        }
    }
}

impl GlitterConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=MAX_TOP_K).contains(&self.top_k) {
            return Err(ConfigError::TopK(self.top_k));
        }
        if !(self.formulaic.threshold > 0.0) || !self.formulaic.threshold.is_finite() {
            return Err(ConfigError::Threshold(self.formulaic.threshold));
        }
        if self.formulaic.min_len < 2 {
            return Err(ConfigError::MinLen(self.formulaic.min_len));
        }
        if !(self.stride_fraction > 0.0 && self.stride_fraction <= 1.0) {
            return Err(ConfigError::Stride(self.stride_fraction));
        }
        if !(self.zero_probability_cap_bits > 0.0) || !self.zero_probability_cap_bits.is_finite() {
            return Err(ConfigError::Cap(self.zero_probability_cap_bits));
        }
        Ok(())
    }

    /// Surprisal cap expressed in the configured log unit.
    pub fn cap(&self) -> f64 {
        self.log_base.from_bits(self.zero_probability_cap_bits)
    }

    /// Stable short hash of the configuration.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(&serde_json::to_value(self).expect("config serializes")).expect("value serializes");
        let hash = Sha256::digest(&canonical);
        hex::encode(&hash[..8])
    }

    pub fn apply(&self, overrides: &ConfigOverrides) -> Result<GlitterConfig, ConfigError> {
        let mut c = self.clone();
        if let Some(b) = overrides.log_base {
            c.log_base = LogBase::new(b).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if let Some(k) = overrides.top_k {
            c.top_k = k;
        }
        if let Some(t) = overrides.formulaic_threshold {
            c.formulaic.threshold = t;
        }
        if let Some(m) = overrides.formulaic_min_len {
            c.formulaic.min_len = m;
        }
        if let Some(s) = overrides.stride_fraction {
            c.stride_fraction = s;
        }
        if let Some(b) = &overrides.bucket_upper_bounds {
            c.buckets = BucketTable::new(b).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if let Some(cap) = overrides.zero_probability_cap_bits {
            c.zero_probability_cap_bits = cap;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Partial configuration, as accepted from API requests and CLI flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(default)]
    pub log_base: Option<f64>,
    #[serde(default)]
    pub top_k: Option<usize>,
    #[serde(default)]
    pub formulaic_threshold: Option<f64>,
    #[serde(default)]
    pub formulaic_min_len: Option<usize>,
    #[serde(default)]
    pub stride_fraction: Option<f64>,
    #[serde(default)]
    pub bucket_upper_bounds: Option<Vec<u64>>,
    #[serde(default)]
    pub zero_probability_cap_bits: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_digest_is_stable() {
        let c = GlitterConfig::default();
        c.validate().unwrap();
        assert_eq!(c.digest(), GlitterConfig::default().digest());
        assert_eq!(c.digest().len(), 16);
        assert_eq!(c.cap(), 64.0);
    }

    #[test]
    fn overrides_change_digest_and_validate() {
        let c = GlitterConfig::default();
        let o = ConfigOverrides { top_k: Some(3), ..Default::default() };
        let c2 = c.apply(&o).unwrap();
        assert_eq!(c2.top_k, 3);
        assert_ne!(c.digest(), c2.digest());
        assert_eq!(c.apply(&ConfigOverrides { top_k: Some(0), ..Default::default() }), Err(ConfigError::TopK(0)));
        assert_eq!(
            c.apply(&ConfigOverrides { stride_fraction: Some(1.5), ..Default::default() }),
            Err(ConfigError::Stride(1.5))
        );
        assert_eq!(
            c.apply(&ConfigOverrides { formulaic_min_len: Some(1), ..Default::default() }),
            Err(ConfigError::MinLen(1))
        );
        assert!(c.apply(&ConfigOverrides { log_base: Some(0.5), ..Default::default() }).is_err());
    }

    #[test]
    fn unknown_override_keys_are_rejected() {
        assert!(serde_json::from_str::<ConfigOverrides>(r#"{"top_k": 2}"#).is_ok());
        assert!(serde_json::from_str::<ConfigOverrides>(r#"{"colour": "red"}"#).is_err());
    }
}
