use serde::{Deserialize, Serialize};

use crate::buckets::{BucketIndex, BUCKET_COUNT};
use crate::formulaic::FormulaicRun;
use crate::info::LogBase;

/// Aggregate figures for an annotated document. Means are `None` when the
/// document has no scored words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentStats {
    pub token_count: usize,
    pub word_count: usize,
    pub scored_word_count: usize,
    /// Mean word surprisal over scored words, in the configured log unit.
    pub mean_surprisal: Option<f64>,
    /// `base ^ mean_surprisal`.
    pub perplexity: Option<f64>,
    pub bucket_histogram: [u64; BUCKET_COUNT],
    /// Fraction of scored words that fall inside a formulaic run.
    pub formulaic_coverage: Option<f64>,
}

/// Per-word input to [`DocumentStats::compute`]; `None` surprisal means the
/// word is unscored.
#[derive(Debug, Clone, Copy)]
pub struct WordFigure {
    pub surprisal: Option<f64>,
    pub bucket: BucketIndex,
}

impl DocumentStats {
    pub fn compute(token_count: usize, words: &[WordFigure], runs: &[FormulaicRun], base: LogBase) -> Self {
        let mut histogram = [0u64; BUCKET_COUNT];
        let mut sum = 0.0;
        let mut scored = 0usize;
        let mut covered = 0usize;
        for (i, w) in words.iter().enumerate() {
            if let Some(s) = w.surprisal {
                scored += 1;
                sum += s;
                histogram[w.bucket.get()] += 1;
                if runs.iter().any(|r| r.contains(i)) {
                    covered += 1;
                }
            }
        }
        let (mean, perplexity, coverage) = if scored == 0 {
            (None, None, None)
        } else {
            let mean = sum / scored as f64;
            (Some(mean), Some(base.pow(mean)), Some(covered as f64 / scored as f64))
        };
        DocumentStats {
            token_count,
            word_count: words.len(),
            scored_word_count: scored,
            mean_surprisal: mean,
            perplexity,
            bucket_histogram: histogram,
            formulaic_coverage: coverage,
        }
    }
}
