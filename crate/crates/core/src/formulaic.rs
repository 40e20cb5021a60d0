//! Detection of formulaic passages: runs of consecutive words that are each
//! highly predictable.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormulaicRun {
    pub start_word: usize,
    /// Inclusive.
    pub end_word: usize,
    pub mean_surprisal: f64,
}

impl FormulaicRun {
    pub fn len(&self) -> usize {
        self.end_word - self.start_word + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, word: usize) -> bool {
        (self.start_word..=self.end_word).contains(&word)
    }
}

/// Returns every maximal run of at least `min_len` words whose surprisal is
/// `<= threshold`. `None` marks an unscored word, which always breaks a run.
pub fn detect_formulaic_runs(word_surprisals: &[Option<f64>], threshold: f64, min_len: usize) -> Vec<FormulaicRun> {
    let mut runs = Vec::new();
    let mut start: Option<usize> = None;
    let flush = |start: usize, end: usize, runs: &mut Vec<FormulaicRun>| {
        if end + 1 - start >= min_len {
            let sum: f64 = word_surprisals[start..=end].iter().map(|s| s.unwrap_or(0.0)).sum();
            runs.push(FormulaicRun {
                start_word: start,
                end_word: end,
                mean_surprisal: sum / (end + 1 - start) as f64,
            });
        }
    };
    for (i, s) in word_surprisals.iter().enumerate() {
        let qualifies = matches!(s, Some(v) if *v <= threshold);
        match (qualifies, start) {
            (true, None) => start = Some(i),
            (false, Some(st)) => {
                flush(st, i - 1, &mut runs);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = start {
        flush(st, word_surprisals.len() - 1, &mut runs);
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spans(runs: &[FormulaicRun]) -> Vec<(usize, usize)> {
        runs.iter().map(|r| (r.start_word, r.end_word)).collect()
    }

    #[test]
    fn everything_qualifies() {
        let s = vec![Some(0.1); 10];
        let runs = detect_formulaic_runs(&s, 1.0, 3);
        assert_eq!(spans(&runs), vec![(0, 9)]);
        assert!((runs[0].mean_surprisal - 0.1).abs() < 1e-12);
    }

    #[test]
    fn alternating_has_no_runs() {
        let s: Vec<_> = (0..20).map(|i| Some(if i % 2 == 0 { 0.1 } else { 5.0 })).collect();
        assert!(detect_formulaic_runs(&s, 1.0, 2).is_empty());
    }

    #[test]
    fn mixed_example() {
        let s: Vec<_> = [3.0, 0.2, 0.3, 0.1, 4.0, 0.5, 0.5, 0.5, 0.5, 6.0].iter().map(|&v| Some(v)).collect();
        assert_eq!(spans(&detect_formulaic_runs(&s, 1.0, 3)), vec![(1, 3), (5, 8)]);
    }

    #[test]
    fn unscored_breaks_runs_and_threshold_is_inclusive() {
        let s = vec![Some(1.0), Some(1.0), None, Some(0.0), Some(0.0)];
        assert_eq!(spans(&detect_formulaic_runs(&s, 1.0, 2)), vec![(0, 1), (3, 4)]);
        assert!(detect_formulaic_runs(&[], 1.0, 2).is_empty());
    }
}
