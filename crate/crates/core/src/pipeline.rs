//! The annotation pipeline: normalize, tokenize, window, score, aggregate.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{Backend, BackendCapabilities, BackendError, ScoreResult, Token};
use crate::buckets::{BucketIndex, Rank};
use crate::config::{ConfigError, GlitterConfig};
use crate::formulaic::{detect_formulaic_runs, FormulaicRun};
use crate::info::{surprisal_capped, Probability, TokenId};
use crate::par::{map_slice, Execution};
use crate::segmentation::{align_tokens, group_words, normalize, SegmentationError, SourceSpan, WordGroup};
use crate::stats::{DocumentStats, WordFigure};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input text is empty after normalization")]
    EmptyInput,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("tokenization failed: {0}")]
    Tokenization(#[source] BackendError),
    #[error("token alignment failed: {0}")]
    Alignment(#[from] SegmentationError),
    #[error("text has {count} tokens, more than the budget of {max}")]
    TokenBudget { count: usize, max: usize },
    #[error("backend failed at token {}: {}", .0.failed_at, .0.source)]
    Partial(Box<PartialFailure>),
}

/// Annotations completed before a backend failure.
#[derive(Debug)]
pub struct PartialFailure {
    pub completed: Vec<PositionAnnotation>,
    /// First scored position of the window whose request failed.
    pub failed_at: usize,
    pub source: BackendError,
}

impl PipelineError {
    pub fn backend_error(&self) -> Option<&BackendError> {
        match self {
            PipelineError::Tokenization(e) => Some(e),
            PipelineError::Partial(p) => Some(&p.source),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPlan {
    /// Tokens sent to the backend.
    pub window: Range<usize>,
    /// Tokens whose scores are taken from this window.
    pub scored: Range<usize>,
}

/// Splits `token_count` tokens into overlapping windows no longer than the
/// backend context. Every token is scored exactly once, in the window that
/// gives it the most left context; after the first window each scored token
/// keeps at least `window - stride` tokens of context.
///
/// The stride is `floor(max_context * stride_fraction)`, kept within
/// `1..max_context` so that consecutive windows always overlap.
pub fn window_plan(token_count: usize, max_context: Option<usize>, stride_fraction: f64) -> Result<Vec<WindowPlan>, ConfigError> {
    if !(stride_fraction > 0.0 && stride_fraction <= 1.0) {
        return Err(ConfigError::Stride(stride_fraction));
    }
    let w = match max_context {
        Some(w) if w < token_count => w.max(1),
        _ => return Ok(vec![WindowPlan { window: 0..token_count, scored: 0..token_count }]),
    };
    let stride = ((w as f64 * stride_fraction).floor() as usize).clamp(1, w.saturating_sub(1).max(1));
    let mut plan = vec![WindowPlan { window: 0..w, scored: 0..w }];
    let mut done = w;
    while done < token_count {
        let end = (done + stride).min(token_count);
        plan.push(WindowPlan { window: end.saturating_sub(w)..end, scored: done..end });
        done = end;
    }
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PositionFlags {
    pub capped: bool,
    pub estimated_rank: bool,
    pub unscored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub piece: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionAnnotation {
    pub token_index: usize,
    pub token_id: TokenId,
    pub piece: String,
    pub span: SourceSpan,
    /// `None` when unscored.
    pub probability: Option<f64>,
    pub surprisal: Option<f64>,
    pub rank: Rank,
    pub bucket: BucketIndex,
    pub top_candidates: Vec<CandidateView>,
    pub flags: PositionFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordAnnotation {
    pub group: WordGroup,
    /// Chain-rule product of the subword probabilities.
    pub probability: Option<f64>,
    /// Sum of the subword surprisals.
    pub surprisal: Option<f64>,
    /// Worst bucket among the subwords.
    pub bucket: BucketIndex,
    pub capped: bool,
}

impl WordAnnotation {
    pub fn is_scored(&self) -> bool {
        self.surprisal.is_some()
    }

    /// Index of the subword whose candidates represent the word.
    pub fn first_token(&self) -> usize {
        self.group.token_indices.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub backend_id: String,
    pub backend_kind: String,
    pub model_id: String,
    pub config_digest: String,
    pub log_base: f64,
    /// Some bucket was derived from probability because the rank was unknown.
    pub rank_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub normalized_text: String,
    pub positions: Vec<PositionAnnotation>,
    pub words: Vec<WordAnnotation>,
    pub runs: Vec<FormulaicRun>,
    pub stats: DocumentStats,
    pub provenance: Provenance,
}

impl AnnotatedDocument {
    /// Text of a word, including any whitespace attached to it.
    pub fn word_text(&self, word: &WordAnnotation) -> String {
        self.normalized_text.chars().skip(word.group.span.start).take(word.group.span.len()).collect()
    }

    /// Word-level bucket histogram computed from the positions alone.
    pub fn recomputed_histogram(&self) -> [u64; crate::buckets::BUCKET_COUNT] {
        let mut h = [0u64; crate::buckets::BUCKET_COUNT];
        for w in &self.words {
            let toks = &self.positions[w.group.token_indices.clone()];
            if toks.iter().all(|p| !p.flags.unscored) {
                let b = toks.iter().map(|p| p.bucket).max().expect("words are non-empty");
                h[b.get()] += 1;
            }
        }
        h
    }
}

/// Annotates `text` with the default execution mode.
pub fn glitter(text: &str, backend: &dyn Backend, backend_id: &str, config: &GlitterConfig) -> Result<AnnotatedDocument, PipelineError> {
    glitter_with(text, backend, backend_id, config, Execution::default())
}

pub fn glitter_with(
    text: &str,
    backend: &dyn Backend,
    backend_id: &str,
    config: &GlitterConfig,
    exec: Execution,
) -> Result<AnnotatedDocument, PipelineError> {
    glitter_run(text, backend, backend_id, config, &RunOptions { exec, max_tokens: None })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub exec: Execution,
    /// Reject texts that tokenize into more tokens than this, before any
    /// scoring happens.
    pub max_tokens: Option<usize>,
}

pub fn glitter_run(
    text: &str,
    backend: &dyn Backend,
    backend_id: &str,
    config: &GlitterConfig,
    run: &RunOptions,
) -> Result<AnnotatedDocument, PipelineError> {
    let exec = run.exec;
    config.validate()?;
    let (normalized, _) = normalize(text);
    if normalized.trim().is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    let tokens = backend.tokenize(&normalized).map_err(PipelineError::Tokenization)?;
    if tokens.is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    if let Some(max) = run.max_tokens {
        if tokens.len() > max {
            return Err(PipelineError::TokenBudget { count: tokens.len(), max });
        }
    }
    let spans = align_tokens(&normalized, &tokens.iter().map(|t| t.piece.as_str()).collect::<Vec<_>>())?;
    let caps = backend.capabilities();
    let results = score_all(backend, &caps, &tokens, config, exec);

    let mut positions = Vec::with_capacity(tokens.len());
    for (i, result) in results.into_iter().enumerate() {
        match result {
            Ok(r) => positions.push(annotate(i, &tokens[i], spans[i], r.as_ref(), config)),
            Err((failed_at, source)) => {
                return Err(PipelineError::Partial(Box::new(PartialFailure { completed: positions, failed_at, source })))
            }
        }
    }
    Ok(assemble(normalized, positions, backend, backend_id, config))
}

type Scored = Result<Option<ScoreResult>, (usize, BackendError)>;

/// Scores every position; entries after the first failure are errors too.
fn score_all(backend: &dyn Backend, caps: &BackendCapabilities, tokens: &[Token], config: &GlitterConfig, exec: Execution) -> Vec<Scored> {
    let ids: Vec<TokenId> = tokens.iter().map(|t| t.id).collect();
    let plan = window_plan(ids.len(), caps.max_context_tokens, config.stride_fraction).expect("config validated");
    let skip_first = !caps.has_bos;
    let per_window = map_slice(&plan, exec, |w| {
        let mut scored = w.scored.clone();
        if skip_first && scored.start == 0 {
            scored.start = 1;
        }
        if scored.is_empty() {
            return Ok(Vec::new());
        }
        backend
            .score_window(&ids, w.window.clone(), scored.clone(), config.top_k, exec)
            .map_err(|e| (scored.start, e))
    });

    let mut out: Vec<Scored> = Vec::with_capacity(ids.len());
    if skip_first {
        out.push(Ok(None));
    }
    for result in per_window {
        match result {
            Ok(rs) => out.extend(rs.into_iter().map(|r| Ok(Some(r)))),
            Err(e) => {
                out.push(Err(e));
                break;
            }
        }
    }
    out
}

fn annotate(index: usize, token: &Token, span: SourceSpan, result: Option<&ScoreResult>, config: &GlitterConfig) -> PositionAnnotation {
    let Some(r) = result else {
        return PositionAnnotation {
            token_index: index,
            token_id: token.id,
            piece: token.piece.clone(),
            span,
            probability: None,
            surprisal: None,
            rank: Rank::Unscored,
            bucket: BucketIndex::UNSCORED,
            top_candidates: Vec::new(),
            flags: PositionFlags { unscored: true, ..Default::default() },
        };
    };
    let p = r.actual_probability;
    let s = surprisal_capped(p, config.log_base, config.cap()).expect("probability validated");
    let rank = r.actual_rank.map_or(Rank::Unknown, Rank::Exact);
    PositionAnnotation {
        token_index: index,
        token_id: token.id,
        piece: token.piece.clone(),
        span,
        probability: Some(p.value()),
        surprisal: Some(s.value),
        rank,
        bucket: config.buckets.bucket(rank, Some(p.value())),
        top_candidates: r
            .top_candidates
            .iter()
            .take(config.top_k)
            .map(|c| CandidateView { piece: c.piece.clone(), probability: c.probability.value() })
            .collect(),
        flags: PositionFlags { capped: s.capped, estimated_rank: r.actual_rank.is_none(), unscored: false },
    }
}

fn assemble(
    normalized: String,
    positions: Vec<PositionAnnotation>,
    backend: &dyn Backend,
    backend_id: &str,
    config: &GlitterConfig,
) -> AnnotatedDocument {
    let pieces: Vec<(&str, SourceSpan)> = positions.iter().map(|p| (p.piece.as_str(), p.span)).collect();
    let words: Vec<WordAnnotation> = group_words(&pieces)
        .into_iter()
        .map(|group| {
            let toks = &positions[group.token_indices.clone()];
            let bucket = toks.iter().map(|p| p.bucket).max().expect("words are non-empty");
            let capped = toks.iter().any(|p| p.flags.capped);
            if toks.iter().any(|p| p.flags.unscored) {
                return WordAnnotation { group, probability: None, surprisal: None, bucket: BucketIndex::UNSCORED, capped };
            }
            let probs: Vec<Probability> =
                toks.iter().map(|p| Probability::new(p.probability.expect("scored")).expect("valid")).collect();
            let probability = crate::info::chain_rule_probability(&probs).expect("non-empty").value();
            let surprisal: f64 = toks.iter().map(|p| p.surprisal.expect("scored")).sum();
            WordAnnotation { group, probability: Some(probability), surprisal: Some(surprisal), bucket, capped }
        })
        .collect();

    let word_surprisals: Vec<Option<f64>> = words.iter().map(|w| w.surprisal).collect();
    let runs = detect_formulaic_runs(&word_surprisals, config.formulaic.threshold, config.formulaic.min_len);
    let figures: Vec<WordFigure> = words.iter().map(|w| WordFigure { surprisal: w.surprisal, bucket: w.bucket }).collect();
    let stats = DocumentStats::compute(positions.len(), &figures, &runs, config.log_base);
    let provenance = Provenance {
        backend_id: backend_id.to_owned(),
        backend_kind: backend.kind().to_owned(),
        model_id: backend.model_id(),
        config_digest: config.digest(),
        log_base: config.log_base.value(),
        rank_fallback: positions.iter().any(|p| p.flags.estimated_rank),
    };
    AnnotatedDocument { normalized_text: normalized, positions, words, runs, stats, provenance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{NgramModel, Smoothing, TrainOptions};
    use proptest::prelude::*;

    fn scored(plan: &[WindowPlan]) -> Vec<Range<usize>> {
        plan.iter().map(|w| w.scored.clone()).collect()
    }

    #[test]
    fn window_examples() {
        assert_eq!(scored(&window_plan(10, None, 0.5).unwrap()), vec![0..10]);
        let plan = window_plan(10, Some(4), 0.5).unwrap();
        assert_eq!(scored(&plan), vec![0..4, 4..6, 6..8, 8..10]);
        assert_eq!(plan[1].window, 2..6);
        assert_eq!(plan[3].window, 6..10);
        assert_eq!(scored(&window_plan(1, Some(4), 0.5).unwrap()), vec![0..1]);
        assert!(window_plan(5, Some(2), 0.0).is_err());
        assert!(window_plan(5, Some(2), 1.5).is_err());
    }

    proptest! {
        #[test]
        fn windows_partition_and_respect_capacity(n in 1usize..400, w in 1usize..80, f in 0.01f64..=1.0) {
            let plan = window_plan(n, Some(w), f).unwrap();
            let mut next = 0;
            for p in &plan {
                prop_assert_eq!(p.scored.start, next);
                prop_assert!(p.scored.end > p.scored.start);
                prop_assert!(p.window.start <= p.scored.start && p.scored.end <= p.window.end);
                prop_assert!(p.window.len() <= w.max(1) || plan.len() == 1 && w >= n);
                next = p.scored.end;
            }
            prop_assert_eq!(next, n);
        }
    }

    fn mle_bigram(text: &str) -> NgramModel {
        NgramModel::train_from_text(text, &TrainOptions { order: 2, unk_threshold: 0, smoothing: Smoothing::Mle, ..Default::default() }).unwrap()
    }

    #[test]
    fn second_token_uses_bigram_counts() {
        let m = mle_bigram("a a a a");
        let doc = glitter("a a", &m, "ngram", &GlitterConfig::default()).unwrap();
        // "a" follows "a" 3 times out of 4 (the fourth is followed by </s>).
        assert_eq!(doc.positions[1].probability, Some(0.75));
        // The first token is scored against <s>: "a" always starts a sentence.
        assert_eq!(doc.positions[0].probability, Some(1.0));
        assert_eq!(doc.positions[0].surprisal, Some(0.0));
    }

    #[test]
    fn deterministic_output() {
        let m = NgramModel::train_from_text("the cat sat on the mat\nthe dog sat", &TrainOptions::default()).unwrap();
        let a = glitter("the cat sat on the log", &m, "ngram", &GlitterConfig::default()).unwrap();
        let b = glitter("the cat sat on the log", &m, "ngram", &GlitterConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = glitter_with("the cat sat on the log", &m, "ngram", &GlitterConfig::default(), Execution::Sequential).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn empty_input() {
        let m = mle_bigram("a b");
        assert!(matches!(glitter(" \r\n ", &m, "x", &GlitterConfig::default()), Err(PipelineError::EmptyInput)));
    }
}
