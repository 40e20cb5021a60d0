//! Probability sources.
//!
//! A [`Backend`] turns text into tokens and scores each token against its
//! left context. Three implementations ship with the crate: an in-process
//! Kneser-Ney n-gram model, a client for OpenAI-compatible completion
//! servers that echo prompt logprobs, and a replayer for precomputed
//! logprob dumps.

pub mod http;
pub mod model_file;
pub mod ngram;
pub mod precomputed;
pub mod tokenizer;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::info::{InfoError, Probability, TokenDistribution, TokenId};
use crate::par::{map_range, Execution};

pub use http::{HttpBackend, HttpBackendConfig, HttpTokenization};
pub use model_file::ModelFormatError;
pub use ngram::{NgramModel, Smoothing, TrainError, TrainOptions};
pub use precomputed::{Dump, DumpCandidate, DumpHeader, DumpRecord, PrecomputedBackend};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("context of {len} tokens exceeds the backend limit of {max}")]
    ContextTooLong { len: usize, max: usize },
    #[error("token id {0} is not in the vocabulary")]
    UnknownToken(TokenId),
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { message: String, attempts: u32 },
    #[error("protocol error: {message} (payload: {excerpt})")]
    Protocol { message: String, excerpt: String },
    #[error("tokenization failed: {0}")]
    Tokenization(String),
    #[error("malformed logprob dump: {0}")]
    Dump(String),
    #[error("position {0} is not available from this backend")]
    PositionUnavailable(usize),
    #[error(transparent)]
    Format(#[from] ModelFormatError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Transport { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendCapabilities {
    /// `None` means unbounded.
    pub max_context_tokens: Option<usize>,
    pub provides_full_distribution: bool,
    /// `None` means unbounded; always `None` for full-distribution backends.
    pub top_k_limit: Option<usize>,
    /// The first token can be conditioned on a begin-of-sequence symbol.
    pub has_bos: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: TokenId,
    /// Plain text of the token, whitespace markers already expanded.
    pub piece: String,
}

#[derive(Debug, Clone)]
pub struct ScoreRequest<'a> {
    pub context: &'a [TokenId],
    pub actual: TokenId,
    pub top_k: usize,
    /// `context` begins at the start of the text, so a backend with a BOS
    /// symbol may condition on it.
    pub sequence_start: bool,
    /// Ask full-distribution backends to return the whole distribution.
    pub include_distribution: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: TokenId,
    pub piece: String,
    pub probability: Probability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreResult {
    pub actual_probability: Probability,
    /// `None` when the backend cannot know the rank.
    pub actual_rank: Option<u64>,
    /// Descending by probability, ties by ascending id.
    pub top_candidates: Vec<Candidate>,
    pub distribution: Option<TokenDistribution>,
}

pub trait Backend: Send + Sync {
    /// Short name of the backend family, e.g. `"ngram"`.
    fn kind(&self) -> &'static str;

    /// Identifier of the concrete model behind the backend.
    fn model_id(&self) -> String;

    fn description(&self) -> String {
        format!("{} backend ({})", self.kind(), self.model_id())
    }

    fn capabilities(&self) -> BackendCapabilities;

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError>;

    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScoreResult, BackendError>;

    /// Scores every position in `scored`, using the tokens of `window` that
    /// precede it as context. Backends that can score a whole window in one
    /// round trip override this.
    fn score_window(
        &self,
        tokens: &[TokenId],
        window: Range<usize>,
        scored: Range<usize>,
        top_k: usize,
        exec: Execution,
    ) -> Result<Vec<ScoreResult>, BackendError> {
        map_range(scored, exec, |i| {
            self.score(&ScoreRequest {
                context: &tokens[window.start..i],
                actual: tokens[i],
                top_k,
                sequence_start: window.start == 0,
                include_distribution: false,
            })
        })
        .into_iter()
        .collect()
    }
}

pub(crate) fn check_context(caps: &BackendCapabilities, len: usize) -> Result<(), BackendError> {
    match caps.max_context_tokens {
        Some(max) if len > max => Err(BackendError::ContextTooLong { len, max }),
        _ => Ok(()),
    }
}

/// Wraps a backend and reports a smaller context limit.
pub struct ContextLimited<B> {
    inner: B,
    max_context_tokens: usize,
}

impl<B: Backend> ContextLimited<B> {
    pub fn new(inner: B, max_context_tokens: usize) -> Self {
        ContextLimited { inner, max_context_tokens: max_context_tokens.max(1) }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: Backend> Backend for ContextLimited<B> {
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    fn model_id(&self) -> String {
        format!("{}@ctx{}", self.inner.model_id(), self.max_context_tokens)
    }

    fn capabilities(&self) -> BackendCapabilities {
        let mut caps = self.inner.capabilities();
        caps.max_context_tokens = Some(match caps.max_context_tokens {
            Some(m) => m.min(self.max_context_tokens),
            None => self.max_context_tokens,
        });
        caps
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        self.inner.tokenize(text)
    }

    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScoreResult, BackendError> {
        check_context(&self.capabilities(), req.context.len())?;
        self.inner.score(req)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn kind(&self) -> &'static str {
        (**self).kind()
    }
    fn model_id(&self) -> String {
        (**self).model_id()
    }
    fn description(&self) -> String {
        (**self).description()
    }
    fn capabilities(&self) -> BackendCapabilities {
        (**self).capabilities()
    }
    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        (**self).tokenize(text)
    }
    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScoreResult, BackendError> {
        (**self).score(req)
    }
    fn score_window(
        &self,
        tokens: &[TokenId],
        window: Range<usize>,
        scored: Range<usize>,
        top_k: usize,
        exec: Execution,
    ) -> Result<Vec<ScoreResult>, BackendError> {
        (**self).score_window(tokens, window, scored, top_k, exec)
    }
}
