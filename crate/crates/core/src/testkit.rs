//! A deterministic synthetic backend for tests and benchmarks.
//!
//! [`SubwordBackend`] cuts every word into fixed-size character chunks, so
//! most words span several tokens, and assigns each position a probability
//! derived from a hash of the preceding token and the token itself. It needs
//! no training data and reports unknown ranks, which exercises the
//! probability-based bucket fallback.

use crate::backends::tokenizer::split_words;
use crate::backends::{check_context, Backend, BackendCapabilities, BackendError, Candidate, ScoreRequest, ScoreResult, Token};
use crate::info::{Probability, TokenId};

const FILLERS: [&str; 8] = [" the", " of", " and", " to", " a", " in", ",", "."];

#[derive(Debug, Clone)]
pub struct SubwordBackend {
    pub chunk_chars: usize,
    pub has_bos: bool,
    pub max_context_tokens: Option<usize>,
}

impl Default for SubwordBackend {
    fn default() -> Self {
        SubwordBackend { chunk_chars: 3, has_bos: false, max_context_tokens: None }
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Token id of a piece; stable across runs and processes.
pub fn piece_id(piece: &str) -> TokenId {
    let mut h: u32 = 0x811c_9dc5;
    for b in piece.bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

impl SubwordBackend {
    /// Probability of `actual` after `prev`, in [1e-6, 0.95].
    pub fn probability(prev: Option<TokenId>, actual: TokenId) -> f64 {
        let h = mix((u64::from(prev.unwrap_or(u32::MAX)) << 32) | u64::from(actual));
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        // Skewed toward small values, with a spike of near-certain tokens.
        if h & 7 == 0 {
            0.95
        } else {
            (1e-6f64).max(u * u * 0.9)
        }
    }
}

impl Backend for SubwordBackend {
    fn kind(&self) -> &'static str {
        "synthetic"
    }

    fn model_id(&self) -> String {
        format!("subword-{}", self.chunk_chars)
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            max_context_tokens: self.max_context_tokens,
            provides_full_distribution: false,
            top_k_limit: Some(FILLERS.len()),
            has_bos: self.has_bos,
        }
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        let n = self.chunk_chars.max(1);
        let mut out = Vec::new();
        for w in split_words(text) {
            let lead = w.piece.len() - w.piece.trim_start().len();
            let body = &w.piece[lead..];
            let mut idx: Vec<usize> = body.char_indices().map(|(i, _)| i).step_by(n).collect();
            idx.push(body.len());
            for pair in idx.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let piece = if a == 0 { &w.piece[..lead + b] } else { &body[a..b] };
                out.push(Token { id: piece_id(piece), piece: piece.to_owned() });
            }
        }
        Ok(out)
    }

    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScoreResult, BackendError> {
        check_context(&self.capabilities(), req.context.len())?;
        if req.context.is_empty() && !(self.has_bos && req.sequence_start) {
            return Err(BackendError::PositionUnavailable(0));
        }
        let p = Self::probability(req.context.last().copied(), req.actual);
        let mut rest = 1.0 - p;
        let mut candidates: Vec<Candidate> = FILLERS
            .iter()
            .map(|f| {
                rest *= 0.5;
                Candidate { id: piece_id(f), piece: (*f).to_owned(), probability: Probability::new(rest).expect("in range") }
            })
            .filter(|c| c.id != req.actual)
            .collect();
        candidates.sort_by(|a, b| b.probability.value().total_cmp(&a.probability.value()).then(a.id.cmp(&b.id)));
        candidates.truncate(req.top_k);
        Ok(ScoreResult {
            actual_probability: Probability::new(p).expect("in range"),
            actual_rank: None,
            top_candidates: candidates,
            distribution: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_tile_text() {
        let b = SubwordBackend::default();
        let text = "  glittering words, again";
        let toks = b.tokenize(text).unwrap();
        let joined: String = toks.iter().map(|t| t.piece.as_str()).collect();
        assert_eq!(joined, text);
        assert_eq!(toks[0].piece, "  gli");
        assert_eq!(toks[1].piece, "tte");
    }
}
