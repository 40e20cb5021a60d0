//! Word-level n-gram language model with interpolated Kneser-Ney smoothing.
//!
//! The highest order uses raw counts; lower orders use continuation counts
//! (the number of distinct left extensions of an n-gram), except for
//! n-grams that begin with the sentence-start symbol, which cannot be
//! extended to the left and keep their raw counts. The unigram level
//! interpolates with a uniform distribution over every predictable token so
//! that unseen words keep a nonzero probability.
//!
//! An unsmoothed maximum-likelihood mode is available for checking the
//! model against plain count ratios.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::model_file::{self, ModelFormatError};
use super::tokenizer::{split_words, words};
use super::{check_context, Backend, BackendCapabilities, BackendError, Candidate, ScoreRequest, ScoreResult, Token};
use crate::info::{LogBase, Probability, TokenDistribution, TokenId};

pub const BOS: TokenId = 0;
pub const EOS: TokenId = 1;
pub const UNK: TokenId = 2;
pub const RESERVED: [&str; 3] = ["<s>", "</s>", "<unk>"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    KneserNey,
    /// Unsmoothed relative frequencies, backing off to the longest context
    /// that was observed.
    Mle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub order: usize,
    pub discount: f64,
    /// Words seen at most this many times are mapped to `<unk>`.
    pub unk_threshold: u64,
    pub smoothing: Smoothing,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { order: 3, discount: 0.75, unk_threshold: 1, smoothing: Smoothing::KneserNey }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("training corpus contains no tokens")]
    EmptyCorpus,
    #[error("model order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("discount must lie strictly between 0 and 1, got {0}")]
    InvalidDiscount(f64),
}

#[derive(Debug, Clone, Default)]
struct Followers {
    /// Sorted by token id.
    entries: Vec<(TokenId, u64)>,
    total: u64,
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    discount: f64,
    smoothing: Smoothing,
    unk_threshold: u64,
    vocab: Vec<String>,
    index: HashMap<String, TokenId>,
    /// `counts[k - 1]` holds the raw counts of k-grams.
    counts: Vec<BTreeMap<Vec<TokenId>, u64>>,
    /// `raw[k - 2]`: context of length k-1 -> raw follower counts.
    raw: Vec<HashMap<Vec<TokenId>, Followers>>,
    /// `adjusted[k - 2]`: the same with Kneser-Ney adjusted counts.
    adjusted: Vec<HashMap<Vec<TokenId>, Followers>>,
    unigram_kn: Vec<f64>,
    unigram_mle: Vec<f64>,
    model_id: String,
}

impl NgramModel {
    /// Trains on pre-split sentences. Each sentence is wrapped in `<s>` and
    /// `</s>`.
    pub fn train<I, S, W>(sentences: I, opts: &TrainOptions) -> Result<Self, TrainError>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = W>,
        W: AsRef<str>,
    {
        if opts.order < 1 {
            return Err(TrainError::InvalidOrder(opts.order));
        }
        if !(opts.discount > 0.0 && opts.discount < 1.0) {
            return Err(TrainError::InvalidDiscount(opts.discount));
        }
        let sentences: Vec<Vec<String>> = sentences
            .into_iter()
            .map(|s| s.into_iter().map(|w| w.as_ref().to_owned()).collect())
            .collect();
        if sentences.iter().all(|s| s.is_empty()) {
            return Err(TrainError::EmptyCorpus);
        }

        let mut freq: HashMap<&str, u64> = HashMap::new();
        for w in sentences.iter().flatten() {
            *freq.entry(w.as_str()).or_default() += 1;
        }
        let mut kept: Vec<&str> = freq
            .iter()
            .filter(|&(w, &c)| c > opts.unk_threshold && !RESERVED.contains(w))
            .map(|(w, _)| *w)
            .collect();
        kept.sort_unstable();
        let vocab: Vec<String> = RESERVED.iter().copied().chain(kept).map(str::to_owned).collect();
        let index: HashMap<&str, TokenId> = vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i as TokenId)).collect();

        let mut counts: Vec<BTreeMap<Vec<TokenId>, u64>> = vec![BTreeMap::new(); opts.order];
        let mut seq = Vec::new();
        for sentence in &sentences {
            seq.clear();
            seq.push(BOS);
            seq.extend(sentence.iter().map(|w| index.get(w.as_str()).copied().unwrap_or(UNK)));
            seq.push(EOS);
            for k in 1..=opts.order {
                for gram in seq.windows(k) {
                    if k == 1 && gram[0] == BOS {
                        continue;
                    }
                    *counts[k - 1].entry(gram.to_vec()).or_default() += 1;
                }
            }
        }

        Ok(NgramModel::from_parts(opts.order, opts.discount, opts.smoothing, opts.unk_threshold, vocab, counts)
            .expect("training produces a consistent model"))
    }

    /// Trains on running text, one sentence per non-blank line.
    pub fn train_from_text(text: &str, opts: &TrainOptions) -> Result<Self, TrainError> {
        NgramModel::train(text.lines().filter(|l| !l.trim().is_empty()).map(words), opts)
    }

    pub(crate) fn from_parts(
        order: usize,
        discount: f64,
        smoothing: Smoothing,
        unk_threshold: u64,
        vocab: Vec<String>,
        counts: Vec<BTreeMap<Vec<TokenId>, u64>>,
    ) -> Result<Self, ModelFormatError> {
        let invalid = |m: String| Err(ModelFormatError::Invalid(m));
        if order < 1 || counts.len() != order {
            return invalid(format!("order {order} with {} count tables", counts.len()));
        }
        if !(discount > 0.0 && discount < 1.0) {
            return invalid(format!("discount {discount}"));
        }
        if vocab.len() < RESERVED.len() || vocab.iter().zip(RESERVED).any(|(v, r)| v != r) {
            return invalid("vocabulary does not start with the reserved symbols".into());
        }
        let v = vocab.len();
        for (k, table) in counts.iter().enumerate() {
            for (gram, &c) in table {
                if gram.len() != k + 1 || c == 0 || gram.iter().any(|&id| id as usize >= v) {
                    return invalid(format!("bad {}-gram entry {gram:?}", k + 1));
                }
                if gram[1..].contains(&BOS) || (k == 0 && gram[0] == BOS) {
                    return invalid(format!("sentence start inside {gram:?}"));
                }
            }
        }
        let index: HashMap<String, TokenId> =
            vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as TokenId)).collect();
        if index.len() != v {
            return invalid("duplicate vocabulary entries".into());
        }

        // Continuation counts: distinct left extensions of each (k)-gram.
        let mut continuation: Vec<BTreeMap<&[TokenId], u64>> = vec![BTreeMap::new(); order];
        for k in 2..=order {
            for gram in counts[k - 1].keys() {
                *continuation[k - 2].entry(&gram[1..]).or_default() += 1;
            }
        }
        let adjusted_count = |gram: &[TokenId], raw: u64| -> u64 {
            let k = gram.len();
            if k == order || gram[0] == BOS {
                raw
            } else {
                continuation[k - 1].get(gram).copied().unwrap_or(0)
            }
        };

        let mut raw_tables = Vec::with_capacity(order.saturating_sub(1));
        let mut adj_tables = Vec::with_capacity(order.saturating_sub(1));
        for k in 2..=order {
            let mut raw: HashMap<Vec<TokenId>, Followers> = HashMap::new();
            let mut adj: HashMap<Vec<TokenId>, Followers> = HashMap::new();
            for (gram, &c) in &counts[k - 1] {
                let ctx = &gram[..k - 1];
                let w = gram[k - 1];
                let r = raw.entry(ctx.to_vec()).or_default();
                r.entries.push((w, c));
                r.total += c;
                let a = adjusted_count(gram, c);
                if a > 0 {
                    let e = adj.entry(ctx.to_vec()).or_default();
                    e.entries.push((w, a));
                    e.total += a;
                }
            }
            raw_tables.push(raw);
            adj_tables.push(adj);
        }

        let mut unigram_mle = vec![0.0; v];
        let mut unigram_kn = vec![0.0; v];
        let total_raw: u64 = counts[0].values().sum();
        let mut adj_uni = vec![0u64; v];
        for (gram, &c) in &counts[0] {
            unigram_mle[gram[0] as usize] = c as f64 / total_raw as f64;
            adj_uni[gram[0] as usize] = adjusted_count(gram, c);
        }
        let total_adj: u64 = adj_uni.iter().sum();
        let types = adj_uni.iter().filter(|&&a| a > 0).count();
        let gamma = discount * types as f64 / total_adj as f64;
        let uniform = 1.0 / (v - 1) as f64;
        for w in 1..v {
            let mut p = gamma * uniform;
            if adj_uni[w] > 0 {
                p += (adj_uni[w] as f64 - discount) / total_adj as f64;
            }
            unigram_kn[w] = p;
        }

        let mut model = NgramModel {
            order,
            discount,
            smoothing,
            unk_threshold,
            vocab,
            index,
            counts,
            raw: raw_tables,
            adjusted: adj_tables,
            unigram_kn,
            unigram_mle,
            model_id: String::new(),
        };
        // The file trailer is a CRC of everything before it.
        let bytes = model.to_bytes();
        let crc = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().expect("4-byte trailer"));
        let tag = match smoothing {
            Smoothing::KneserNey => "kn",
            Smoothing::Mle => "mle",
        };
        model.model_id = format!("ngram-{order}-{tag}-{crc:08x}");
        Ok(model)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        model_file::save(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelFormatError> {
        model_file::load(bytes)
    }

    /// The same counts scored with a different smoothing mode.
    pub fn with_smoothing(self, smoothing: Smoothing) -> Self {
        NgramModel::from_parts(self.order, self.discount, smoothing, self.unk_threshold, self.vocab, self.counts)
            .expect("counts were already validated")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn unk_threshold(&self) -> u64 {
        self.unk_threshold
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn counts(&self) -> &[BTreeMap<Vec<TokenId>, u64>] {
        &self.counts
    }

    /// Number of training tokens, counting one `</s>` per sentence.
    pub fn token_count(&self) -> u64 {
        self.counts[0].values().sum()
    }

    pub fn token_id(&self, word: &str) -> TokenId {
        self.index.get(word).copied().unwrap_or(UNK)
    }

    /// Every context (of length 1..order) that was observed in training.
    pub fn observed_contexts(&self) -> impl Iterator<Item = &[TokenId]> {
        self.raw.iter().flat_map(|t| t.keys().map(Vec::as_slice))
    }

    /// The last `order - 1` tokens of `context`, prefixed with `<s>` when the
    /// context starts the sequence.
    fn history(&self, context: &[TokenId], sequence_start: bool) -> Vec<TokenId> {
        let keep = self.order - 1;
        let mut h = Vec::with_capacity(keep);
        if sequence_start && context.len() < keep {
            h.push(BOS);
            h.extend_from_slice(context);
        } else {
            h.extend_from_slice(&context[context.len().saturating_sub(keep)..]);
        }
        h
    }

    /// Conditional probability of `word` given a history already produced
    /// by [`Self::history`] (or any sequence starting with `<s>`).
    pub fn prob(&self, word: TokenId, history: &[TokenId]) -> f64 {
        let history = &history[history.len().saturating_sub(self.order - 1)..];
        match self.smoothing {
            Smoothing::Mle => {
                for k in (2..=history.len() + 1).rev() {
                    let ctx = &history[history.len() - (k - 1)..];
                    if let Some(f) = self.raw[k - 2].get(ctx) {
                        return match f.entries.binary_search_by_key(&word, |e| e.0) {
                            Ok(i) => f.entries[i].1 as f64 / f.total as f64,
                            Err(_) => 0.0,
                        };
                    }
                }
                self.unigram_mle.get(word as usize).copied().unwrap_or(0.0)
            }
            Smoothing::KneserNey => {
                let mut p = self.unigram_kn.get(word as usize).copied().unwrap_or(0.0);
                for k in 2..=history.len() + 1 {
                    let ctx = &history[history.len() - (k - 1)..];
                    if let Some(f) = self.adjusted[k - 2].get(ctx) {
                        let total = f.total as f64;
                        let gamma = self.discount * f.entries.len() as f64 / total;
                        p *= gamma;
                        if let Ok(i) = f.entries.binary_search_by_key(&word, |e| e.0) {
                            p += (f.entries[i].1 as f64 - self.discount) / total;
                        }
                    }
                }
                p
            }
        }
    }

    /// The full next-token distribution, indexed by token id. `<s>` always
    /// has probability zero.
    pub fn distribution(&self, history: &[TokenId]) -> Vec<f64> {
        let history = &history[history.len().saturating_sub(self.order - 1)..];
        match self.smoothing {
            Smoothing::Mle => {
                for k in (2..=history.len() + 1).rev() {
                    let ctx = &history[history.len() - (k - 1)..];
                    if let Some(f) = self.raw[k - 2].get(ctx) {
                        let mut out = vec![0.0; self.vocab.len()];
                        for &(w, c) in &f.entries {
                            out[w as usize] = c as f64 / f.total as f64;
                        }
                        return out;
                    }
                }
                self.unigram_mle.clone()
            }
            Smoothing::KneserNey => {
                let mut out = self.unigram_kn.clone();
                for k in 2..=history.len() + 1 {
                    let ctx = &history[history.len() - (k - 1)..];
                    if let Some(f) = self.adjusted[k - 2].get(ctx) {
                        let total = f.total as f64;
                        let gamma = self.discount * f.entries.len() as f64 / total;
                        for p in out.iter_mut() {
                            *p *= gamma;
                        }
                        for &(w, a) in &f.entries {
                            out[w as usize] += (a as f64 - self.discount) / total;
                        }
                    }
                }
                out
            }
        }
    }

    /// Perplexity of held-out sentences, counting `</s>`; `None` if a token
    /// has zero probability (possible only in MLE mode).
    pub fn perplexity<I, S, W>(&self, sentences: I, base: LogBase) -> Option<f64>
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = W>,
        W: AsRef<str>,
    {
        let mut total = 0.0;
        let mut n = 0u64;
        for s in sentences {
            let mut hist = vec![BOS];
            let ids: Vec<TokenId> = s.into_iter().map(|w| self.token_id(w.as_ref())).chain([EOS]).collect();
            for id in ids {
                let p = self.prob(id, &hist);
                if p <= 0.0 {
                    return None;
                }
                total -= base.log(p);
                n += 1;
                hist.push(id);
            }
        }
        (n > 0).then(|| base.pow(total / n as f64))
    }

    fn candidate(&self, id: TokenId, p: f64) -> Candidate {
        Candidate { id, piece: self.vocab[id as usize].clone(), probability: clamp_probability(p) }
    }
}

fn clamp_probability(p: f64) -> Probability {
    Probability::new(p.clamp(0.0, 1.0)).expect("clamped")
}

/// 1-based rank of `actual` and the `k` most probable ids, skipping `<s>`.
fn rank_and_top_k(probs: &[f64], actual: TokenId, k: usize) -> (u64, Vec<(TokenId, f64)>) {
    let pa = probs[actual as usize];
    let mut rank = 1u64;
    for (w, &p) in probs.iter().enumerate().skip(1) {
        if p > pa || (p == pa && (w as TokenId) < actual) {
            rank += 1;
        }
    }
    let mut all: Vec<(TokenId, f64)> = probs.iter().enumerate().skip(1).map(|(w, &p)| (w as TokenId, p)).collect();
    let cmp = |a: &(TokenId, f64), b: &(TokenId, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    let k = k.min(all.len());
    if k > 0 && k < all.len() {
        all.select_nth_unstable_by(k - 1, cmp);
    }
    all.truncate(k);
    all.sort_by(cmp);
    (rank, all)
}

impl Backend for NgramModel {
    fn kind(&self) -> &'static str {
        "ngram"
    }

    fn model_id(&self) -> String {
        self.model_id.clone()
    }

    fn description(&self) -> String {
        let smoothing = match self.smoothing {
            Smoothing::KneserNey => format!("interpolated Kneser-Ney, discount {}", self.discount),
            Smoothing::Mle => "maximum likelihood".to_owned(),
        };
        format!("{}-gram word model, {} tokens in vocabulary, {smoothing}", self.order, self.vocab.len())
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            max_context_tokens: None,
            provides_full_distribution: true,
            top_k_limit: None,
            has_bos: true,
        }
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        Ok(split_words(text)
            .into_iter()
            .map(|w| Token { id: self.token_id(w.word), piece: w.piece.to_owned() })
            .collect())
    }

    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScoreResult, BackendError> {
        check_context(&self.capabilities(), req.context.len())?;
        for &id in req.context.iter().chain([&req.actual]) {
            if id as usize >= self.vocab.len() || id == BOS {
                return Err(BackendError::UnknownToken(id));
            }
        }
        let history = self.history(req.context, req.sequence_start);
        let probs = self.distribution(&history);
        let (rank, top) = rank_and_top_k(&probs, req.actual, req.top_k);
        let distribution = if req.include_distribution {
            let entries = probs.iter().enumerate().skip(1).map(|(w, &p)| (w as TokenId, p)).collect();
            Some(TokenDistribution::complete_from_unsorted(entries)?)
        } else {
            None
        };
        Ok(ScoreResult {
            actual_probability: clamp_probability(probs[req.actual as usize]),
            actual_rank: Some(rank),
            top_candidates: top.into_iter().map(|(id, p)| self.candidate(id, p)).collect(),
            distribution,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(order: usize, smoothing: Smoothing) -> TrainOptions {
        TrainOptions { order, discount: 0.75, unk_threshold: 0, smoothing }
    }

    #[test]
    fn unigram_mle_counts_eos() {
        let m = NgramModel::train_from_text("a a a", &opts(1, Smoothing::Mle)).unwrap();
        let a = m.token_id("a");
        assert_eq!(m.prob(a, &[BOS]), 0.75);
        assert_eq!(m.prob(EOS, &[BOS]), 0.25);
    }

    #[test]
    fn bigram_mle_counts() {
        let m = NgramModel::train_from_text("a b a b a", &opts(2, Smoothing::Mle)).unwrap();
        let (a, b) = (m.token_id("a"), m.token_id("b"));
        assert_eq!(m.prob(b, &[a]), 2.0 / 3.0);
        assert_eq!(m.prob(EOS, &[a]), 1.0 / 3.0);
        assert_eq!(m.prob(a, &[b]), 1.0);
        let r = m
            .score(&ScoreRequest { context: &[a], actual: b, top_k: 5, sequence_start: false, include_distribution: true })
            .unwrap();
        assert_eq!(r.actual_probability.value(), 2.0 / 3.0);
        assert_eq!(r.actual_rank, Some(1));
        assert!(r.distribution.unwrap().is_complete());
    }

    #[test]
    fn kneser_ney_normalizes_on_every_context() {
        let text = "the cat sat on the mat\nthe dog sat on the log\na cat and a dog\nthe cat ate";
        for order in 1..=4 {
            let m = NgramModel::train_from_text(text, &opts(order, Smoothing::KneserNey)).unwrap();
            let mut contexts: Vec<Vec<TokenId>> = m.observed_contexts().map(<[_]>::to_vec).collect();
            contexts.push(vec![]);
            contexts.push(vec![UNK, UNK, UNK]);
            for ctx in contexts {
                let sum: f64 = m.distribution(&ctx).iter().sum();
                assert!((sum - 1.0).abs() < 1e-9, "order {order} ctx {ctx:?} sum {sum}");
                let scalar: f64 = (1..m.vocab_size() as TokenId).map(|w| m.prob(w, &ctx)).sum();
                assert!((scalar - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dense_and_scalar_paths_agree_bitwise() {
        let m = NgramModel::train_from_text("x y z x y\nz z y x\ny x", &opts(3, Smoothing::KneserNey)).unwrap();
        for ctx in [vec![BOS], vec![BOS, 3], vec![3, 4], vec![5, 5], vec![]] {
            let dense = m.distribution(&ctx);
            for w in 0..m.vocab_size() as TokenId {
                assert_eq!(dense[w as usize].to_bits(), m.prob(w, &ctx).to_bits());
            }
        }
    }

    #[test]
    fn hapax_words_become_unk() {
        let o = TrainOptions { unk_threshold: 1, ..TrainOptions::default() };
        let m = NgramModel::train_from_text("a a b\na c", &o).unwrap();
        assert_eq!(m.vocab(), &["<s>", "</s>", "<unk>", "a"]);
        assert_eq!(m.token_id("b"), UNK);
        assert!(m.prob(UNK, &[BOS]) > 0.0);
    }

    #[test]
    fn training_errors() {
        let empty: Vec<Vec<&str>> = vec![];
        assert_eq!(NgramModel::train(empty, &TrainOptions::default()).unwrap_err(), TrainError::EmptyCorpus);
        assert_eq!(NgramModel::train_from_text("  \n", &TrainOptions::default()).unwrap_err(), TrainError::EmptyCorpus);
        let o = TrainOptions { order: 0, ..TrainOptions::default() };
        assert_eq!(NgramModel::train_from_text("a", &o).unwrap_err(), TrainError::InvalidOrder(0));
        let o = TrainOptions { discount: 1.0, ..TrainOptions::default() };
        assert!(matches!(NgramModel::train_from_text("a", &o), Err(TrainError::InvalidDiscount(_))));
    }

    #[test]
    fn argmax_has_rank_one_and_candidates_sorted() {
        let m = NgramModel::train_from_text("a b c\na b d\na b c", &opts(3, Smoothing::KneserNey)).unwrap();
        let ctx = [m.token_id("a"), m.token_id("b")];
        let probs = m.distribution(&m.history(&ctx, true));
        let argmax = (1..probs.len()).max_by(|&x, &y| probs[x].total_cmp(&probs[y]).then(y.cmp(&x))).unwrap();
        let r = m
            .score(&ScoreRequest {
                context: &ctx,
                actual: argmax as TokenId,
                top_k: 5,
                sequence_start: true,
                include_distribution: false,
            })
            .unwrap();
        assert_eq!(r.actual_rank, Some(1));
        assert_eq!(r.top_candidates[0].id, argmax as TokenId);
        assert_eq!(m.vocab()[argmax], "c");
        for pair in r.top_candidates.windows(2) {
            assert!(pair[0].probability.value() > pair[1].probability.value()
                || (pair[0].probability == pair[1].probability && pair[0].id < pair[1].id));
        }
    }

    #[test]
    fn unknown_token_is_rejected() {
        let m = NgramModel::train_from_text("a b", &opts(2, Smoothing::KneserNey)).unwrap();
        let req = ScoreRequest { context: &[], actual: 99, top_k: 5, sequence_start: true, include_distribution: false };
        assert!(matches!(m.score(&req), Err(BackendError::UnknownToken(99))));
    }

    #[test]
    fn tokenize_maps_oov_to_unk() {
        let m = NgramModel::train_from_text("a b", &opts(2, Smoothing::KneserNey)).unwrap();
        let toks = m.tokenize("a  zzz").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[1].piece, "  zzz");
        assert_eq!(toks[1].id, UNK);
        assert!(m.tokenize("").unwrap().is_empty());
    }
}
