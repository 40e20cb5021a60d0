//! Replays per-token logprobs recorded in a newline-delimited JSON dump.
//!
//! The first line is a [`DumpHeader`]; every further line is one
//! [`DumpRecord`], in token order. Logprobs use the natural logarithm.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendCapabilities, BackendError, Candidate, ScoreRequest, ScoreResult, Token};
use crate::info::{sort_candidates, Probability, TokenId};

pub const DUMP_FORMAT: &str = "glitter-logprob-dump";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub format: String,
    pub version: u32,
    pub tokenizer: String,
    pub log_base: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpCandidate {
    pub piece: String,
    pub logprob_natural: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpRecord {
    pub index: usize,
    pub piece: String,
    /// `None` for a position that was not scored (no left context).
    pub logprob_natural: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<u64>,
    pub top_candidates: Vec<DumpCandidate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub header: DumpHeader,
    pub records: Vec<DumpRecord>,
}

fn finite_ln(p: f64) -> f64 {
    let lp = p.ln();
    if lp.is_finite() {
        lp
    } else {
        f64::MIN
    }
}

impl Dump {
    /// Scores `text` with `backend`, each position against its full left
    /// context, and records the result.
    pub fn record(backend: &dyn Backend, text: &str, top_k: usize, log_base: f64) -> Result<Dump, BackendError> {
        let tokens = backend.tokenize(text)?;
        let ids: Vec<TokenId> = tokens.iter().map(|t| t.id).collect();
        let caps = backend.capabilities();
        let mut records = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            let result = if i == 0 && !caps.has_bos {
                None
            } else {
                Some(backend.score(&ScoreRequest {
                    context: &ids[..i],
                    actual: tok.id,
                    top_k,
                    sequence_start: true,
                    include_distribution: false,
                })?)
            };
            records.push(DumpRecord {
                index: i,
                piece: tok.piece.clone(),
                logprob_natural: result.as_ref().map(|r| finite_ln(r.actual_probability.value())),
                rank: result.as_ref().and_then(|r| r.actual_rank),
                top_candidates: result
                    .map(|r| {
                        r.top_candidates
                            .into_iter()
                            .map(|c| DumpCandidate { piece: c.piece, logprob_natural: finite_ln(c.probability.value()) })
                            .collect()
                    })
                    .unwrap_or_default(),
            });
        }
        Ok(Dump {
            header: DumpHeader {
                format: DUMP_FORMAT.to_owned(),
                version: 1,
                tokenizer: backend.model_id(),
                log_base,
            },
            records,
        })
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn parse(input: &str) -> Result<Dump, BackendError> {
        let bad = |line: usize, e: &dyn std::fmt::Display| BackendError::Dump(format!("line {}: {e}", line + 1));
        let mut lines = input.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (n, first) = lines.next().ok_or_else(|| BackendError::Dump("empty dump".into()))?;
        let header: DumpHeader = serde_json::from_str(first).map_err(|e| bad(n, &e))?;
        if header.format != DUMP_FORMAT || header.version != 1 {
            return Err(bad(n, &format!("unsupported dump format {} v{}", header.format, header.version)));
        }
        let mut records = Vec::new();
        for (n, line) in lines {
            let rec: DumpRecord = serde_json::from_str(line).map_err(|e| bad(n, &e))?;
            if rec.index != records.len() {
                return Err(bad(n, &format!("expected index {}, found {}", records.len(), rec.index)));
            }
            records.push(rec);
        }
        Ok(Dump { header, records })
    }
}

/// Backend that serves the records of a [`Dump`].
pub struct PrecomputedBackend {
    dump: Dump,
    vocab: Vec<String>,
    index: HashMap<String, TokenId>,
    model_id: String,
}

impl PrecomputedBackend {
    pub fn new(dump: Dump) -> Self {
        let mut vocab = Vec::new();
        let mut index = HashMap::new();
        let mut intern = |piece: &str| {
            if !index.contains_key(piece) {
                index.insert(piece.to_owned(), vocab.len() as TokenId);
                vocab.push(piece.to_owned());
            }
        };
        for r in &dump.records {
            intern(&r.piece);
        }
        for r in &dump.records {
            for c in &r.top_candidates {
                intern(&c.piece);
            }
        }
        let model_id = format!("dump-{:08x}", crc32fast::hash(dump.to_ndjson().as_bytes()));
        PrecomputedBackend { dump, vocab, index, model_id }
    }

    pub fn from_ndjson(input: &str) -> Result<Self, BackendError> {
        Ok(PrecomputedBackend::new(Dump::parse(input)?))
    }

    pub fn dump(&self) -> &Dump {
        &self.dump
    }

    pub fn text(&self) -> String {
        self.dump.records.iter().map(|r| r.piece.as_str()).collect()
    }

    /// The score result a record stands for.
    pub fn record_to_result(&self, record: &DumpRecord, top_k: usize) -> Result<ScoreResult, BackendError> {
        let lp = record.logprob_natural.ok_or(BackendError::PositionUnavailable(record.index))?;
        let mut all = Vec::with_capacity(record.top_candidates.len());
        for c in &record.top_candidates {
            all.push((self.index[&c.piece], Probability::from_ln(c.logprob_natural)?.value()));
        }
        sort_candidates(&mut all);
        let actual = self.index[&record.piece];
        let rank = record
            .rank
            .or_else(|| all.iter().position(|&(id, _)| id == actual).map(|p| p as u64 + 1));
        all.truncate(top_k);
        Ok(ScoreResult {
            actual_probability: Probability::from_ln(lp)?,
            actual_rank: rank,
            top_candidates: all
                .into_iter()
                .map(|(id, p)| Candidate { id, piece: self.vocab[id as usize].clone(), probability: Probability::new(p).expect("validated") })
                .collect(),
            distribution: None,
        })
    }
}

impl Backend for PrecomputedBackend {
    fn kind(&self) -> &'static str {
        "precomputed"
    }

    fn model_id(&self) -> String {
        self.model_id.clone()
    }

    fn description(&self) -> String {
        format!("replay of {} recorded positions from {}", self.dump.records.len(), self.dump.header.tokenizer)
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            max_context_tokens: None,
            provides_full_distribution: false,
            top_k_limit: Some(self.dump.records.iter().map(|r| r.top_candidates.len()).max().unwrap_or(0)),
            has_bos: self.dump.records.first().is_some_and(|r| r.logprob_natural.is_some()),
        }
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        if text != self.text() {
            return Err(BackendError::Tokenization("text differs from the text recorded in the dump".into()));
        }
        Ok(self
            .dump
            .records
            .iter()
            .map(|r| Token { id: self.index[&r.piece], piece: r.piece.clone() })
            .collect())
    }

    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScoreResult, BackendError> {
        let pos = req.context.len();
        let record = match self.dump.records.get(pos) {
            Some(r) if req.sequence_start => r,
            _ => return Err(BackendError::PositionUnavailable(pos)),
        };
        if self.index.get(&record.piece) != Some(&req.actual) {
            return Err(BackendError::UnknownToken(req.actual));
        }
        self.record_to_result(record, req.top_k)
    }
}
