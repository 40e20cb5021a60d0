//! Client for OpenAI-compatible completion servers.
//!
//! The prompt is sent with `max_tokens: 0, echo: true, logprobs: K`; the
//! server answers with the logprob of every prompt token and its top-K
//! alternatives. Logprobs on the wire are natural logarithms.

use std::collections::HashMap;
use std::ops::Range;
use std::time::Duration;

use parking_lot::{Condvar, Mutex};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::tokenizer::split_words;
use super::{check_context, Backend, BackendCapabilities, BackendError, Candidate, ScoreRequest, ScoreResult, Token};
use crate::info::{sort_candidates, Probability, TokenDistribution, TokenId};
use crate::par::Execution;

/// How the backend splits text into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HttpTokenization {
    /// Ask the server (echo request) and use its tokens.
    #[default]
    Server,
    /// Use the local whitespace/punctuation tokenizer.
    Words,
}

/// Vocabulary-specific whitespace glyphs to expand in returned pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WhitespaceMarkers {
    /// Pieces are already plain text.
    #[default]
    None,
    /// Byte-level BPE: `Ġ` space, `Ċ` newline, `ĉ` tab.
    ByteBpe,
    /// SentencePiece: `▁` space.
    SentencePiece,
}

impl WhitespaceMarkers {
    pub fn expand(self, piece: &str) -> String {
        match self {
            WhitespaceMarkers::None => piece.to_owned(),
            WhitespaceMarkers::ByteBpe => piece
                .chars()
                .map(|c| match c {
                    'Ġ' => ' ',
                    'Ċ' => '\n',
                    'ĉ' => '\t',
                    c => c,
                })
                .collect(),
            WhitespaceMarkers::SentencePiece => piece.replace('▁', " "),
        }
    }
}

fn default_top_k() -> usize {
    5
}
fn default_timeout() -> f64 {
    30.0
}
fn default_attempts() -> u32 {
    3
}
fn default_backoff() -> u64 {
    250
}
fn default_in_flight() -> usize {
    4
}
fn default_context() -> Option<usize> {
    Some(1024)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpBackendConfig {
    /// Full URL of the completions endpoint, e.g.
    /// `http://localhost:8000/v1/completions`.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    /// First retry delay; doubles on every further attempt.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_context")]
    pub max_context_tokens: Option<usize>,
    #[serde(default)]
    pub tokenization: HttpTokenization,
    #[serde(default)]
    pub whitespace_markers: WhitespaceMarkers,
}

impl HttpBackendConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        HttpBackendConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key_env: None,
            top_k: default_top_k(),
            timeout_secs: default_timeout(),
            max_attempts: default_attempts(),
            backoff_ms: default_backoff(),
            max_in_flight: default_in_flight(),
            max_context_tokens: default_context(),
            tokenization: HttpTokenization::default(),
            whitespace_markers: WhitespaceMarkers::default(),
        }
    }
}

#[derive(Default)]
struct Interner {
    index: HashMap<String, TokenId>,
    pieces: Vec<String>,
}

impl Interner {
    fn intern(&mut self, piece: &str) -> TokenId {
        if let Some(&id) = self.index.get(piece) {
            return id;
        }
        let id = self.pieces.len() as TokenId;
        self.index.insert(piece.to_owned(), id);
        self.pieces.push(piece.to_owned());
        id
    }
}

/// Counting semaphore bounding concurrent requests.
struct InFlight {
    active: Mutex<usize>,
    freed: Condvar,
    max: usize,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock();
        while *active >= self.max {
            self.freed.wait(&mut active);
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.active.lock() -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Debug, Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: u32,
    echo: bool,
    logprobs: usize,
}

/// Per-token data extracted from a completion response.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoedToken {
    pub piece: String,
    pub logprob: Option<f64>,
    pub top: Vec<(String, f64)>,
}

pub struct HttpBackend {
    config: HttpBackendConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
    interner: Mutex<Interner>,
    in_flight: InFlight,
}

fn excerpt(s: &str) -> String {
    s.chars().take(200).collect()
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Result<Self, BackendError> {
        let api_key = match &config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| BackendError::Transport {
                message: format!("environment variable {var} holding the API key is not set"),
                attempts: 0,
            })?),
            None => None,
        };
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs_f64(config.timeout_secs.max(0.001))).build();
        let in_flight = InFlight { active: Mutex::new(0), freed: Condvar::new(), max: config.max_in_flight.max(1) };
        Ok(HttpBackend { config, agent, api_key, interner: Mutex::new(Interner::default()), in_flight })
    }

    pub fn config(&self) -> &HttpBackendConfig {
        &self.config
    }

    fn post(&self, body: &str) -> Result<String, BackendError> {
        let _permit = self.in_flight.acquire();
        let mut last = String::new();
        let attempts = self.config.max_attempts.max(1);
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms << (attempt - 1)));
            }
            let mut req = self.agent.post(&self.config.endpoint).set("Content-Type", "application/json");
            if let Some(key) = &self.api_key {
                req = req.set("Authorization", &format!("Bearer {key}"));
            }
            match req.send_string(body) {
                Ok(resp) => {
                    return resp.into_string().map_err(|e| BackendError::Transport {
                        message: format!("reading response body: {e}"),
                        attempts: attempt + 1,
                    })
                }
                Err(ureq::Error::Status(code, resp)) if code == 429 || code >= 500 => {
                    last = format!("server returned status {code}: {}", excerpt(&resp.into_string().unwrap_or_default()));
                }
                Err(ureq::Error::Status(code, resp)) => {
                    return Err(BackendError::Protocol {
                        message: format!("server rejected the request with status {code}"),
                        excerpt: excerpt(&resp.into_string().unwrap_or_default()),
                    })
                }
                Err(ureq::Error::Transport(t)) => last = t.to_string(),
            }
        }
        Err(BackendError::Transport { message: last, attempts })
    }

    /// Sends `prompt` and returns the echoed prompt tokens.
    pub fn echo(&self, prompt: &str, logprobs: usize) -> Result<Vec<EchoedToken>, BackendError> {
        let body = serde_json::to_string(&CompletionRequest {
            model: &self.config.model,
            prompt,
            max_tokens: 0,
            echo: true,
            logprobs,
        })
        .expect("request serializes");
        let raw = self.post(&body)?;
        parse_echo_response(&raw, self.config.whitespace_markers)
    }

    fn pieces_of(&self, ids: &[TokenId]) -> Result<Vec<String>, BackendError> {
        let interner = self.interner.lock();
        ids.iter()
            .map(|&id| interner.pieces.get(id as usize).cloned().ok_or(BackendError::UnknownToken(id)))
            .collect()
    }

    fn to_result(&self, tok: &EchoedToken, actual: TokenId, top_k: usize, with_distribution: bool) -> Result<ScoreResult, BackendError> {
        let lp = tok.logprob.ok_or_else(|| BackendError::Protocol {
            message: "server returned no logprob for a scored position".into(),
            excerpt: tok.piece.clone(),
        })?;
        let mut top: Vec<(TokenId, f64)> = {
            let mut sorted: Vec<&(String, f64)> = tok.top.iter().collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            let mut interner = self.interner.lock();
            sorted
                .into_iter()
                .map(|(piece, lp)| Ok((interner.intern(piece), Probability::from_ln(*lp)?.value())))
                .collect::<Result<_, BackendError>>()?
        };
        sort_candidates(&mut top);
        let rank = top.iter().position(|&(id, _)| id == actual).map(|p| p as u64 + 1);
        top.truncate(top_k);
        let distribution = if with_distribution {
            let covered: f64 = top.iter().map(|e| e.1).sum();
            Some(TokenDistribution::new(top.clone(), false, (1.0 - covered).max(0.0))?)
        } else {
            None
        };
        let pieces = self.pieces_of(&top.iter().map(|e| e.0).collect::<Vec<_>>())?;
        Ok(ScoreResult {
            actual_probability: Probability::from_ln(lp)?,
            actual_rank: rank,
            top_candidates: top
                .into_iter()
                .zip(pieces)
                .map(|((id, p), piece)| Candidate { id, piece, probability: Probability::new(p).expect("validated") })
                .collect(),
            distribution,
        })
    }

    fn echo_checked(&self, pieces: &[String]) -> Result<Vec<EchoedToken>, BackendError> {
        let prompt: String = pieces.concat();
        let echoed = self.echo(&prompt, self.config.top_k)?;
        let returned: Vec<&str> = echoed.iter().map(|t| t.piece.as_str()).collect();
        if returned.len() != pieces.len() || returned.iter().zip(pieces).any(|(a, b)| *a != b) {
            return Err(BackendError::Protocol {
                message: format!(
                    "server tokenized the prompt into {} tokens, expected {}",
                    returned.len(),
                    pieces.len()
                ),
                excerpt: excerpt(&format!("{returned:?}")),
            });
        }
        Ok(echoed)
    }
}

/// Extracts prompt tokens from an echo completion response.
pub fn parse_echo_response(raw: &str, markers: WhitespaceMarkers) -> Result<Vec<EchoedToken>, BackendError> {
    let protocol = |message: &str| BackendError::Protocol { message: message.to_owned(), excerpt: excerpt(raw) };
    let v: Value = serde_json::from_str(raw).map_err(|e| protocol(&format!("response is not JSON: {e}")))?;
    let lp = v
        .pointer("/choices/0/logprobs")
        .and_then(Value::as_object)
        .ok_or_else(|| protocol("response has no choices[0].logprobs"))?;
    let tokens = lp.get("tokens").and_then(Value::as_array).ok_or_else(|| protocol("logprobs.tokens missing"))?;
    let token_lps = lp
        .get("token_logprobs")
        .and_then(Value::as_array)
        .ok_or_else(|| protocol("logprobs.token_logprobs missing"))?;
    let empty = Vec::new();
    let top_lps = lp.get("top_logprobs").and_then(Value::as_array).unwrap_or(&empty);
    if token_lps.len() != tokens.len() || (!top_lps.is_empty() && top_lps.len() != tokens.len()) {
        return Err(protocol("logprob arrays differ in length from tokens"));
    }
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let piece = t.as_str().ok_or_else(|| protocol("token is not a string"))?;
            let logprob = match &token_lps[i] {
                Value::Null => None,
                x => Some(x.as_f64().ok_or_else(|| protocol("token logprob is not a number"))?),
            };
            let top = match top_lps.get(i) {
                None | Some(Value::Null) => Vec::new(),
                Some(Value::Object(m)) => m
                    .iter()
                    .map(|(k, x)| {
                        x.as_f64()
                            .map(|f| (markers.expand(k), f))
                            .ok_or_else(|| protocol("top logprob is not a number"))
                    })
                    .collect::<Result<_, _>>()?,
                Some(_) => return Err(protocol("top_logprobs entry is not an object")),
            };
            Ok(EchoedToken { piece: markers.expand(piece), logprob, top })
        })
        .collect()
}

impl Backend for HttpBackend {
    fn kind(&self) -> &'static str {
        "http"
    }

    fn model_id(&self) -> String {
        self.config.model.clone()
    }

    fn description(&self) -> String {
        format!("OpenAI-compatible completions server at {} serving {}", self.config.endpoint, self.config.model)
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            max_context_tokens: self.config.max_context_tokens,
            provides_full_distribution: false,
            top_k_limit: Some(self.config.top_k),
            has_bos: false,
        }
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>, BackendError> {
        if text.is_empty() {
            return Ok(Vec::new());
        }
        let pieces: Vec<String> = match self.config.tokenization {
            HttpTokenization::Words => split_words(text).into_iter().map(|w| w.piece.to_owned()).collect(),
            HttpTokenization::Server => {
                let echoed = self.echo(text, 1)?;
                let pieces: Vec<String> = echoed.into_iter().map(|t| t.piece).collect();
                if pieces.concat() != text {
                    return Err(BackendError::Tokenization(
                        "server tokens do not reproduce the input text; configure whitespace markers or local tokenization".into(),
                    ));
                }
                pieces
            }
        };
        let mut interner = self.interner.lock();
        Ok(pieces.into_iter().map(|p| Token { id: interner.intern(&p), piece: p }).collect())
    }

    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScoreResult, BackendError> {
        check_context(&self.capabilities(), req.context.len())?;
        let mut ids = req.context.to_vec();
        ids.push(req.actual);
        let pieces = self.pieces_of(&ids)?;
        let echoed = self.echo_checked(&pieces)?;
        self.to_result(&echoed[echoed.len() - 1], req.actual, req.top_k, req.include_distribution)
    }

    fn score_window(
        &self,
        tokens: &[TokenId],
        window: Range<usize>,
        scored: Range<usize>,
        top_k: usize,
        _exec: Execution,
    ) -> Result<Vec<ScoreResult>, BackendError> {
        check_context(&self.capabilities(), window.len().saturating_sub(1))?;
        let pieces = self.pieces_of(&tokens[window.clone()])?;
        let echoed = self.echo_checked(&pieces)?;
        scored
            .map(|i| self.to_result(&echoed[i - window.start], tokens[i], top_k, false))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marker_expansion() {
        assert_eq!(WhitespaceMarkers::ByteBpe.expand("Ġworld"), " world");
        assert_eq!(WhitespaceMarkers::ByteBpe.expand("Ċ"), "\n");
        assert_eq!(WhitespaceMarkers::SentencePiece.expand("▁hello"), " hello");
        assert_eq!(WhitespaceMarkers::None.expand("Ġx"), "Ġx");
    }

    #[test]
    fn parse_response() {
        let raw = r#"{"choices":[{"text":"Hello world","logprobs":{"tokens":["Hello","Ġworld"],"token_logprobs":[null,-0.6931],"top_logprobs":[null,{"Ġworld":-0.6931,"Ġthere":-1.2}]}}]}"#;
        let toks = parse_echo_response(raw, WhitespaceMarkers::ByteBpe).unwrap();
        assert_eq!(toks[0].logprob, None);
        assert_eq!(toks[1].piece, " world");
        assert_eq!(toks[1].top.len(), 2);
        assert!(toks[1].top.iter().any(|(p, _)| p == " there"));
    }

    #[test]
    fn malformed_response_carries_excerpt() {
        match parse_echo_response("<html>oops</html>", WhitespaceMarkers::None) {
            Err(BackendError::Protocol { excerpt, .. }) => assert!(excerpt.contains("oops")),
            other => panic!("unexpected {other:?}"),
        }
        let missing = r#"{"choices":[{"text":"x"}]}"#;
        assert!(matches!(parse_echo_response(missing, WhitespaceMarkers::None), Err(BackendError::Protocol { .. })));
    }
}
