//! The completions-API backend against a local mock server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use glitter_core::backends::tokenizer::split_words;
use glitter_core::backends::{Backend, BackendError, HttpBackend, HttpBackendConfig, HttpTokenization, ScoreRequest};
use glitter_core::{glitter, BucketIndex, GlitterConfig, Rank};
use serde_json::{json, Value};

const LN_HALF: f64 = -0.6931471805599453;

struct Reply {
    status: u16,
    body: String,
}

/// Serves requests on a background thread until the test process exits.
fn serve(handler: impl Fn(usize, Value) -> Reply + Send + Sync + 'static) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/completions", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    let handler = Arc::new(handler);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let n = counter.fetch_add(1, Ordering::SeqCst);
            let handler = handler.clone();
            std::thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                let reply = handler(n, serde_json::from_slice(&body).unwrap_or(Value::Null));
                let _ = write!(
                    stream,
                    "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    reply.status,
                    reply.body.len(),
                    reply.body
                );
            });
        }
    });
    (url, hits)
}

/// Echoes the prompt word by word; every scored token has probability 1/2
/// and, unless `hide_actual`, appears first among the alternatives.
fn echo_body(req: &Value, hide_actual: bool) -> String {
    let prompt = req["prompt"].as_str().unwrap();
    let pieces: Vec<&str> = split_words(prompt).into_iter().map(|w| w.piece).collect();
    let lps: Vec<Value> = (0..pieces.len()).map(|i| if i == 0 { Value::Null } else { json!(LN_HALF) }).collect();
    let tops: Vec<Value> = pieces
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if i == 0 {
                return Value::Null;
            }
            let mut m = serde_json::Map::new();
            if !hide_actual {
                m.insert((*p).to_owned(), json!(LN_HALF));
            }
            m.insert(" alt".into(), json!(0.4f64.ln()));
            Value::Object(m)
        })
        .collect();
    json!({"choices": [{"text": prompt, "logprobs": {"tokens": pieces, "token_logprobs": lps, "top_logprobs": tops}}]})
        .to_string()
}

fn config(url: &str) -> HttpBackendConfig {
    HttpBackendConfig { backoff_ms: 1, tokenization: HttpTokenization::Words, ..HttpBackendConfig::new(url, "mock") }
}

#[test]
fn logprobs_become_probabilities() {
    let (url, _) = serve(|_, req| Reply { status: 200, body: echo_body(&req, false) });
    let backend = HttpBackend::new(config(&url)).unwrap();
    let doc = glitter("one two three", &backend, "mock", &GlitterConfig::default()).unwrap();
    let first = &doc.positions[0];
    assert!(first.flags.unscored);
    assert_eq!(first.bucket, BucketIndex::UNSCORED);
    for p in &doc.positions[1..] {
        assert!((p.probability.unwrap() - 0.5).abs() < 1e-12);
        assert!((p.surprisal.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(p.rank, Rank::Exact(1));
        assert_eq!(p.bucket.get(), 0);
        assert_eq!(p.top_candidates[1].piece, " alt");
    }
}

#[test]
fn truncated_distribution_keeps_tail_mass() {
    let (url, _) = serve(|_, req| Reply { status: 200, body: echo_body(&req, false) });
    let backend = HttpBackend::new(config(&url)).unwrap();
    let toks = backend.tokenize("one two").unwrap();
    let ids: Vec<u32> = toks.iter().map(|t| t.id).collect();
    let r = backend
        .score(&ScoreRequest { context: &ids[..1], actual: ids[1], top_k: 5, sequence_start: true, include_distribution: true })
        .unwrap();
    let d = r.distribution.unwrap();
    assert!(!d.is_complete());
    assert!((d.tail_mass() - 0.1).abs() < 1e-9);
}

#[test]
fn unknown_rank_falls_back_to_probability() {
    let (url, _) = serve(|_, req| Reply { status: 200, body: echo_body(&req, true) });
    let backend = HttpBackend::new(config(&url)).unwrap();
    let doc = glitter("one two", &backend, "mock", &GlitterConfig::default()).unwrap();
    let p = &doc.positions[1];
    assert_eq!(p.rank, Rank::Unknown);
    assert!(p.flags.estimated_rank);
    // floor(-log2 0.5) = 1
    assert_eq!(p.bucket.get(), 1);
    assert!(doc.provenance.rank_fallback);
}

#[test]
fn server_errors_are_retried() {
    let (url, hits) = serve(|n, req| {
        if n < 2 {
            Reply { status: 503, body: "busy".into() }
        } else {
            Reply { status: 200, body: echo_body(&req, false) }
        }
    });
    let backend = HttpBackend::new(config(&url)).unwrap();
    let echoed = backend.echo("a b", 1).unwrap();
    assert_eq!(echoed.len(), 2);
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn retries_are_bounded() {
    let (url, hits) = serve(|_, _| Reply { status: 500, body: "down".into() });
    let backend = HttpBackend::new(config(&url)).unwrap();
    match backend.echo("a b", 1) {
        Err(BackendError::Transport { attempts, message }) => {
            assert_eq!(attempts, 3);
            assert!(message.contains("500"));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, hits) = serve(|_, _| Reply { status: 400, body: "{\"error\":\"bad model\"}".into() });
    let backend = HttpBackend::new(config(&url)).unwrap();
    match backend.echo("a", 1) {
        Err(BackendError::Protocol { excerpt, .. }) => assert!(excerpt.contains("bad model")),
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn server_tokenization_must_reproduce_text() {
    let (url, _) = serve(|_, req| Reply { status: 200, body: echo_body(&req, false) });
    let backend = HttpBackend::new(HttpBackendConfig { tokenization: HttpTokenization::Server, ..config(&url) }).unwrap();
    let toks = backend.tokenize("alpha beta, gamma").unwrap();
    assert_eq!(toks.iter().map(|t| t.piece.as_str()).collect::<Vec<_>>(), ["alpha", " beta", ",", " gamma"]);
}

#[test]
fn windows_respect_the_context_limit() {
    let (url, _) = serve(|_, req| {
        let n = split_words(req["prompt"].as_str().unwrap()).len();
        if n > 8 {
            Reply { status: 400, body: "context too long".into() }
        } else {
            Reply { status: 200, body: echo_body(&req, false) }
        }
    });
    let backend = HttpBackend::new(HttpBackendConfig { max_context_tokens: Some(8), ..config(&url) }).unwrap();
    let text = (0..40).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
    let doc = glitter(&text, &backend, "mock", &GlitterConfig::default()).unwrap();
    assert_eq!(doc.positions.len(), 40);
    assert!(doc.positions[1..].iter().all(|p| p.probability == Some(0.5)));
}
