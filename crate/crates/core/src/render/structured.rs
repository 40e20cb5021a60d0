//! Canonical JSON form of an annotated document.
//!
//! Keys are sorted, there is no insignificant whitespace, and every
//! non-integer number is rounded to 9 significant digits and printed in
//! its shortest round-trip form. Equal documents serialize to equal bytes,
//! and re-serializing parsed output reproduces it byte for byte.

use serde_json::{json, Map, Value};

use crate::buckets::Rank;
use crate::pipeline::AnnotatedDocument;

pub const STRUCTURED_VERSION: u32 = 1;

fn span(s: crate::segmentation::SourceSpan) -> Value {
    json!([s.start, s.end])
}

pub fn to_structured_value(doc: &AnnotatedDocument) -> Value {
    let positions: Vec<Value> = doc
        .positions
        .iter()
        .map(|p| {
            let (rank, kind) = match p.rank {
                Rank::Exact(r) => (json!(r), "exact"),
                Rank::Unknown => (Value::Null, "estimated"),
                Rank::Unscored => (Value::Null, "unscored"),
            };
            json!({
                "index": p.token_index,
                "token_id": p.token_id,
                "piece": p.piece,
                "span": span(p.span),
                "probability": p.probability,
                "surprisal": p.surprisal,
                "rank": rank,
                "rank_kind": kind,
                "bucket": p.bucket.get(),
                "top_candidates": p.top_candidates.iter()
                    .map(|c| json!({"piece": c.piece, "probability": c.probability}))
                    .collect::<Vec<_>>(),
                "flags": {
                    "capped": p.flags.capped,
                    "estimated_rank": p.flags.estimated_rank,
                    "unscored": p.flags.unscored,
                },
            })
        })
        .collect();
    let words: Vec<Value> = doc
        .words
        .iter()
        .map(|w| {
            json!({
                "index": w.group.word_index,
                "tokens": [w.group.token_indices.start, w.group.token_indices.end],
                "span": span(w.group.span),
                "text": doc.word_text(w),
                "leading_whitespace": w.group.is_leading_whitespace_attached,
                "probability": w.probability,
                "surprisal": w.surprisal,
                "bucket": w.bucket.get(),
                "capped": w.capped,
            })
        })
        .collect();
    let runs: Vec<Value> = doc
        .runs
        .iter()
        .map(|r| json!({"start_word": r.start_word, "end_word": r.end_word, "mean_surprisal": r.mean_surprisal}))
        .collect();
    let st = &doc.stats;
    let pv = &doc.provenance;
    json!({
        "version": STRUCTURED_VERSION,
        "provenance": {
            "backend_id": pv.backend_id,
            "backend_kind": pv.backend_kind,
            "model_id": pv.model_id,
            "config_digest": pv.config_digest,
            "log_base": pv.log_base,
            "rank_fallback": pv.rank_fallback,
        },
        "text": doc.normalized_text,
        "positions": positions,
        "words": words,
        "runs": runs,
        "stats": {
            "token_count": st.token_count,
            "word_count": st.word_count,
            "scored_word_count": st.scored_word_count,
            "mean_surprisal": st.mean_surprisal,
            "perplexity": st.perplexity,
            "bucket_histogram": st.bucket_histogram.to_vec(),
            "formulaic_coverage": st.formulaic_coverage,
        },
    })
}

pub fn to_structured(doc: &AnnotatedDocument) -> Vec<u8> {
    let mut out = String::new();
    write_canonical(&to_structured_value(doc), &mut out);
    out.into_bytes()
}

/// Re-serializes any JSON document in canonical form.
pub fn canonicalize(bytes: &[u8]) -> Result<Vec<u8>, serde_json::Error> {
    let v: Value = serde_json::from_slice(bytes)?;
    let mut out = String::new();
    write_canonical(&v, &mut out);
    Ok(out.into_bytes())
}

/// Rounds to 9 significant digits and prints the shortest representation
/// that parses back to the rounded value.
pub fn format_float(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:?}")
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                out.push_str(&n.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().expect("finite")));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => write_object(map, out),
    }
}

fn write_object(map: &Map<String, Value>, out: &mut String) {
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort();
    out.push('{');
    for (i, k) in keys.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&serde_json::to_string(k).expect("key serializes"));
        out.push(':');
        write_canonical(&map[k], out);
    }
    out.push('}');
}
