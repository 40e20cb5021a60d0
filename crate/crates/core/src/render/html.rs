use std::fmt::Write;

use super::palette::{Mode, Palette};
use super::{describe_word, unit_name, word_parts};
use crate::buckets::BUCKET_COUNT;
use crate::pipeline::AnnotatedDocument;

const STYLE: &str = "\
body{font-family:system-ui,sans-serif;margin:2em;line-height:1.9}\
body.light{background:#fafafa;color:#111}\
body.dark{background:#161616;color:#eee}\
.glitter-text{white-space:pre-wrap;font-size:1.1em}\
.w{position:relative;border-radius:3px;padding:0 1px}\
.w.f{text-decoration:underline;text-decoration-thickness:2px;text-underline-offset:3px}\
.w:hover::after{content:attr(data-tip);white-space:pre;position:absolute;left:0;top:1.8em;z-index:10;\
background:#222;color:#fff;font:12px/1.4 monospace;padding:6px 8px;border-radius:4px;pointer-events:none}\
.glitter-legend span{display:inline-block;width:1.6em;text-align:center;font-size:.8em}\
.glitter-meta{font-size:.9em;margin-bottom:1em}";

fn escape(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            '\n' => out.push_str("&#10;"),
            c => out.push(c),
        }
    }
}

fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_owned(), |x| format!("{x:.digits$}"))
}

/// Renders a standalone HTML page. Tooltips are pure CSS; the page loads no
/// scripts or external resources.
pub fn to_html(doc: &AnnotatedDocument, palette: &Palette, mode: Mode) -> String {
    let mut out = String::with_capacity(doc.normalized_text.len() * 8 + 4096);
    let body_class = match mode {
        Mode::Light => "light",
        Mode::Dark => "dark",
    };
    out.push_str("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Glitter</title><style>");
    out.push_str(STYLE);
    let _ = write!(out, "</style></head>\n<body class=\"{body_class}\">\n");

    let st = &doc.stats;
    let unit = unit_name(doc.provenance.log_base);
    out.push_str("<div class=\"glitter-meta\">");
    let _ = write!(
        out,
        "{} tokens, {} words; mean surprisal {} {unit}/word; perplexity {}; formulaic coverage {}; model ",
        st.token_count,
        st.word_count,
        fmt_opt(st.mean_surprisal, 3),
        fmt_opt(st.perplexity, 2),
        fmt_opt(st.formulaic_coverage.map(|c| c * 100.0), 1) + "%",
    );
    escape_text(&doc.provenance.model_id, &mut out);
    out.push_str("</div>\n<div class=\"glitter-legend\">");
    for (b, c) in palette.colors(mode).iter().enumerate().take(BUCKET_COUNT) {
        let _ = write!(out, "<span style=\"background:{c};color:{}\">{b}</span>", c.text_color());
    }
    out.push_str("</div>\n<div class=\"glitter-text\">");

    for (i, word) in doc.words.iter().enumerate() {
        let parts = word_parts(doc, word);
        escape_text(&parts.leading, &mut out);
        if !parts.core.is_empty() {
            let color = palette.color(word.bucket, mode);
            let formulaic = doc.runs.iter().any(|r| r.contains(i));
            let _ = write!(
                out,
                "<span class=\"w b{}{}\" style=\"background:{color};color:{}\" data-tip=\"",
                word.bucket.get(),
                if formulaic { " f" } else { "" },
                color.text_color()
            );
            escape(&describe_word(doc, word, &parts.core), &mut out);
            out.push_str("\">");
            escape_text(&parts.core, &mut out);
            out.push_str("</span>");
        }
        escape_text(&parts.trailing, &mut out);
    }
    out.push_str("</div>\n</body></html>\n");
    out
}
