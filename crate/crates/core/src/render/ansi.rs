use std::fmt::Write;

use super::palette::{Mode, Palette};
use super::word_parts;
use crate::pipeline::AnnotatedDocument;

const RESET: &str = "\x1b[0m";

/// Terminal rendering with 24-bit background colors, using the dark palette.
/// Honors the `NO_COLOR` convention: if the variable is set and non-empty
/// the plain text is returned.
pub fn to_ansi(doc: &AnnotatedDocument, palette: &Palette) -> String {
    let color = std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty());
    to_ansi_with(doc, palette, color)
}

pub fn to_ansi_with(doc: &AnnotatedDocument, palette: &Palette, color: bool) -> String {
    if !color {
        return doc.normalized_text.clone();
    }
    let mut out = String::with_capacity(doc.normalized_text.len() * 24);
    for (i, word) in doc.words.iter().enumerate() {
        let parts = word_parts(doc, word);
        out.push_str(&parts.leading);
        if !parts.core.is_empty() {
            let bg = palette.color(word.bucket, Mode::Dark);
            let fg = bg.text_color();
            let _ = write!(out, "\x1b[48;2;{};{};{}m\x1b[38;2;{};{};{}m", bg.0, bg.1, bg.2, fg.0, fg.1, fg.2);
            if doc.runs.iter().any(|r| r.contains(i)) {
                out.push_str("\x1b[4m");
            }
            out.push_str(&parts.core);
            out.push_str(RESET);
        }
        out.push_str(&parts.trailing);
    }
    out
}

/// Removes CSI escape sequences.
pub fn strip_ansi(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\x1b' && chars.peek() == Some(&'[') {
            chars.next();
            for d in chars.by_ref() {
                if ('\x40'..='\x7e').contains(&d) {
                    break;
                }
            }
        } else {
            out.push(c);
        }
    }
    out
}
