//! Text normalization, token-to-span alignment and word grouping.
//!
//! All offsets are character (Unicode scalar value) offsets, not bytes.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::char::canonical_combining_class;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SegmentationError {
    #[error("input is not valid UTF-8 (first invalid byte at {0})")]
    InvalidUtf8(usize),
    #[error("token pieces diverge from the text at character {offset}")]
    Misaligned { offset: usize },
}

/// Half-open character range into the normalized text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Maps each normalized character back to the raw character it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetMap {
    origins: Vec<usize>,
    raw_len: usize,
}

impl OffsetMap {
    /// Raw character offset where the normalized character at `offset`
    /// originates. `offset == len` maps to the raw length.
    pub fn raw_offset(&self, offset: usize) -> Option<usize> {
        match offset.cmp(&self.origins.len()) {
            std::cmp::Ordering::Less => Some(self.origins[offset]),
            std::cmp::Ordering::Equal => Some(self.raw_len),
            std::cmp::Ordering::Greater => None,
        }
    }

    pub fn raw_span(&self, span: SourceSpan) -> Option<Range<usize>> {
        Some(self.raw_offset(span.start)?..self.raw_offset(span.end)?)
    }

    pub fn is_identity(&self) -> bool {
        self.raw_len == self.origins.len() && self.origins.iter().enumerate().all(|(i, &o)| i == o)
    }
}

pub fn normalize_bytes(raw: &[u8]) -> Result<(String, OffsetMap), SegmentationError> {
    let text = std::str::from_utf8(raw).map_err(|e| SegmentationError::InvalidUtf8(e.valid_up_to()))?;
    Ok(normalize(text))
}

/// Unicode NFC plus newline canonicalization (CRLF and lone CR become LF).
pub fn normalize(raw: &str) -> (String, OffsetMap) {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = String::with_capacity(raw.len());
    let mut origins = Vec::with_capacity(chars.len());

    // Split into segments that NFC cannot merge across, then normalize each
    // segment on its own so every output character has one raw origin.
    let mut seg = String::new();
    let mut seg_start = 0usize;
    let emit = |seg: &str, start: usize, out: &mut String, origins: &mut Vec<usize>| {
        for c in seg.nfc() {
            out.push(c);
            origins.push(start);
        }
    };

    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\r' {
            emit(&seg, seg_start, &mut out, &mut origins);
            seg.clear();
            out.push('\n');
            origins.push(i);
            i += if chars.get(i + 1) == Some(&'\n') { 2 } else { 1 };
            seg_start = i;
            continue;
        }
        if !seg.is_empty() && canonical_combining_class(c) == 0 && splits_before(&seg, c) {
            emit(&seg, seg_start, &mut out, &mut origins);
            seg.clear();
            seg_start = i;
        }
        seg.push(c);
        i += 1;
    }
    emit(&seg, seg_start, &mut out, &mut origins);

    (out, OffsetMap { origins, raw_len: chars.len() })
}

fn splits_before(seg: &str, next: char) -> bool {
    // ASCII never composes with a preceding character.
    if next.is_ascii() {
        return true;
    }
    let joined: String = seg.chars().chain(std::iter::once(next)).nfc().collect();
    let separate: String = seg.nfc().chain(std::iter::once(next).nfc()).collect();
    joined == separate
}

/// Assigns each piece its span; pieces must concatenate to `text` exactly.
pub fn align_tokens<S: AsRef<str>>(text: &str, pieces: &[S]) -> Result<Vec<SourceSpan>, SegmentationError> {
    let mut spans = Vec::with_capacity(pieces.len());
    let mut rest = text.chars();
    let mut offset = 0usize;
    for piece in pieces {
        let start = offset;
        for pc in piece.as_ref().chars() {
            match rest.next() {
                Some(tc) if tc == pc => offset += 1,
                _ => return Err(SegmentationError::Misaligned { offset }),
            }
        }
        spans.push(SourceSpan { start, end: offset });
    }
    if rest.next().is_some() {
        return Err(SegmentationError::Misaligned { offset });
    }
    Ok(spans)
}

pub fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    c.is_ascii_punctuation()
        || matches!(
            get_general_category(c),
            ConnectorPunctuation
                | DashPunctuation
                | OpenPunctuation
                | ClosePunctuation
                | InitialPunctuation
                | FinalPunctuation
                | OtherPunctuation
        )
}

/// A piece is punctuation when its non-whitespace content is non-empty and
/// consists only of punctuation characters.
pub fn is_punctuation_piece(piece: &str) -> bool {
    let core = piece.trim();
    !core.is_empty() && core.chars().all(is_punctuation)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordGroup {
    pub word_index: usize,
    pub token_indices: Range<usize>,
    pub span: SourceSpan,
    pub is_leading_whitespace_attached: bool,
}

/// Groups consecutive subword tokens into display words.
///
/// A word starts at the first token, at any token that begins with
/// whitespace, after a token that ends with whitespace, and around
/// punctuation tokens, which always stand alone.
pub fn group_words<S: AsRef<str>>(tokens: &[(S, SourceSpan)]) -> Vec<WordGroup> {
    let mut words: Vec<WordGroup> = Vec::new();
    let mut prev_breaks = true;
    for (i, (piece, span)) in tokens.iter().enumerate() {
        let piece = piece.as_ref();
        let punct = is_punctuation_piece(piece);
        let starts_ws = piece.chars().next().is_some_and(char::is_whitespace);
        let ends_ws = piece.chars().last().is_some_and(char::is_whitespace);
        let new_word = prev_breaks || starts_ws || punct;
        match words.last_mut() {
            Some(w) if !new_word => {
                w.token_indices.end = i + 1;
                w.span.end = span.end;
            }
            _ => words.push(WordGroup {
                word_index: words.len(),
                token_indices: i..i + 1,
                span: *span,
                is_leading_whitespace_attached: starts_ws,
            }),
        }
        prev_breaks = punct || ends_ws;
    }
    words
}

/// Converts character offsets to byte offsets for slicing `text`.
pub fn char_to_byte_offsets(text: &str) -> Vec<usize> {
    let mut v: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    v.push(text.len());
    v
}
