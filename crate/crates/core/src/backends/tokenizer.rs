//! Whitespace and punctuation tokenizer used by the n-gram backend.
//!
//! Words are maximal runs of characters that are neither whitespace nor
//! punctuation; every punctuation character is a token of its own. Pieces
//! keep the whitespace that precedes them, and whitespace at the very end
//! of the text is appended to the last piece, so the pieces always
//! concatenate back to the input.

use crate::segmentation::is_punctuation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordPiece<'a> {
    /// Exact slice of the input, including attached whitespace.
    pub piece: &'a str,
    /// The piece without surrounding whitespace; the vocabulary key.
    pub word: &'a str,
}

pub fn split_words(text: &str) -> Vec<WordPiece<'_>> {
    let mut out: Vec<WordPiece<'_>> = Vec::new();
    let mut piece_start = 0usize;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        let word_start = i;
        let mut word_end = i + c.len_utf8();
        if !is_punctuation(c) {
            while let Some(&(j, d)) = chars.peek() {
                if d.is_whitespace() || is_punctuation(d) {
                    break;
                }
                word_end = j + d.len_utf8();
                chars.next();
            }
        }
        out.push(WordPiece { piece: &text[piece_start..word_end], word: &text[word_start..word_end] });
        piece_start = word_end;
    }
    if piece_start < text.len() {
        if let Some(last) = out.last_mut() {
            let start = piece_start - last.piece.len();
            last.piece = &text[start..];
        }
    }
    out
}

/// Words of a training line, ignoring whitespace.
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    split_words(text).into_iter().map(|w| w.word)
}
