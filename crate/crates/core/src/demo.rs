//! Bundled demonstration material: a small corpus of formulaic
//! administrative prose, a sample notice, and the 4-gram model trained on
//! the corpus.

use std::ops::Range;

use crate::backends::{ModelFormatError, NgramModel, TrainOptions};
use crate::pipeline::AnnotatedDocument;

pub const DEMO_CORPUS: &str = include_str!("../assets/admin_corpus.txt");
pub const DEMO_SAMPLE: &str = include_str!("../assets/sample_notice.txt");
/// The committed serialization of [`train_demo_model`].
pub const DEMO_MODEL_BYTES: &[u8] = include_bytes!("../assets/demo.glng");

/// The boilerplate sentence closing [`DEMO_SAMPLE`].
pub const DEMO_BOILERPLATE: &str = "The decision shall take effect on the date of its delivery to the participant.";

pub const DEMO_BACKEND_ID: &str = "demo-ngram";

pub fn demo_train_options() -> TrainOptions {
    TrainOptions { order: 4, ..TrainOptions::default() }
}

pub fn train_demo_model() -> NgramModel {
    NgramModel::train_from_text(DEMO_CORPUS, &demo_train_options()).expect("bundled corpus is non-empty")
}

pub fn demo_model() -> Result<NgramModel, ModelFormatError> {
    NgramModel::from_bytes(DEMO_MODEL_BYTES)
}

/// Indices of the words whose visible text lies within the first
/// occurrence of `sentence` in the document.
pub fn words_within(doc: &AnnotatedDocument, sentence: &str) -> Option<Range<usize>> {
    let byte = doc.normalized_text.find(sentence)?;
    let start = doc.normalized_text[..byte].chars().count();
    let end = start + sentence.chars().count();
    let inside: Vec<usize> = doc
        .words
        .iter()
        .enumerate()
        .filter(|(_, w)| {
            let text = doc.word_text(w);
            let core_start = w.group.span.start + text.chars().take_while(|c| c.is_whitespace()).count();
            let core_end = core_start + text.trim().chars().count();
            core_start >= start && core_end <= end
        })
        .map(|(i, _)| i)
        .collect();
    Some(*inside.first()?..*inside.last()? + 1)
}
