//! Output surfaces for annotated documents: standalone HTML, ANSI terminal
//! text and canonical JSON.

mod ansi;
mod html;
pub mod palette;
pub mod structured;

pub use ansi::{strip_ansi, to_ansi, to_ansi_with};
pub use html::to_html;
pub use palette::{Mode, Palette, PaletteError, Rgb};
pub use structured::{canonicalize, to_structured, to_structured_value, STRUCTURED_VERSION};

use crate::buckets::Rank;
use crate::pipeline::{AnnotatedDocument, WordAnnotation};

/// A word's text split into leading whitespace, visible core, and trailing
/// whitespace.
pub(crate) struct WordParts {
    pub leading: String,
    pub core: String,
    pub trailing: String,
}

pub(crate) fn word_parts(doc: &AnnotatedDocument, word: &WordAnnotation) -> WordParts {
    let text = doc.word_text(word);
    let core_start = text.len() - text.trim_start().len();
    let core_end = text.trim_end().len().max(core_start);
    WordParts {
        leading: text[..core_start].to_owned(),
        core: text[core_start..core_end].to_owned(),
        trailing: text[core_end..].to_owned(),
    }
}

pub(crate) fn unit_name(base: f64) -> &'static str {
    if base == 2.0 {
        "bits"
    } else if base == std::f64::consts::E {
        "nats"
    } else {
        "units"
    }
}

/// Multi-line description of a word for tooltips.
pub(crate) fn describe_word(doc: &AnnotatedDocument, word: &WordAnnotation, core: &str) -> String {
    let mut lines = vec![core.to_owned()];
    let first = &doc.positions[word.first_token()];
    match (word.probability, word.surprisal) {
        (Some(p), Some(s)) => {
            lines.push(format!("probability {p:.6}"));
            let capped = if word.capped { " (capped)" } else { "" };
            lines.push(format!("surprisal {s:.3} {}{capped}", unit_name(doc.provenance.log_base)));
            let rank = match (word.group.token_indices.len(), first.rank) {
                (1, Rank::Exact(r)) => format!("rank {r}"),
                (1, _) => "rank unknown, bucket from probability".to_owned(),
                (n, _) => format!("{n} subword tokens"),
            };
            lines.push(format!("{rank}, bucket {}", word.bucket.get()));
        }
        _ => lines.push("no preceding context".to_owned()),
    }
    if !first.top_candidates.is_empty() {
        lines.push("expected:".to_owned());
        for c in &first.top_candidates {
            lines.push(format!("  {:?} {:.4}", c.piece, c.probability));
        }
    }
    lines.join("\n")
}
