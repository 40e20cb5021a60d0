use glitter_core::backends::{NgramModel, Smoothing, TrainOptions};
use glitter_core::render::{canonicalize, strip_ansi, to_ansi_with, to_html, to_structured, Mode, Palette};
use glitter_core::testkit::SubwordBackend;
use glitter_core::{glitter, AnnotatedDocument, GlitterConfig, PipelineError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALPHABET: &[&str] = &[
    "a", "b", "Z", "é", "e\u{301}", "ß", "Ω", "ж", "中", "文", "😀", "👍🏽", "\u{1100}\u{1161}", "<", ">", "&", "\"", "'", ".", ",",
    "!", "«", "»", "—", "(", ")", "1", "9", " ", " ", " ", "  ", "\n", "\t", "\r\n", "\u{a0}", "&amp;", "<b>",
];

fn random_document(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..80);
    (0..n).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())]).collect()
}

/// Visible text of the rendered HTML body, decoded independently of the
/// renderer.
fn html_visible_text(html: &str) -> String {
    let start = html.find("<div class=\"glitter-text\">").expect("text container") + "<div class=\"glitter-text\">".len();
    let end = html.rfind("</div>").expect("container closes");
    let body = &html[start..end];
    let mut out = String::new();
    let mut depth = 0i32;
    let mut rest = body;
    while let Some(c) = rest.chars().next() {
        if c == '<' {
            let close = rest.find('>').expect("tag closes");
            let tag = &rest[..=close];
            if tag.starts_with("</span") {
                depth -= 1;
            } else if tag.starts_with("<span") {
                depth += 1;
            } else {
                panic!("unexpected tag {tag}");
            }
            assert!((0..=1).contains(&depth), "spans nest or underflow");
            rest = &rest[close + 1..];
        } else if c == '&' {
            let semi = rest.find(';').expect("entity terminates");
            out.push(match &rest[..=semi] {
                "&amp;" => '&',
                "&lt;" => '<',
                "&gt;" => '>',
                "&quot;" => '"',
                "&#39;" => '\'',
                e => panic!("unexpected entity {e}"),
            });
            rest = &rest[semi + 1..];
        } else {
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    assert_eq!(depth, 0);
    out
}

fn render_checks(doc: &AnnotatedDocument, palette: &Palette) {
    for mode in [Mode::Light, Mode::Dark] {
        assert_eq!(html_visible_text(&to_html(doc, palette, mode)), doc.normalized_text);
    }
    assert_eq!(strip_ansi(&to_ansi_with(doc, palette, true)), doc.normalized_text);
    assert_eq!(to_ansi_with(doc, palette, false), doc.normalized_text);
    let json = to_structured(doc);
    assert_eq!(canonicalize(&json).unwrap(), json);
}

#[test]
fn renderers_preserve_text_on_random_documents() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let palette = Palette::default();
    let mut rendered = 0;
    while rendered < 500 {
        let text = random_document(&mut rng);
        let backend = SubwordBackend { chunk_chars: rng.random_range(1..4), ..SubwordBackend::default() };
        match glitter(&text, &backend, "sub", &GlitterConfig::default()) {
            Ok(doc) => {
                render_checks(&doc, &palette);
                rendered += 1;
            }
            Err(PipelineError::EmptyInput) => assert!(text.trim().is_empty()),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn structured_output_is_canonical() {
    let model = glitter_core::demo::demo_model().unwrap();
    let doc = glitter(glitter_core::demo::DEMO_SAMPLE, &model, "demo", &GlitterConfig::default()).unwrap();
    let json = to_structured(&doc);
    let reparsed: serde_json::Value = serde_json::from_slice(&json).unwrap();
    let again = canonicalize(serde_json::to_string_pretty(&reparsed).unwrap().as_bytes()).unwrap();
    assert_eq!(again, json);
    assert!(!json.ends_with(b"\n"));
    assert_eq!(reparsed["positions"].as_array().unwrap().len(), doc.positions.len());
    assert_eq!(reparsed["words"].as_array().unwrap().len(), doc.words.len());
}

#[test]
fn html_marks_formulaic_words_and_tooltips() {
    let model = glitter_core::demo::demo_model().unwrap();
    let doc = glitter(glitter_core::demo::DEMO_SAMPLE, &model, "demo", &GlitterConfig::default()).unwrap();
    let html = to_html(&doc, &Palette::default(), Mode::Light);
    assert!(html.contains("class=\"w b0 f\""));
    assert!(html.contains("data-tip=\"participant&#10;probability"));
    assert!(!html.contains("<script"));
}

#[test]
fn golden_three_word_document() {
    let opts = TrainOptions { order: 2, smoothing: Smoothing::Mle, unk_threshold: 0, ..TrainOptions::default() };
    let model = NgramModel::train_from_text("a b c\na b a\n", &opts).unwrap();
    let doc = glitter("a b c", &model, "golden", &GlitterConfig::default()).unwrap();
    let json = String::from_utf8(to_structured(&doc)).unwrap();
    let golden = include_str!("fixtures/three_words.json");
    assert_eq!(json, golden.trim_end());
}
