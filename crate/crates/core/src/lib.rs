//! Lexical surprisal annotation.
//!
//! Text goes through [`pipeline::glitter`]: it is normalized, tokenized by a
//! [`backends::Backend`], scored position by position against its left
//! context, aggregated into words with the chain rule, bucketed by rank and
//! scanned for formulaic runs of highly predictable words. The resulting
//! [`AnnotatedDocument`] renders as HTML, ANSI text or canonical JSON.
//!
//! ```
//! use glitter_core::backends::{NgramModel, TrainOptions};
//! use glitter_core::{glitter, GlitterConfig};
//!
//! let model = NgramModel::train_from_text("the cat sat\nthe cat ran", &TrainOptions::default()).unwrap();
//! let doc = glitter("the cat sat", &model, "ngram", &GlitterConfig::default()).unwrap();
//! assert_eq!(doc.words.len(), 3);
//! ```

pub mod backends;
pub mod buckets;
pub mod config;
pub mod demo;
pub mod formulaic;
pub mod info;
pub mod par;
pub mod pipeline;
pub mod render;
pub mod segmentation;
pub mod stats;
pub mod testkit;

pub use buckets::{BucketIndex, BucketTable, Rank};
pub use config::{ConfigOverrides, GlitterConfig};
pub use info::{entropy, surprisal, Probability, TokenDistribution};
pub use par::Execution;
pub use pipeline::{glitter, glitter_run, glitter_with, AnnotatedDocument, PipelineError, RunOptions};
