use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glitter_core::{ConfigOverrides, GlitterConfig};

use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "glitter", version, about = "Annotate text with lexical surprisal", args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub glitter: GlitterArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an n-gram model on one or more corpus files (one sentence per line).
    Train(TrainArgs),
    /// Glitter every file under a directory and print statistics as TSV.
    Batch(BatchArgs),
    /// Record a backend's scores for a text as a replayable logprob dump.
    Dump(DumpArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Html,
    Ansi,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    #[value(name = "2")]
    Two,
    #[value(name = "e")]
    E,
}

/// Which backend to score with. Without flags the bundled demo model is used.
#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    /// Backend id from the service configuration given with --config.
    #[arg(long, conflicts_with_all = ["model", "endpoint", "dump_file"])]
    pub backend: Option<String>,
    /// Service configuration file declaring backends.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// N-gram model file written by `glitter train`.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["endpoint", "dump_file"])]
    pub model: Option<PathBuf>,
    /// OpenAI-compatible completions endpoint.
    #[arg(long, value_name = "URL", conflicts_with = "dump_file")]
    pub endpoint: Option<String>,
    /// Model name sent to --endpoint.
    #[arg(long, value_name = "NAME", default_value = "default", requires = "endpoint")]
    pub endpoint_model: String,
    /// Environment variable holding the API key for --endpoint.
    #[arg(long, value_name = "VAR", requires = "endpoint")]
    pub api_key_env: Option<String>,
    /// Precomputed logprob dump written by `glitter dump`.
    #[arg(long = "dump", value_name = "PATH")]
    pub dump_file: Option<PathBuf>,
    /// Limit the backend's context to this many tokens, scoring long texts
    /// in overlapping windows.
    #[arg(long, value_name = "N")]
    pub max_context: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoringArgs {
    /// Logarithm base of surprisal values.
    #[arg(long, value_enum, default_value = "2")]
    pub base: Base,
    /// Alternative candidates shown per position (1 to 5).
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    /// Per-word surprisal at or below which a word counts as formulaic.
    #[arg(long)]
    pub formulaic_threshold: Option<f64>,
    /// Minimum number of consecutive formulaic words forming a run.
    #[arg(long)]
    pub formulaic_min_len: Option<usize>,
}

impl ScoringArgs {
    pub fn config(&self) -> Result<GlitterConfig, Failure> {
        let overrides = ConfigOverrides {
            log_base: Some(match self.base {
                Base::Two => 2.0,
                Base::E => std::f64::consts::E,
            }),
            top_k: Some(self.top_k),
            formulaic_threshold: self.formulaic_threshold,
            formulaic_min_len: self.formulaic_min_len,
            ..ConfigOverrides::default()
        };
        GlitterConfig::default().apply(&overrides).map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct GlitterArgs {
    /// Input file; standard input when absent or `-`.
    #[arg(value_name = "INPUT")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Output format; ansi on a terminal, json otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Palette file: 16 light then 16 dark colors, one `#RRGGBB` per line.
    #[arg(long, value_name = "PATH")]
    pub palette: Option<PathBuf>,
    /// Use the dark palette for HTML output.
    #[arg(long)]
    pub dark: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(required = true, value_name = "CORPUS")]
    pub corpus: Vec<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 0.75)]
    pub discount: f64,
    /// Words seen at most this many times become `<unk>`.
    #[arg(long, default_value_t = 1)]
    pub unk_threshold: u64,
    /// Store an unsmoothed maximum-likelihood model.
    #[arg(long)]
    pub mle: bool,
    /// Held-out text for a perplexity report.
    #[arg(long, value_name = "PATH")]
    pub heldout: Option<PathBuf>,
    #[arg(long, short, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    #[arg(value_name = "DIR")]
    pub dir: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Files processed concurrently; defaults to the number of CPUs.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[arg(value_name = "INPUT")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    #[arg(long, short, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Address to listen on, overriding the configuration.
    #[arg(long, value_name = "ADDR")]
    pub listen: Option<String>,
}
