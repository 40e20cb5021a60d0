//! `glitter`: annotate text with lexical surprisal, train n-gram models,
//! batch-process corpora, and run the HTTP service.

mod args;
mod backend;
mod batch;
mod train;

use std::io::{IsTerminal, Read, Write};
use std::process::ExitCode;

use clap::Parser;
use glitter_core::render::{to_ansi, to_html, to_structured, Mode, Palette};
use glitter_core::{glitter, PipelineError};

use args::{Cli, Command, Format, GlitterArgs};

/// Failure categories with distinct exit codes for scripting.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Backend(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Backend(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Backend(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::EmptyInput | PipelineError::TokenBudget { .. } => Failure::Input(e.to_string()),
            PipelineError::Config(c) => Failure::Usage(c.to_string()),
            PipelineError::Tokenization(_) | PipelineError::Partial(_) | PipelineError::Alignment(_) => {
                Failure::Backend(e.to_string())
            }
        }
    }
}

pub fn read_input(path: Option<&std::path::Path>) -> Result<String, Failure> {
    let bytes = match path {
        None => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf).map_err(|e| Failure::Input(format!("reading stdin: {e}")))?;
            buf
        }
        Some(p) if p.as_os_str() == "-" => return read_input(None),
        Some(p) => std::fs::read(p).map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display())))?,
    };
    String::from_utf8(bytes).map_err(|e| Failure::Input(format!("input is not valid UTF-8 (byte {})", e.utf8_error().valid_up_to())))
}

pub fn load_palette(path: Option<&std::path::Path>) -> Result<Palette, Failure> {
    match path {
        None => Ok(Palette::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("cannot read palette {}: {e}", p.display())))?;
            Palette::parse(&text).map_err(|e| Failure::Input(format!("palette {}: {e}", p.display())))
        }
    }
}

fn cmd_glitter(args: &GlitterArgs) -> Result<(), Failure> {
    let (id, backend) = backend::resolve(&args.backend)?;
    let config = args.scoring.config()?;
    let palette = load_palette(args.palette.as_deref())?;
    let text = read_input(args.input.as_deref())?;
    let doc = glitter(&text, backend.as_ref(), &id, &config)?;
    let stdout = std::io::stdout();
    let format = args.format.unwrap_or(if stdout.is_terminal() { Format::Ansi } else { Format::Json });
    let out = match format {
        Format::Json => to_structured(&doc),
        Format::Html => to_html(&doc, &palette, if args.dark { Mode::Dark } else { Mode::Light }).into_bytes(),
        Format::Ansi => {
            let mut s = to_ansi(&doc, &palette);
            if !s.ends_with('\n') {
                s.push('\n');
            }
            s.into_bytes()
        }
    };
    let mut lock = stdout.lock();
    lock.write_all(&out).and_then(|_| lock.flush()).map_err(|e| Failure::Input(format!("writing output: {e}")))
}

fn cmd_dump(args: &args::DumpArgs) -> Result<(), Failure> {
    let (_, backend) = backend::resolve(&args.backend)?;
    let text = read_input(args.input.as_deref())?;
    let (normalized, _) = glitter_core::segmentation::normalize(&text);
    let dump = glitter_core::backends::Dump::record(backend.as_ref(), &normalized, args.top_k, 2.0)
        .map_err(|e| Failure::Backend(e.to_string()))?;
    std::fs::write(&args.out, dump.to_ndjson()).map_err(|e| Failure::Input(format!("cannot write {}: {e}", args.out.display())))
}

fn cmd_serve(args: &args::ServeArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(p) => glitter_service::ServiceConfig::from_file(p).map_err(|e| Failure::Input(e.to_string()))?,
        None => glitter_service::ServiceConfig::default(),
    };
    if let Some(l) = &args.listen {
        config.listen = l.clone();
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Backend(format!("starting runtime: {e}")))?;
    runtime.block_on(glitter_service::serve(config)).map_err(|e| Failure::Backend(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        None => cmd_glitter(&cli.glitter),
        Some(Command::Train(a)) => train::run(a),
        Some(Command::Batch(a)) => batch::run(a),
        Some(Command::Dump(a)) => cmd_dump(a),
        Some(Command::Serve(a)) => cmd_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("glitter: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
