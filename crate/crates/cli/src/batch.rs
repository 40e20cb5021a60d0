use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use glitter_core::render::structured::format_float;
use glitter_core::stats::DocumentStats;
use glitter_core::{glitter_with, Execution};

use crate::args::BatchArgs;
use crate::{backend, read_input, Failure};

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if entry.file_type()?.is_dir() {
            collect(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

fn float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn header() -> String {
    let mut cols = vec!["path".to_owned(), "token_count".into(), "mean_surprisal".into(), "perplexity".into(), "formulaic_coverage".into()];
    cols.extend((0..glitter_core::buckets::BUCKET_COUNT).map(|i| format!("bucket_{i}")));
    cols.join("\t")
}

fn row(rel: &str, s: &DocumentStats) -> String {
    let mut cols = vec![rel.to_owned(), s.token_count.to_string(), float(s.mean_surprisal), float(s.perplexity), float(s.formulaic_coverage)];
    cols.extend(s.bucket_histogram.iter().map(u64::to_string));
    cols.join("\t")
}

pub fn run(args: &BatchArgs) -> Result<(), Failure> {
    let (id, backend) = backend::resolve(&args.backend)?;
    let config = args.scoring.config()?;
    let mut files = Vec::new();
    collect(&args.dir, &mut files).map_err(|e| Failure::Input(format!("cannot list {}: {e}", args.dir.display())))?;
    let mut files: Vec<(String, PathBuf)> = files
        .into_iter()
        .map(|p| (p.strip_prefix(&args.dir).unwrap_or(&p).to_string_lossy().replace('\\', "/"), p))
        .collect();
    files.sort();

    let jobs = args.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let results: Vec<Mutex<Option<Result<String, Failure>>>> = files.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(files.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((rel, path)) = files.get(i) else { break };
                let outcome = read_input(Some(path)).and_then(|text| {
                    let doc = glitter_with(&text, backend.as_ref(), &id, &config, Execution::Sequential)?;
                    Ok(row(rel, &doc.stats))
                });
                *results[i].lock().expect("no panics while holding the lock") = Some(outcome);
            });
        }
    });

    println!("{}", header());
    let mut worst: Option<Failure> = None;
    for ((rel, _), slot) in files.iter().zip(results) {
        match slot.into_inner().expect("workers finished").expect("every file processed") {
            Ok(line) => println!("{line}"),
            Err(f) => {
                eprintln!("glitter: {rel}: {}", f.message());
                if worst.as_ref().is_none_or(|w| f.code() > w.code()) {
                    worst = Some(f);
                }
            }
        }
    }
    match worst {
        None => Ok(()),
        Some(f) => Err(match f {
            Failure::Usage(_) => Failure::Usage("some files failed".into()),
            Failure::Input(_) => Failure::Input("some files failed".into()),
            Failure::Backend(_) => Failure::Backend("some files failed".into()),
        }),
    }
}
