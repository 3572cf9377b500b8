use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use hvqe::optimize::{EvalLog, LoggedEval};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Noise};
use crate::pipeline::{self, ResultRow};

pub fn version() -> String {
    format!("hvqe {}", hvqe::VERSION)
}

/// Everything written to `<name>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub version: String,
    pub config: ExperimentConfig,
    pub row: ResultRow,
    pub params: Vec<f64>,
    #[serde(default)]
    pub sequential_params: Option<Vec<f64>>,
    pub degraded: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    version: String,
    config: ExperimentConfig,
}

pub struct Paths {
    pub json: PathBuf,
    pub trace: PathBuf,
    pub csv: PathBuf,
    pub checkpoint: PathBuf,
}

impl Paths {
    pub fn new(dir: &Path, name: &str) -> Self {
        Self {
            json: dir.join(format!("{name}.json")),
            trace: dir.join(format!("{name}.trace.jsonl")),
            csv: dir.join(format!("{name}.csv")),
            checkpoint: dir.join(format!("{name}.checkpoint.jsonl")),
        }
    }
}

fn read_checkpoint(path: &Path, cfg: &ExperimentConfig) -> Result<Vec<LoggedEval>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut lines = BufReader::new(file).lines();
    let header: CheckpointHeader = match lines.next() {
        Some(line) => serde_json::from_str(&line?)
            .with_context(|| format!("checkpoint header in {}", path.display()))?,
        None => return Ok(Vec::new()),
    };
    if header.config != *cfg {
        bail!(
            "checkpoint {} was written for a different config",
            path.display()
        );
    }
    let lines: Vec<String> = lines.collect::<std::io::Result<_>>()?;
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        match serde_json::from_str(line) {
            Ok(e) => out.push(e),
            // partial last line from an interrupted run
            Err(_) if i + 1 == lines.len() => break,
            Err(e) => return Err(e).with_context(|| format!("{} line {}", path.display(), i + 2)),
        }
    }
    Ok(out)
}

fn open_checkpoint(path: &Path, cfg: &ExperimentConfig) -> Result<BufWriter<File>> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    let header = CheckpointHeader {
        version: version(),
        config: cfg.clone(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(w)
}

/// Runs one resolved experiment and writes its artifacts.
pub fn execute(cfg: &ExperimentConfig, resume: bool) -> Result<ResultFile> {
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let paths = Paths::new(dir, cfg.name());
    let mut notes = Vec::new();

    let log = if cfg.measurement.noise == Noise::Exact {
        let replay = if resume && paths.checkpoint.exists() {
            read_checkpoint(&paths.checkpoint, cfg)?
        } else {
            Vec::new()
        };
        let mut w = open_checkpoint(&paths.checkpoint, cfg)?;
        Some(EvalLog::new(
            replay,
            cfg.output.checkpoint_every,
            move |chunk| {
                for e in chunk {
                    serde_json::to_writer(&mut w, e)?;
                    w.write_all(b"\n")?;
                }
                w.flush()
            },
        ))
    } else {
        if resume {
            notes.push("sampled runs restart from the beginning".into());
        }
        None
    };

    let start = Instant::now();
    let mut outcome = pipeline::run(cfg, log.as_ref())?;
    outcome.row.runtime_s = start.elapsed().as_secs_f64();
    if let Some(log) = &log {
        log.finish()
            .with_context(|| format!("writing {}", paths.checkpoint.display()))?;
        if log.replayed() > 0 {
            notes.push(format!("resumed: {} evaluations replayed", log.replayed()));
        }
        if log.diverged() {
            eprintln!(
                "warning: {} did not match this run's path",
                paths.checkpoint.display()
            );
            notes.push("checkpoint diverged from the run".into());
        }
    }

    let mut trace = BufWriter::new(
        File::create(&paths.trace)
            .with_context(|| format!("creating {}", paths.trace.display()))?,
    );
    outcome.record.write_jsonl(&mut trace)?;
    trace.flush()?;

    let mut csv = csv::Writer::from_path(&paths.csv)
        .with_context(|| format!("creating {}", paths.csv.display()))?;
    csv.serialize(&outcome.row)?;
    csv.flush()?;

    notes.extend(outcome.record.notes.iter().cloned());
    let result = ResultFile {
        version: version(),
        config: cfg.clone(),
        row: outcome.row,
        params: outcome.params,
        sequential_params: outcome.sequential_params,
        degraded: outcome.record.degraded,
        notes,
    };
    let file =
        File::create(&paths.json).with_context(|| format!("creating {}", paths.json.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &result)?;
    w.write_all(b"\n")?;
    w.flush()?;
    if log.is_some() {
        std::fs::remove_file(&paths.checkpoint).ok();
    }
    Ok(result)
}
