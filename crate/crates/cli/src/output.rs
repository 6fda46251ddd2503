//! Run directory layout.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use tdsl::eval::{write_json, write_report_csv, ReportRow};
use tdsl::{TdslParams, TrainHistory, Vocabulary};

use crate::config::RunConfig;

pub const CONFIG_FILE: &str = "config.txt";
pub const VERSION_FILE: &str = "version.txt";
pub const SEED_FILE: &str = "seed.txt";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const HISTORY_FILE: &str = "history.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const RESULTS_FILE: &str = "results.csv";

pub fn version_string() -> String {
    format!("tdsl {} ({})", env!("CARGO_PKG_VERSION"), env!("TDSL_GIT_DESCRIBE"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().with_context(|| format!("writing {}", path.display()))
}

/// Creates `dir` and records the effective config, version and seed.
pub fn start_run_dir(dir: &Path, config: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join(CONFIG_FILE), config.to_kv())?;
    fs::write(dir.join(VERSION_FILE), version_string() + "\n")?;
    fs::write(dir.join(SEED_FILE), format!("{}\n", config.train.seed))?;
    Ok(dir.to_path_buf())
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    write_json(value, &mut w)?;
    finish(w, path)
}

pub fn write_rows(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = create(path)?;
    write_report_csv(rows, &mut w)?;
    finish(w, path)
}

/// Vocabulary, checkpoint and training history.
pub fn write_model(dir: &Path, vocab: &Vocabulary, params: &TdslParams, history: &TrainHistory) -> Result<()> {
    let path = dir.join(VOCAB_FILE);
    let mut w = create(&path)?;
    vocab.write(&mut w)?;
    finish(w, &path)?;

    let path = dir.join(CHECKPOINT_FILE);
    let mut w = create(&path)?;
    params.save(&mut w)?;
    finish(w, &path)?;

    let path = dir.join(HISTORY_FILE);
    let mut w = create(&path)?;
    history.write_csv(&mut w)?;
    finish(w, &path)
}
