use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use tdsl::corpus::{
    build_vocab, loeo_folds, mask_labels, parse_liar, parse_pheme, tfidf_top_words, write_tfidf_csv, PhemeEvent,
};
use tdsl::eval::{evaluate, run_fold, FoldOutcome, LoeoReport, MacroMetrics, ReportRow, Scores};
use tdsl::train::{train_with, TrainHistory};
use tdsl::{Dataset, MetricsReport, Split, TdslParams, TrainConfig, Vocabulary};

use crate::config::{DatasetKind, RunConfig};
use crate::output::{self, METRICS_FILE, RESULTS_FILE};
use crate::UsageError;

fn usage(e: anyhow::Error) -> anyhow::Error {
    anyhow!(UsageError(format!("{e:#}")))
}

/// Training side, optional validation split and optional test split,
/// all un-encoded.
struct Splits {
    name: &'static str,
    train: Dataset,
    valid: Option<Dataset>,
    test: Option<Dataset>,
}

fn holdout_slug(config: &RunConfig) -> Result<Option<&'static str>> {
    config
        .holdout_event
        .as_deref()
        .map(|e| {
            PhemeEvent::parse(e)
                .map(PhemeEvent::slug)
                .ok_or_else(|| usage(anyhow!("unknown holdout_event {e:?}")))
        })
        .transpose()
}

/// `fold` column of single-split runs: the held-out event or `test`.
fn fold_label(config: &RunConfig) -> &'static str {
    config
        .holdout_event
        .as_deref()
        .and_then(PhemeEvent::parse)
        .map_or("test", PhemeEvent::slug)
}

fn load_splits(config: &RunConfig) -> Result<Splits> {
    match config.dataset {
        DatasetKind::Liar => {
            let path = |p: &Option<PathBuf>| p.clone().expect("checked by require_inputs");
            let train = parse_liar(path(&config.train_path), Split::Train)?;
            let valid = config
                .valid_path
                .as_ref()
                .map(|p| parse_liar(p, Split::Validation))
                .transpose()?;
            let test = config.test_path.as_ref().map(|p| parse_liar(p, Split::Test)).transpose()?;
            Ok(Splits {
                name: "liar",
                train,
                valid,
                test,
            })
        }
        DatasetKind::Pheme => {
            let all = parse_pheme(config.pheme_path.as_ref().expect("checked by require_inputs"))?;
            match holdout_slug(config)? {
                Some(slug) => {
                    let held = |e: &tdsl::Example| e.event.as_deref() == Some(slug);
                    let test = all.filter(Split::Test, held);
                    if test.is_empty() {
                        bail!("no examples for held-out event {slug}");
                    }
                    Ok(Splits {
                        name: "pheme",
                        train: all.filter(Split::Train, |e| !held(e)),
                        valid: None,
                        test: Some(test),
                    })
                }
                None => Ok(Splits {
                    name: "pheme",
                    train: all,
                    valid: None,
                    test: None,
                }),
            }
        }
    }
}

fn read_manifest(path: &Path) -> Result<BTreeSet<String>> {
    let f = File::open(path).with_context(|| format!("opening manifest {}", path.display()))?;
    let mut ids = BTreeSet::new();
    for line in BufReader::new(f).lines() {
        let line = line?;
        let id = line.trim();
        if !id.is_empty() {
            ids.insert(id.to_string());
        }
    }
    Ok(ids)
}

fn select_labels(config: &RunConfig, train: &TrainConfig, data: &Dataset) -> Result<Dataset> {
    Ok(match &config.labeled_manifest {
        Some(path) => data.with_labeled_ids(&read_manifest(path)?)?,
        None => mask_labels(data, train.labeled_ratio, train.seed, train.stratified_mask)?,
    })
}

/// Encoded splits sharing one vocabulary built on the training side.
struct Prepared {
    name: &'static str,
    vocab: Vocabulary,
    train: Dataset,
    valid: Option<Dataset>,
    test: Dataset,
}

fn prepare(config: &RunConfig, splits: Splits) -> Result<Prepared> {
    let max_len = config.train.max_len;
    let test = splits
        .test
        .ok_or_else(|| usage(anyhow!("no test split: set test_path (LIAR) or holdout_event (PHEME)")))?;
    let vocab = build_vocab(&[&splits.train], config.min_count)?;
    Ok(Prepared {
        name: splits.name,
        train: splits.train.encode(&vocab, max_len)?,
        valid: splits.valid.map(|v| v.encode(&vocab, max_len)).transpose()?,
        test: test.encode(&vocab, max_len)?,
        vocab,
    })
}

#[derive(Serialize)]
struct RunMetrics<'a> {
    dataset: &'a str,
    seed: u64,
    n_train: usize,
    n_labeled: usize,
    n_test: usize,
    test: &'a MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<&'a MetricsReport>,
}

struct SingleRun {
    params: TdslParams,
    history: TrainHistory,
    report: MetricsReport,
    n_labeled: usize,
}

fn train_and_test(config: &RunConfig, train: &TrainConfig, data: &Prepared) -> Result<SingleRun> {
    let masked = select_labels(config, train, &data.train)?;
    let (params, history) = train_with(train, data.vocab.len(), &masked, data.valid.as_ref(), |r, _| {
        log::info!(
            "epoch {}/{}: sup {:.5} unsup {:.5} w {:.4}{}",
            r.epoch,
            train.epochs,
            r.sup_loss,
            r.unsup_loss,
            r.weight,
            r.val_accuracy.map(|a| format!(" val_acc {a:.4}")).unwrap_or_default()
        );
        Ok(())
    })?;
    let report = evaluate(&params, &data.test, config.positive_class)?;
    Ok(SingleRun {
        params,
        history,
        report,
        n_labeled: masked.n_labeled(),
    })
}

fn write_single_run(dir: &Path, config: &RunConfig, data: &Prepared, run: &SingleRun) -> Result<()> {
    output::write_model(dir, &data.vocab, &run.params, &run.history)?;
    let validation = match &data.valid {
        Some(v) => Some(evaluate(&run.params, v, config.positive_class)?),
        None => None,
    };
    output::write_json_file(
        &dir.join(METRICS_FILE),
        &RunMetrics {
            dataset: data.name,
            seed: config.train.seed,
            n_train: data.train.n_total(),
            n_labeled: run.n_labeled,
            n_test: data.test.n_total(),
            test: &run.report,
            validation: validation.as_ref(),
        },
    )?;
    let fold = fold_label(config);
    output::write_rows(
        &dir.join(RESULTS_FILE),
        &[ReportRow::new(data.name, fold, &config.train, run.report.scores())],
    )
}

pub fn split(config: &RunConfig, manifest: Option<PathBuf>) -> Result<()> {
    config.require_inputs(false).map_err(usage)?;
    let splits = load_splits(config)?;
    let t = &config.train;
    let masked = mask_labels(&splits.train, t.labeled_ratio, t.seed, t.stratified_mask)?;
    let path = manifest.unwrap_or_else(|| config.out_dir.join("labeled_ids.txt"));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    for id in masked.labeled_ids() {
        writeln!(w, "{id}")?;
    }
    w.flush()?;
    println!(
        "{} of {} labels kept -> {}",
        masked.n_labeled(),
        masked.n_total(),
        path.display()
    );
    Ok(())
}

pub fn train(config: &RunConfig) -> Result<()> {
    config.require_inputs(true).map_err(usage)?;
    if config.dataset == DatasetKind::Pheme && config.holdout_event.is_none() {
        return Err(usage(anyhow!("PHEME training needs holdout_event; use `loeo` for every fold")));
    }
    holdout_slug(config)?;
    let data = prepare(config, load_splits(config)?)?;
    let dir = output::start_run_dir(&config.out_dir, config)?;
    let run = train_and_test(config, &config.train, &data)?;
    write_single_run(&dir, config, &data, &run)?;
    let r = &run.report;
    println!(
        "test accuracy {:.4} precision {:.4} recall {:.4} f {:.4} -> {}",
        r.accuracy,
        r.precision,
        r.recall,
        r.fscore,
        dir.display()
    );
    Ok(())
}

pub fn eval(config: &RunConfig, run_dir: &Path, out: Option<PathBuf>) -> Result<()> {
    config.require_inputs(true).map_err(usage)?;
    let splits = load_splits(config)?;
    let vocab_path = run_dir.join(output::VOCAB_FILE);
    let vocab = Vocabulary::read(BufReader::new(
        File::open(&vocab_path).with_context(|| format!("opening {}", vocab_path.display()))?,
    ))?;
    let ckpt_path = run_dir.join(output::CHECKPOINT_FILE);
    let params = TdslParams::load(
        BufReader::new(File::open(&ckpt_path).with_context(|| format!("opening {}", ckpt_path.display()))?),
        config.train.max_len,
    )?;
    if params.config.vocab_size != vocab.len() {
        bail!(
            "checkpoint has {} embedding rows but the vocabulary has {} entries",
            params.config.vocab_size,
            vocab.len()
        );
    }
    let test = splits
        .test
        .ok_or_else(|| usage(anyhow!("no test split: set test_path (LIAR) or holdout_event (PHEME)")))?
        .encode(&vocab, config.train.max_len)?;
    let report = evaluate(&params, &test, config.positive_class)?;
    let path = out.unwrap_or_else(|| run_dir.join("eval.json"));
    output::write_json_file(&path, &report)?;
    println!(
        "accuracy {:.4} precision {:.4} recall {:.4} f {:.4} -> {}",
        report.accuracy,
        report.precision,
        report.recall,
        report.fscore,
        path.display()
    );
    Ok(())
}

fn pool(config: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers())
        .build()
        .context("starting worker pool")
}

fn require_pheme(config: &RunConfig, command: &str) -> Result<Dataset> {
    if config.dataset != DatasetKind::Pheme {
        return Err(usage(anyhow!("`{command}` needs dataset = pheme")));
    }
    config.require_inputs(false).map_err(usage)?;
    Ok(parse_pheme(config.pheme_path.as_ref().expect("checked"))?)
}

fn write_fold(dir: &Path, config: &RunConfig, o: &FoldOutcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    output::write_model(dir, &o.vocab, &o.params, &o.history)?;
    output::write_json_file(&dir.join(METRICS_FILE), &tdsl::eval::FoldSummary::from(o))?;
    output::write_rows(
        &dir.join(RESULTS_FILE),
        &[ReportRow::new("pheme", &o.event, &config.train, o.report.scores())],
    )
}

fn macro_row(config: &TrainConfig, m: &MacroMetrics) -> ReportRow {
    ReportRow::new(
        "pheme",
        "macro",
        config,
        Scores {
            accuracy: m.macro_a,
            precision: m.macro_p,
            recall: m.macro_r,
            fscore: m.macro_f,
        },
    )
}

#[derive(Serialize)]
struct MultiLoeo {
    runs: Vec<LoeoReport>,
    mean: MacroMetrics,
}

pub fn loeo(config: &RunConfig) -> Result<()> {
    let data = require_pheme(config, "loeo")?;
    let folds = loeo_folds(&data)?;
    let dir = output::start_run_dir(&config.out_dir, config)?;
    let workers = pool(config)?;
    let mut reports = Vec::with_capacity(config.n_runs);
    let mut rows = Vec::new();
    for r in 0..config.n_runs {
        let train = TrainConfig {
            seed: config.train.seed.wrapping_add(r as u64),
            ..config.train.clone()
        };
        let outcomes: Vec<FoldOutcome> = workers.install(|| {
            folds
                .par_iter()
                .map(|f| run_fold(&train, f, config.min_count, config.positive_class))
                .collect::<tdsl::Result<_>>()
        })?;
        let run_dir = if config.n_runs == 1 {
            dir.clone()
        } else {
            dir.join(format!("run-{r}"))
        };
        for o in &outcomes {
            write_fold(&run_dir.join(&o.event), config, o)?;
            rows.push(ReportRow::new("pheme", &o.event, &train, o.report.scores()));
        }
        let report = LoeoReport::from_outcomes(&outcomes)?;
        rows.push(macro_row(&train, &report.macro_metrics));
        let m = &report.macro_metrics;
        println!(
            "run {r} (seed {}): MacroA {:.4} MacroP {:.4} MacroR {:.4} MacroF {:.4}",
            train.seed, m.macro_a, m.macro_p, m.macro_r, m.macro_f
        );
        reports.push(report);
    }
    output::write_rows(&dir.join(RESULTS_FILE), &rows)?;
    if reports.len() == 1 {
        output::write_json_file(&dir.join("macro.json"), &reports[0])?;
    } else {
        let scores: Vec<Scores> = reports
            .iter()
            .map(|r| Scores {
                accuracy: r.macro_metrics.macro_a,
                precision: r.macro_metrics.macro_p,
                recall: r.macro_metrics.macro_r,
                fscore: r.macro_metrics.macro_f,
            })
            .collect();
        let s = Scores::mean(&scores)?;
        let mean = MacroMetrics {
            macro_a: s.accuracy,
            macro_p: s.precision,
            macro_r: s.recall,
            macro_f: s.fscore,
            folds: folds.len(),
        };
        output::write_json_file(&dir.join("macro.json"), &MultiLoeo { runs: reports, mean })?;
    }
    Ok(())
}

pub fn stats(config: &RunConfig, out: Option<PathBuf>) -> Result<()> {
    let data = require_pheme(config, "stats")?;
    let reports = tfidf_top_words(&data, config.top_k)?;
    let path = out.unwrap_or_else(|| config.out_dir.join("tfidf.csv"));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    write_tfidf_csv(&reports, &mut w)?;
    w.flush()?;
    println!("top {} words for {} events -> {}", config.top_k, reports.len(), path.display());
    Ok(())
}

/// One grid point.
#[derive(Debug, Clone, Copy)]
struct Cell {
    labeled_ratio: f64,
    batch_size: usize,
    embed_dim: usize,
    learning_rate: f64,
}

fn grid(config: &RunConfig) -> Vec<Cell> {
    let or_base = |v: &[f64], base: f64| if v.is_empty() { vec![base] } else { v.to_vec() };
    let or_base_u = |v: &[usize], base: usize| if v.is_empty() { vec![base] } else { v.to_vec() };
    let t = &config.train;
    let mut cells = Vec::new();
    for &labeled_ratio in &or_base(&config.grid_labeled_ratio, t.labeled_ratio) {
        for &batch_size in &or_base_u(&config.grid_batch_size, t.batch_size) {
            for &embed_dim in &or_base_u(&config.grid_embed_dim, t.embed_dim) {
                for &learning_rate in &or_base(&config.grid_learning_rate, t.learning_rate) {
                    cells.push(Cell {
                        labeled_ratio,
                        batch_size,
                        embed_dim,
                        learning_rate,
                    });
                }
            }
        }
    }
    cells
}

enum SweepData {
    Split(Box<Prepared>),
    Loeo(Vec<tdsl::corpus::Fold>),
}

#[derive(Serialize)]
struct Failure {
    cell: usize,
    seed: u64,
    labeled_ratio: f64,
    batch_size: usize,
    embed_dim: usize,
    lr: f64,
    error: String,
}

fn run_cell_once(config: &RunConfig, cell_config: &RunConfig, data: &SweepData, dir: &Path) -> Result<Vec<ReportRow>> {
    output::start_run_dir(dir, cell_config)?;
    let t = &cell_config.train;
    match data {
        SweepData::Split(prepared) => {
            let run = train_and_test(cell_config, t, prepared)?;
            write_single_run(dir, cell_config, prepared, &run)?;
            let fold = fold_label(config);
            Ok(vec![ReportRow::new(prepared.name, fold, t, run.report.scores())])
        }
        SweepData::Loeo(folds) => {
            let outcomes = folds
                .iter()
                .map(|f| run_fold(t, f, config.min_count, config.positive_class))
                .collect::<tdsl::Result<Vec<_>>>()?;
            let report = LoeoReport::from_outcomes(&outcomes)?;
            output::write_json_file(&dir.join("macro.json"), &report)?;
            Ok(vec![macro_row(t, &report.macro_metrics)])
        }
    }
}

pub fn sweep(config: &RunConfig) -> Result<()> {
    config
        .require_inputs(config.dataset == DatasetKind::Liar)
        .map_err(usage)?;
    holdout_slug(config)?;
    let splits = load_splits(config)?;
    let data = if config.dataset == DatasetKind::Pheme && config.holdout_event.is_none() {
        SweepData::Loeo(loeo_folds(&splits.train)?)
    } else {
        SweepData::Split(Box::new(prepare(config, splits)?))
    };
    let cells = grid(config);
    let dir = output::start_run_dir(&config.out_dir, config)?;
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.n_runs).map(move |r| (c, r)))
        .collect();
    log::info!("sweep: {} cells x {} runs", cells.len(), config.n_runs);

    let results: Vec<(usize, RunConfig, Result<Vec<ReportRow>>)> = pool(config)?.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| {
                let cell = cells[c];
                let mut cell_config = config.clone();
                cell_config.train = TrainConfig {
                    labeled_ratio: cell.labeled_ratio,
                    batch_size: cell.batch_size,
                    embed_dim: cell.embed_dim,
                    learning_rate: cell.learning_rate,
                    seed: config.train.seed.wrapping_add(r as u64),
                    ..config.train.clone()
                };
                let out = cell_config
                    .validate()
                    .and_then(|_| {
                        let cell_dir = dir.join(format!("cell-{c:03}")).join(format!("run-{r}"));
                        run_cell_once(config, &cell_config, &data, &cell_dir)
                    });
                (c, cell_config, out)
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (c, cell_config, out) in results {
        match out {
            Ok(r) => rows.extend(r),
            Err(e) => {
                log::error!("cell {c} seed {} failed: {e:#}", cell_config.train.seed);
                let t = &cell_config.train;
                failures.push(Failure {
                    cell: c,
                    seed: t.seed,
                    labeled_ratio: t.labeled_ratio,
                    batch_size: t.batch_size,
                    embed_dim: t.embed_dim,
                    lr: t.learning_rate,
                    error: format!("{e:#}"),
                });
            }
        }
    }
    output::write_rows(&dir.join("sweep.csv"), &rows)?;
    let path = dir.join("failures.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    for f in &failures {
        w.serialize(f)?;
    }
    w.flush()?;
    println!(
        "{} rows, {} failed runs -> {}",
        rows.len(),
        failures.len(),
        dir.join("sweep.csv").display()
    );
    Ok(())
}
