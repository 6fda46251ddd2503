//! Binary metrics, macro averaging and the leave-one-event-out protocol.
//!
//! Any ratio with a zero denominator is reported as 0.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_vocab, loeo_folds, mask_labels, Class, Dataset, Fold, Vocabulary};
use crate::error::{Error, Result};
use crate::model::{self, TdslParams};
use crate::train::{train, TrainConfig, TrainHistory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub positive_class: Class,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn confusion(predictions: &[Class], gold: &[Class], positive_class: Class) -> Result<ConfusionCounts> {
    if predictions.len() != gold.len() {
        return Err(Error::shape(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::EmptyDataset("no predictions to score".into()));
    }
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
        positive_class,
    };
    for (&p, &g) in predictions.iter().zip(gold) {
        match (p == positive_class, g == positive_class) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Mean of `values` taken over their shortest decimal forms, so the
/// mean of 0.2 and 0.4 is 0.3 rather than the nearest-even binary tie.
/// Falls back to a plain float mean for values a decimal cannot hold.
fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    let values: Vec<f64> = values.collect();
    let decimal = || -> Option<f64> {
        let mut sum = Decimal::ZERO;
        for &v in &values {
            let d = Decimal::from_str(&v.to_string()).ok()?;
            if d.to_string().parse::<f64>().ok()? != v {
                return None;
            }
            sum = sum.checked_add(d)?;
        }
        sum.checked_div(Decimal::from(n))?.to_string().parse().ok()
    };
    decimal().unwrap_or_else(|| values.iter().sum::<f64>() / n as f64)
}

/// Accuracy, precision, recall and F-score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

impl Scores {
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        let fscore = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            accuracy: ratio(c.tp + c.tn, c.total()),
            precision,
            recall,
            fscore,
        }
    }

    /// Unweighted mean of each metric.
    pub fn mean(all: &[Scores]) -> Result<Scores> {
        if all.is_empty() {
            return Err(Error::EmptyDataset("nothing to average".into()));
        }
        let avg = |f: fn(&Scores) -> f64| mean(all.iter().map(f), all.len());
        Ok(Scores {
            accuracy: avg(|s| s.accuracy),
            precision: avg(|s| s.precision),
            recall: avg(|s| s.recall),
            fscore: avg(|s| s.fscore),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub n_examples: usize,
    pub counts: ConfusionCounts,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_event: Vec<EventReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub event: String,
    pub report: MetricsReport,
}

impl MetricsReport {
    pub fn scores(&self) -> Scores {
        Scores {
            accuracy: self.accuracy,
            precision: self.precision,
            recall: self.recall,
            fscore: self.fscore,
        }
    }
}

pub fn binary_metrics(counts: &ConfusionCounts) -> MetricsReport {
    let s = Scores::from_counts(counts);
    MetricsReport {
        accuracy: s.accuracy,
        precision: s.precision,
        recall: s.recall,
        fscore: s.fscore,
        n_examples: counts.total(),
        counts: *counts,
        per_event: Vec::new(),
    }
}

/// Fold-level averages (MacroA, MacroP, MacroR, MacroF).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub macro_a: f64,
    pub macro_p: f64,
    pub macro_r: f64,
    pub macro_f: f64,
    pub folds: usize,
}

pub fn macro_metrics(reports: &[MetricsReport]) -> Result<MacroMetrics> {
    let scores: Vec<Scores> = reports.iter().map(MetricsReport::scores).collect();
    let m = Scores::mean(&scores)?;
    Ok(MacroMetrics {
        macro_a: m.accuracy,
        macro_p: m.precision,
        macro_r: m.recall,
        macro_f: m.fscore,
        folds: reports.len(),
    })
}

/// Scores the supervised path on every example of `dataset`, which must
/// be encoded and fully labeled. Event-tagged data also gets a per-event
/// breakdown.
pub fn evaluate(params: &TdslParams, dataset: &Dataset, positive_class: Class) -> Result<MetricsReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("evaluation set is empty".into()));
    }
    let mut preds = Vec::with_capacity(dataset.n_total());
    let mut gold = Vec::with_capacity(dataset.n_total());
    let mut by_event: BTreeMap<&str, (Vec<Class>, Vec<Class>)> = BTreeMap::new();
    for e in dataset.examples() {
        let y = e
            .label
            .ok_or_else(|| Error::Protocol(format!("evaluation example {:?} has no label", e.id)))?;
        let (p, _) = model::predict(params, &e.token_ids)?;
        preds.push(p);
        gold.push(y);
        if let Some(ev) = e.event.as_deref() {
            let slot = by_event.entry(ev).or_default();
            slot.0.push(p);
            slot.1.push(y);
        }
    }
    let mut report = binary_metrics(&confusion(&preds, &gold, positive_class)?);
    for (event, (p, g)) in by_event {
        report.per_event.push(EventReport {
            event: event.to_string(),
            report: binary_metrics(&confusion(&p, &g, positive_class)?),
        });
    }
    Ok(report)
}

/// Everything produced while running one held-out event.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub event: String,
    pub train_size: usize,
    pub test_size: usize,
    pub n_labeled: usize,
    pub vocab: Vocabulary,
    pub params: TdslParams,
    pub history: TrainHistory,
    pub report: MetricsReport,
}

/// Builds the vocabulary from the fold's training side only, masks,
/// trains and evaluates on the held-out event.
pub fn run_fold(config: &TrainConfig, fold: &Fold, min_count: usize, positive_class: Class) -> Result<FoldOutcome> {
    let vocab = build_vocab(&[&fold.train], min_count)?;
    let train_set = fold.train.encode(&vocab, config.max_len)?;
    let test_set = fold.test.encode(&vocab, config.max_len)?;
    let masked = mask_labels(&train_set, config.labeled_ratio, config.seed, config.stratified_mask)?;
    let (params, history) = train(config, vocab.len(), &masked, None)?;
    let report = evaluate(&params, &test_set, positive_class)?;
    log::info!(
        "fold {}: accuracy {:.4} f {:.4} ({} test)",
        fold.event,
        report.accuracy,
        report.fscore,
        test_set.n_total()
    );
    Ok(FoldOutcome {
        event: fold.event.clone(),
        train_size: train_set.n_total(),
        test_size: test_set.n_total(),
        n_labeled: masked.n_labeled(),
        vocab,
        params,
        history,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldSummary {
    pub event: String,
    pub train_size: usize,
    pub test_size: usize,
    pub n_labeled: usize,
    pub report: MetricsReport,
}

impl From<&FoldOutcome> for FoldSummary {
    fn from(o: &FoldOutcome) -> Self {
        Self {
            event: o.event.clone(),
            train_size: o.train_size,
            test_size: o.test_size,
            n_labeled: o.n_labeled,
            report: o.report.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LoeoReport {
    pub folds: Vec<FoldSummary>,
    #[serde(rename = "macro")]
    pub macro_metrics: MacroMetrics,
}

impl LoeoReport {
    pub fn from_outcomes(outcomes: &[FoldOutcome]) -> Result<Self> {
        let reports: Vec<MetricsReport> = outcomes.iter().map(|o| o.report.clone()).collect();
        Ok(Self {
            folds: outcomes.iter().map(FoldSummary::from).collect(),
            macro_metrics: macro_metrics(&reports)?,
        })
    }
}

/// Runs every fold in event order.
pub fn run_loeo(config: &TrainConfig, dataset: &Dataset, min_count: usize, positive_class: Class) -> Result<LoeoReport> {
    let folds = loeo_folds(dataset)?;
    let outcomes = folds
        .iter()
        .map(|f| run_fold(config, f, min_count, positive_class))
        .collect::<Result<Vec<_>>>()?;
    LoeoReport::from_outcomes(&outcomes)
}

/// One line of the long-format results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub fold: String,
    pub labeled_ratio: f64,
    pub batch_size: usize,
    pub embed_dim: usize,
    pub lr: f64,
    pub seed: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
}

impl ReportRow {
    pub fn new(dataset: &str, fold: &str, config: &TrainConfig, scores: Scores) -> Self {
        Self {
            dataset: dataset.to_string(),
            fold: fold.to_string(),
            labeled_ratio: config.labeled_ratio,
            batch_size: config.batch_size,
            embed_dim: config.embed_dim,
            lr: config.learning_rate,
            seed: config.seed,
            accuracy: scores.accuracy,
            precision: scores.precision,
            recall: scores.recall,
            fscore: scores.fscore,
        }
    }
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").map_err(|e| Error::io("<json>", e))?;
    Ok(())
}
