//! Joint training of the trunk and both paths.
//!
//! Per minibatch `B`:
//!
//! ```text
//! supervised   = -(1/|B|)     * sum_{i in B, labeled} log softmax(z_i)[y_i]
//! unsupervised =  (1/(C|B|))  * sum_{i in B} ||z_i - z'_i||^2
//! total        = supervised + w(t) * unsupervised
//! ```
//!
//! The supervised divisor is the full batch size, not the number of
//! labeled examples in it.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{mask_labels, Class, Dataset};
use crate::engine::{adam_step, mse_consistency, softmax_cross_entropy, AdamState, Tensor};
use crate::error::{Error, Result};
use crate::eval::{evaluate, MetricsReport, Scores};
use crate::model::{self, init_params, Mode, ModelConfig, TdslParams};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub embed_dim: usize,
    pub max_len: usize,
    pub labeled_ratio: f64,
    pub w_max: f64,
    pub ramp_epochs: usize,
    pub seed: u64,
    pub shared_filters: usize,
    pub path_filters: usize,
    /// Draw the label mask per class instead of uniformly.
    pub stratified_mask: bool,
    /// Return the parameters of the epoch with the best validation
    /// accuracy instead of the final ones.
    pub select_best_validation: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 128,
            learning_rate: 1e-4,
            dropout_rate: 0.5,
            embed_dim: 128,
            max_len: 32,
            labeled_ratio: 0.1,
            w_max: 1.0,
            ramp_epochs: 80,
            seed: 0,
            shared_filters: ModelConfig::DEFAULT_FILTERS,
            path_filters: ModelConfig::DEFAULT_FILTERS,
            stratified_mask: false,
            select_best_validation: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("batch_size", self.batch_size),
            ("embed_dim", self.embed_dim),
            ("max_len", self.max_len),
            ("shared_filters", self.shared_filters),
            ("path_filters", self.path_filters),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!("dropout rate {} outside [0, 1)", self.dropout_rate)));
        }
        if !(self.labeled_ratio > 0.0 && self.labeled_ratio <= 1.0) {
            return Err(Error::Config(format!("labeled ratio {} outside (0, 1]", self.labeled_ratio)));
        }
        if !(self.w_max >= 0.0 && self.w_max.is_finite()) {
            return Err(Error::Config(format!("w_max {} must be non-negative", self.w_max)));
        }
        if self.epochs > 0 && self.ramp_epochs > self.epochs {
            return Err(Error::Config(format!(
                "ramp_epochs {} exceeds epochs {}",
                self.ramp_epochs, self.epochs
            )));
        }
        Ok(())
    }

    pub fn model_config(&self, vocab_size: usize) -> ModelConfig {
        ModelConfig::new(vocab_size, self.embed_dim, self.max_len).with_filters(self.shared_filters, self.path_filters)
    }
}

/// Loss components of one minibatch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBundle {
    pub supervised: f64,
    pub unsupervised: f64,
    pub weight: f64,
    pub total: f64,
}

impl LossBundle {
    pub fn assemble(supervised: f64, unsupervised: f64, weight: f64) -> Self {
        Self {
            supervised,
            unsupervised,
            weight,
            total: supervised + weight * unsupervised,
        }
    }
}

/// Gaussian ramp-up `w_max * exp(-5 (1 - t/T)^2)` for epochs `t < T`, then `w_max`.
pub fn rampup_weight(epoch: usize, ramp_epochs: usize, w_max: f64) -> f64 {
    if epoch >= ramp_epochs {
        return w_max;
    }
    let p = 1.0 - epoch as f64 / ramp_epochs as f64;
    w_max * (-5.0 * p * p).exp()
}

/// One example's share of the batch loss and its gradients w.r.t. z and z'.
struct ExampleTerms {
    supervised: f64,
    unsupervised: f64,
    grad_z: Tensor,
    grad_z_prime: Tensor,
}

fn example_terms(z: &Tensor, z_prime: &Tensor, label: Option<usize>, batch_len: usize, weight: f64) -> Result<ExampleTerms> {
    let b = batch_len as f64;
    let c = z.len() as f64;
    let (sq, gz_mse, gzp_mse) = mse_consistency(z, z_prime)?;
    let mse_scale = 1.0 / (c * b);
    let mut grad_z: Vec<f64> = gz_mse.data().iter().map(|g| weight * mse_scale * g).collect();
    let grad_z_prime: Vec<f64> = gzp_mse.data().iter().map(|g| weight * mse_scale * g).collect();
    let mut supervised = 0.0;
    if let Some(y) = label {
        let (ce, g) = softmax_cross_entropy(z, y)?;
        supervised = ce / b;
        for (acc, gv) in grad_z.iter_mut().zip(g.data()) {
            *acc += gv / b;
        }
    }
    Ok(ExampleTerms {
        supervised,
        unsupervised: sq * mse_scale,
        grad_z: Tensor::new(z.shape().to_vec(), grad_z)?,
        grad_z_prime: Tensor::new(z.shape().to_vec(), grad_z_prime)?,
    })
}

/// Batch loss and per-example gradients for both path outputs.
///
/// `labeled[i]` marks membership of the labeled set; such examples must
/// carry `labels[i]`.
pub fn batch_loss(
    z_batch: &[Tensor],
    z_prime_batch: &[Tensor],
    labels: &[Option<usize>],
    labeled: &[bool],
    weight: f64,
    num_classes: usize,
) -> Result<(LossBundle, Vec<Tensor>, Vec<Tensor>)> {
    let n = z_batch.len();
    if n == 0 || z_prime_batch.len() != n || labels.len() != n || labeled.len() != n {
        return Err(Error::shape(format!(
            "misaligned batch: {n} z, {} z', {} labels, {} flags",
            z_prime_batch.len(),
            labels.len(),
            labeled.len()
        )));
    }
    let mut sup = 0.0;
    let mut unsup = 0.0;
    let mut gz = Vec::with_capacity(n);
    let mut gzp = Vec::with_capacity(n);
    for i in 0..n {
        if z_batch[i].len() != num_classes {
            return Err(Error::shape(format!(
                "example {i} has {} logits, expected {num_classes}",
                z_batch[i].len()
            )));
        }
        let label = match (labeled[i], labels[i]) {
            (true, None) => return Err(Error::State(format!("labeled example {i} has no label"))),
            (true, y) => y,
            (false, _) => None,
        };
        let t = example_terms(&z_batch[i], &z_prime_batch[i], label, n, weight)?;
        sup += t.supervised;
        unsup += t.unsupervised;
        gz.push(t.grad_z);
        gzp.push(t.grad_z_prime);
    }
    Ok((LossBundle::assemble(sup, unsup, weight), gz, gzp))
}

/// A seeded permutation of `0..n` cut into consecutive batches; the last
/// batch may be short. Each epoch uses its own permutation.
pub fn minibatch_iterator(n: usize, batch_size: usize, seed: u64, epoch: usize) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::EmptyDataset("no training examples".into()));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, Purpose::Shuffle, epoch as u64));
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub sup_loss: f64,
    pub unsup_loss: f64,
    pub weight: f64,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// CSV with columns `epoch,sup_loss,unsup_loss,w,val_accuracy`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "sup_loss", "unsup_loss", "w", "val_accuracy"])?;
        for r in &self.epochs {
            w.write_record([
                r.epoch.to_string(),
                r.sup_loss.to_string(),
                r.unsup_loss.to_string(),
                r.weight.to_string(),
                r.val_accuracy.map(|a| a.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

fn check_encoded(dataset: &Dataset, max_len: usize) -> Result<()> {
    match dataset.examples().iter().find(|e| e.token_ids.len() != max_len) {
        Some(e) => Err(Error::shape(format!(
            "example {:?} has {} token ids, expected {max_len}; encode the dataset first",
            e.id,
            e.token_ids.len()
        ))),
        None => Ok(()),
    }
}

/// Fraction of labeled examples the supervised path classifies correctly.
pub fn accuracy(params: &TdslParams, dataset: &Dataset) -> Result<Option<f64>> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for e in dataset.examples() {
        if let Some(y) = e.label {
            total += 1;
            if model::predict(params, &e.token_ids)?.0 == y {
                correct += 1;
            }
        }
    }
    Ok((total > 0).then(|| correct as f64 / total as f64))
}

/// Trains on an encoded, label-masked dataset.
pub fn train(
    config: &TrainConfig,
    vocab_size: usize,
    dataset: &Dataset,
    validation: Option<&Dataset>,
) -> Result<(TdslParams, TrainHistory)> {
    train_with(config, vocab_size, dataset, validation, |_, _| Ok(()))
}

/// [`train`] with a callback after every epoch (for checkpointing or logging).
pub fn train_with(
    config: &TrainConfig,
    vocab_size: usize,
    dataset: &Dataset,
    validation: Option<&Dataset>,
    mut on_epoch: impl FnMut(&EpochRecord, &TdslParams) -> Result<()>,
) -> Result<(TdslParams, TrainHistory)> {
    config.validate()?;
    let model_config = config.model_config(vocab_size);
    let mut params = init_params(model_config, config.seed)?;
    let mut history = TrainHistory::default();
    if config.epochs == 0 {
        return Ok((params, history));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("training set is empty".into()));
    }
    check_encoded(dataset, config.max_len)?;
    if let Some(v) = validation {
        check_encoded(v, config.max_len)?;
    }

    let examples = dataset.examples();
    let mut adam = AdamState::new(params.tensors(), config.learning_rate);
    let mut dropout_rng = rng::stream(config.seed, Purpose::Dropout, 0);
    let mut grads = params.zeros_like();
    let mut best: Option<(f64, TdslParams)> = None;

    for epoch in 1..=config.epochs {
        let weight = rampup_weight(epoch, config.ramp_epochs, config.w_max);
        let batches = minibatch_iterator(examples.len(), config.batch_size, config.seed, epoch)?;
        let (mut sup_sum, mut unsup_sum) = (0.0, 0.0);

        for (batch_no, batch) in batches.iter().enumerate() {
            let abort = |message: String| Error::Training {
                epoch,
                batch: batch_no + 1,
                message,
            };
            grads.fill(0.0);
            let (mut sup, mut unsup) = (0.0, 0.0);
            for &i in batch {
                let ex = &examples[i];
                let mode = Mode::Train {
                    rng: &mut dropout_rng,
                    dropout_rate: config.dropout_rate,
                };
                let out = model::forward(&params, &ex.token_ids, mode)?;
                let label = ex.label.map(Class::index);
                let t = example_terms(&out.z, &out.z_prime, label, batch.len(), weight)?;
                sup += t.supervised;
                unsup += t.unsupervised;
                model::backward(&params, out.trace, &t.grad_z, &t.grad_z_prime, &mut grads)?;
            }
            let bundle = LossBundle::assemble(sup, unsup, weight);
            if !bundle.total.is_finite() {
                return Err(abort(format!("loss is {} ({bundle:?})", bundle.total)));
            }
            let grad_refs = grads.tensors();
            adam_step(&mut params.tensors_mut(), &grad_refs, &mut adam).map_err(|e| abort(e.to_string()))?;
            sup_sum += bundle.supervised;
            unsup_sum += bundle.unsupervised;
        }

        let val_accuracy = match validation {
            Some(v) => accuracy(&params, v)?,
            None => None,
        };
        let record = EpochRecord {
            epoch,
            sup_loss: sup_sum / batches.len() as f64,
            unsup_loss: unsup_sum / batches.len() as f64,
            weight,
            val_accuracy,
        };
        log::debug!(
            "epoch {epoch}: sup {:.5} unsup {:.5} w {:.4} val {:?}",
            record.sup_loss,
            record.unsup_loss,
            weight,
            val_accuracy
        );
        if config.select_best_validation {
            if let Some(acc) = val_accuracy {
                if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                    best = Some((acc, params.clone()));
                }
            }
        }
        on_epoch(&record, &params)?;
        history.epochs.push(record);
    }

    if let Some((_, p)) = best {
        params = p;
    }
    Ok((params, history))
}

/// Outcome of one seeded train + evaluate run.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub n_labeled: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiRunReport {
    pub runs: Vec<RunResult>,
    pub mean: Scores,
}

/// Repeats masking, training and evaluation with seeds `seed, seed+1, ...`
/// and averages the test metrics. `train_set` must be encoded and fully
/// labeled; `test_set` encoded.
pub fn multi_run(
    config: &TrainConfig,
    vocab_size: usize,
    train_set: &Dataset,
    test_set: &Dataset,
    n_runs: usize,
    positive_class: Class,
) -> Result<MultiRunReport> {
    if n_runs == 0 {
        return Err(Error::Config("n_runs must be at least 1".into()));
    }
    let mut runs = Vec::with_capacity(n_runs);
    for r in 0..n_runs {
        let run_config = TrainConfig {
            seed: config.seed.wrapping_add(r as u64),
            ..config.clone()
        };
        let masked = mask_labels(train_set, run_config.labeled_ratio, run_config.seed, run_config.stratified_mask)?;
        let (params, _) = train(&run_config, vocab_size, &masked, None)?;
        let report = evaluate(&params, test_set, positive_class)?;
        runs.push(RunResult {
            seed: run_config.seed,
            n_labeled: masked.n_labeled(),
            report,
        });
    }
    let scores: Vec<Scores> = runs.iter().map(|r| r.report.scores()).collect();
    Ok(MultiRunReport {
        mean: Scores::mean(&scores)?,
        runs,
    })
}
