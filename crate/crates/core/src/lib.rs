//! Two-path deep semi-supervised learning for short-text classification.
//!
//! A shared convolutional trunk extracts low-level features from word
//! embeddings and feeds two independent convolutional paths. The supervised
//! path is trained with cross-entropy on the labeled subset of each
//! minibatch; the unsupervised path is tied to it by a consistency penalty
//! over every example, scaled by an epoch-indexed ramp-up weight.
//!
//! The crate is organised bottom-up:
//!
//! * [`engine`]: dense `f64` tensors, layer forward/backward passes with
//!   hand-derived gradients, losses, Adam, and the binary checkpoint format.
//! * [`corpus`]: LIAR/PHEME ingestion, tokenization, vocabularies, label
//!   masking, leave-one-event-out folds and per-event TF-IDF rankings.
//! * [`model`]: the three-CNN network and its backward pass.
//! * [`train`]: the joint-loss training loop and multi-run aggregation.
//! * [`eval`]: confusion counts, binary and macro metrics, LOEO driver.

pub mod corpus;
pub mod engine;
mod error;
pub mod eval;
pub mod model;
pub mod rng;
pub mod train;

pub use corpus::{Class, Dataset, Example, Split, Vocabulary};
pub use engine::{AdamState, LayerGrad, Tensor};
pub use error::{Error, Result};
pub use eval::{ConfusionCounts, MacroMetrics, MetricsReport, Scores};
pub use model::{ModelConfig, TdslParams};
pub use train::{LossBundle, TrainConfig, TrainHistory};
