//! Inputs shared by the benchmarks.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tdsl::corpus::{build_vocab, synthetic_separable};
use tdsl::model::TdslParams;
use tdsl::{Dataset, ModelConfig, Tensor, TrainConfig};

pub fn uniform(seed: u64, shape: &[usize], bound: f64) -> Tensor {
    let mut r = StdRng::seed_from_u64(seed);
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| r.gen_range(-bound..bound)).collect()).expect("shape matches data")
}

/// Randomly initialized parameters for `config`.
pub fn params(config: ModelConfig, seed: u64) -> TdslParams {
    let mut p = TdslParams::zeros(config).expect("valid config");
    for (i, t) in p.tensors_mut().into_iter().enumerate() {
        *t = uniform(seed + i as u64, t.shape(), 0.1);
    }
    p
}

pub fn token_ids(seed: u64, vocab_size: usize, len: usize) -> Vec<usize> {
    let mut r = StdRng::seed_from_u64(seed);
    (0..len).map(|_| r.gen_range(0..vocab_size)).collect()
}

/// `n` encoded synthetic examples and the vocabulary size.
pub fn encoded_batch(n: usize, config: &TrainConfig) -> (Dataset, usize) {
    let raw = synthetic_separable(n, config.max_len, 1).expect("synthetic data");
    let vocab = build_vocab(&[&raw], 1).expect("vocabulary");
    (raw.encode(&vocab, config.max_len).expect("encoding"), vocab.len())
}
