#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdsl::model::TdslParams;
use tdsl::{ModelConfig, Tensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, shape: &[usize], bound: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-bound..bound)).collect()).unwrap()
}

/// `|a - n| / max(|a| + |n|, 1e-6)`: relative where the gradient is
/// meaningful, absolute (scaled) where both sides are ~0.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-6)
}

/// Central-difference derivative of `f` at every entry of `x`.
pub fn numeric_grad(x: &Tensor, h: f64, mut f: impl FnMut(&Tensor) -> f64) -> Vec<f64> {
    let mut probe = x.clone();
    (0..x.len())
        .map(|i| {
            let orig = probe.data()[i];
            probe.data_mut()[i] = orig + h;
            let up = f(&probe);
            probe.data_mut()[i] = orig - h;
            let down = f(&probe);
            probe.data_mut()[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic.iter().zip(numeric).map(|(&a, &n)| rel_err(a, n)).fold(0.0, f64::max)
}

pub fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

pub fn tiny_config() -> ModelConfig {
    ModelConfig::new(20, 6, 8).with_filters(4, 4)
}

/// Every parameter drawn from U(-bound, bound), biases included, so no
/// pre-activation sits exactly on the ReLU kink.
pub fn random_params(config: ModelConfig, seed: u64, bound: f64) -> TdslParams {
    let mut r = rng(seed);
    let mut p = TdslParams::zeros(config).unwrap();
    for t in p.tensors_mut() {
        *t = uniform(&mut r, t.shape(), bound);
    }
    p
}
