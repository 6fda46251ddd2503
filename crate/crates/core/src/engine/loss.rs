use super::Tensor;
use crate::error::{Error, Result};

/// Numerically stable log-softmax.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&v| v - max - log_sum).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(f64::exp).collect()
}

/// `-log softmax(logits)[label]` and its gradient `softmax(logits) - onehot(label)`.
pub fn softmax_cross_entropy(logits: &Tensor, label: usize) -> Result<(f64, Tensor)> {
    let c = logits.len();
    if label >= c {
        return Err(Error::Index(format!("label {label} outside {c} classes")));
    }
    let logp = log_softmax(logits.data());
    let loss = -logp[label];
    let mut grad: Vec<f64> = logp.iter().map(|v| v.exp()).collect();
    grad[label] -= 1.0;
    Ok((loss, Tensor::new(logits.shape().to_vec(), grad)?))
}

/// Squared distance `||z - z'||^2` with gradients for both arguments.
pub fn mse_consistency(z: &Tensor, z_prime: &Tensor) -> Result<(f64, Tensor, Tensor)> {
    if z.shape() != z_prime.shape() {
        return Err(Error::shape(format!(
            "consistency needs equal shapes, got {:?} and {:?}",
            z.shape(),
            z_prime.shape()
        )));
    }
    let diff: Vec<f64> = z.data().iter().zip(z_prime.data()).map(|(a, b)| a - b).collect();
    let loss = diff.iter().map(|d| d * d).sum();
    let gz: Vec<f64> = diff.iter().map(|d| 2.0 * d).collect();
    let gzp: Vec<f64> = diff.iter().map(|d| -2.0 * d).collect();
    Ok((
        loss,
        Tensor::new(z.shape().to_vec(), gz)?,
        Tensor::new(z.shape().to_vec(), gzp)?,
    ))
}
