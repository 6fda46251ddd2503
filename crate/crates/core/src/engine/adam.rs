use super::Tensor;
use crate::error::{Error, Result};

/// Adam moments and hyperparameters for an ordered list of parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<Tensor>,
    pub second_moment: Vec<Tensor>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    pub const DEFAULT_LEARNING_RATE: f64 = 1e-4;

    /// Zero moments shaped like `params`, default betas and epsilon.
    pub fn new<'a>(params: impl IntoIterator<Item = &'a Tensor>, learning_rate: f64) -> Self {
        let first_moment: Vec<Tensor> = params.into_iter().map(Tensor::zeros_like).collect();
        Self {
            second_moment: first_moment.clone(),
            first_moment,
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate,
        }
    }
}

/// One bias-corrected Adam update. Nothing is modified if any gradient is
/// non-finite or the lists are misaligned.
pub fn adam_step(params: &mut [&mut Tensor], grads: &[&Tensor], state: &mut AdamState) -> Result<()> {
    if state.learning_rate.is_nan() || state.learning_rate <= 0.0 {
        return Err(Error::Config(format!(
            "learning rate must be positive, got {}",
            state.learning_rate
        )));
    }
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(Error::shape(format!(
            "adam got {} params, {} grads, {} moment slots",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    for (i, ((p, g), m)) in params.iter().zip(grads).zip(&state.first_moment).enumerate() {
        if p.shape() != g.shape() || p.shape() != m.shape() {
            return Err(Error::shape(format!(
                "parameter {i}: shape {:?}, grad {:?}, moment {:?}",
                p.shape(),
                g.shape(),
                m.shape()
            )));
        }
        if !g.is_finite() {
            return Err(Error::NonFinite(format!("gradient of parameter {i}")));
        }
    }

    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let correction1 = 1.0 - b1.powi(t);
    let correction2 = 1.0 - b2.powi(t);
    let lr = state.learning_rate;
    let eps = state.epsilon;

    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut().zip(state.second_moment.iter_mut()))
    {
        for (((pv, &gv), mv), vv) in p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut())
            .zip(v.data_mut())
        {
            *mv = b1 * *mv + (1.0 - b1) * gv;
            *vv = b2 * *vv + (1.0 - b2) * gv * gv;
            let m_hat = *mv / correction1;
            let v_hat = *vv / correction2;
            *pv -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = Tensor::from_vec(vec![0.5, -0.25, 3.0]);
        let before = p.clone();
        let g = Tensor::zeros(&[3]);
        let mut state = AdamState::new([&p], 1e-3);
        for _ in 0..5 {
            adam_step(&mut [&mut p], &[&g], &mut state).unwrap();
        }
        assert_eq!(p, before);
        assert_eq!(state.step_count, 5);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = Tensor::from_vec(vec![1.0]);
        let g = Tensor::from_vec(vec![0.3]);
        let mut state = AdamState::new([&p], 1e-4);
        adam_step(&mut [&mut p], &[&g], &mut state).unwrap();
        let delta = p.data()[0] - 1.0;
        let expected = -1e-4 * 0.3 / (0.3 + 1e-8);
        assert!((delta - expected).abs() < 1e-15, "{delta} vs {expected}");
        assert!((delta + 1e-4).abs() < 1e-11);
    }

    #[test]
    fn nan_gradient_aborts_without_update() {
        let mut p = Tensor::from_vec(vec![1.0, 2.0]);
        let g = Tensor::from_vec(vec![0.1, f64::NAN]);
        let mut state = AdamState::new([&p], 1e-4);
        assert!(matches!(
            adam_step(&mut [&mut p], &[&g], &mut state),
            Err(Error::NonFinite(_))
        ));
        assert_eq!(p.data(), &[1.0, 2.0]);
        assert_eq!(state.step_count, 0);
    }
}
