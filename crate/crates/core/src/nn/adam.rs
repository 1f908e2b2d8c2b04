use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::scalar::Real;

/// Bias-corrected Adam state for a list of parameter tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn new(lr: f64) -> Result<Self> {
        Self::with_hyperparameters(lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyperparameters(lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite()) {
            bail!(Argument, "learning rate must be positive, got {lr}");
        }
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
            bail!(Argument, "betas must lie in [0, 1), got {beta1}, {beta2}");
        }
        if !(eps > 0.0) {
            bail!(Argument, "eps must be positive, got {eps}");
        }
        Ok(Self {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        })
    }
}

/// One Adam update applied in place to every parameter tensor.
///
/// Moment buffers are allocated lazily on the first step and must keep the
/// same layout afterwards.
pub fn adam_step<T: Real>(params: &mut [&mut [T]], grads: &[&[T]], state: &mut AdamState<T>) -> Result<()> {
    if params.len() != grads.len() {
        bail!(
            Shape,
            "{} parameter tensors but {} gradients",
            params.len(),
            grads.len()
        );
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() {
            bail!(Shape, "tensor {i}: {} parameters but {} gradients", p.len(), g.len());
        }
    }
    if state.m.is_empty() {
        state.m = params.iter().map(|p| vec![T::zero(); p.len()]).collect();
        state.v = state.m.clone();
    } else if state.m.len() != params.len() || state.m.iter().zip(params.iter()).any(|(m, p)| m.len() != p.len()) {
        bail!(Shape, "Adam state layout does not match parameters");
    }

    state.t += 1;
    let t = state.t as i32;
    let b1 = T::from_f64(state.beta1);
    let b2 = T::from_f64(state.beta2);
    let one = T::one();
    let bc1 = T::from_f64(1.0 - Float::powi(state.beta1, t));
    let bc2 = T::from_f64(1.0 - Float::powi(state.beta2, t));
    let lr = T::from_f64(state.lr);
    let eps = T::from_f64(state.eps);

    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        for j in 0..p.len() {
            let gj = g[j];
            m[j] = b1 * m[j] + (one - b1) * gj;
            v[j] = b2 * v[j] + (one - b2) * gj * gj;
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            p[j] = p[j] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
