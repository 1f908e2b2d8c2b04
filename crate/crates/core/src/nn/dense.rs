use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::nn::init::he_normal;
use crate::scalar::Real;
use crate::tensor::Matrix;

/// Fully connected layer, `y = x Wᵀ + b` with `W` stored `[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams<T> {
    pub out_features: usize,
    pub in_features: usize,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads<T> {
    pub input: Matrix<T>,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> DenseParams<T> {
    pub fn zeros(out_features: usize, in_features: usize) -> Result<Self> {
        if out_features == 0 || in_features == 0 {
            bail!(
                Argument,
                "dense layer needs positive sizes, got {out_features}x{in_features}"
            );
        }
        Ok(Self {
            out_features,
            in_features,
            weight: vec![T::zero(); out_features * in_features],
            bias: vec![T::zero(); out_features],
        })
    }

    pub fn he_init<R: Rng + ?Sized>(out_features: usize, in_features: usize, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(out_features, in_features)?;
        he_normal(&mut p.weight, in_features, rng);
        Ok(p)
    }

    fn check(&self, x: &Matrix<T>) -> Result<()> {
        if self.weight.len() != self.out_features * self.in_features || self.bias.len() != self.out_features {
            bail!(
                Shape,
                "dense parameter buffers do not match {}x{}",
                self.out_features,
                self.in_features
            );
        }
        if x.cols() != self.in_features {
            bail!(
                Shape,
                "dense expects {} input features, got {}",
                self.in_features,
                x.cols()
            );
        }
        Ok(())
    }
}

pub fn dense<T: Real>(x: &Matrix<T>, p: &DenseParams<T>) -> Result<Matrix<T>> {
    p.check(x)?;
    let mut y = Matrix::zeros(x.rows(), p.out_features);
    for r in 0..x.rows() {
        let xr = x.row(r);
        for (o, yv) in y.row_mut(r).iter_mut().enumerate() {
            let w = &p.weight[o * p.in_features..(o + 1) * p.in_features];
            *yv = p.bias[o] + w.iter().zip(xr).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
    }
    Ok(y)
}

pub fn dense_backward<T: Real>(x: &Matrix<T>, p: &DenseParams<T>, grad_y: &Matrix<T>) -> Result<DenseGrads<T>> {
    p.check(x)?;
    if grad_y.rows() != x.rows() || grad_y.cols() != p.out_features {
        bail!(
            Shape,
            "dense backward: grad is {}x{}, expected {}x{}",
            grad_y.rows(),
            grad_y.cols(),
            x.rows(),
            p.out_features
        );
    }
    let mut grad_x = Matrix::zeros(x.rows(), p.in_features);
    let mut grad_w = vec![T::zero(); p.weight.len()];
    let mut grad_b = vec![T::zero(); p.out_features];
    for r in 0..x.rows() {
        let xr = x.row(r);
        let gy = grad_y.row(r);
        let gx = grad_x.row_mut(r);
        for (o, &g) in gy.iter().enumerate() {
            grad_b[o] = grad_b[o] + g;
            let w = &p.weight[o * p.in_features..(o + 1) * p.in_features];
            let gw = &mut grad_w[o * p.in_features..(o + 1) * p.in_features];
            for j in 0..p.in_features {
                gw[j] = gw[j] + g * xr[j];
                gx[j] = gx[j] + g * w[j];
            }
        }
    }
    Ok(DenseGrads {
        input: grad_x,
        weight: grad_w,
        bias: grad_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weight_copies_input() {
        let mut p = DenseParams::<f64>::zeros(3, 3).unwrap();
        for i in 0..3 {
            p.weight[i * 3 + i] = 1.0;
        }
        let x = Matrix::from_vec(2, 3, vec![1.0, -2.0, 3.0, 0.5, 0.0, 9.0]).unwrap();
        assert_eq!(dense(&x, &p).unwrap(), x);
    }

    #[test]
    fn zero_input_broadcasts_bias() {
        let mut p = DenseParams::<f64>::zeros(2, 4).unwrap();
        p.weight.fill(3.0);
        p.bias = vec![0.5, -1.5];
        let y = dense(&Matrix::zeros(3, 4), &p).unwrap();
        for r in 0..3 {
            assert_eq!(y.row(r), &[0.5, -1.5]);
        }
    }

    #[test]
    fn feature_mismatch() {
        let p = DenseParams::<f64>::zeros(2, 4).unwrap();
        assert!(dense(&Matrix::zeros(1, 3), &p).is_err());
    }
}
