//! Causal dilated 1D convolution.
//!
//! Inputs are left zero-padded by `(K - 1) * dilation` so the output keeps
//! the input length and `y[.., t]` only reads `x[.., ..=t]`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::nn::init::he_normal;
use crate::scalar::Real;
use crate::tensor::Tensor3;

/// Weights are stored `[c_out][c_in][k]`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParams<T> {
    pub c_out: usize,
    pub c_in: usize,
    pub kernel: usize,
    pub dilation: usize,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads<T> {
    pub input: Tensor3<T>,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> ConvParams<T> {
    pub fn zeros(c_out: usize, c_in: usize, kernel: usize, dilation: usize) -> Result<Self> {
        if c_out == 0 || c_in == 0 || kernel == 0 || dilation == 0 {
            bail!(
                Argument,
                "conv dimensions must be positive (c_out={c_out}, c_in={c_in}, K={kernel}, d={dilation})"
            );
        }
        Ok(Self {
            c_out,
            c_in,
            kernel,
            dilation,
            weight: vec![T::zero(); c_out * c_in * kernel],
            bias: vec![T::zero(); c_out],
        })
    }

    /// He-normal weights with `fan_in = c_in * K`, zero bias.
    pub fn he_init<R: Rng + ?Sized>(
        c_out: usize,
        c_in: usize,
        kernel: usize,
        dilation: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut p = Self::zeros(c_out, c_in, kernel, dilation)?;
        he_normal(&mut p.weight, c_in * kernel, rng);
        Ok(p)
    }

    #[inline]
    pub fn w(&self, o: usize, i: usize, k: usize) -> T {
        self.weight[(o * self.c_in + i) * self.kernel + k]
    }

    /// Number of past samples (including the current one) seen by one output.
    pub fn receptive_field(&self) -> usize {
        1 + (self.kernel - 1) * self.dilation
    }

    fn check(&self) -> Result<()> {
        if self.weight.len() != self.c_out * self.c_in * self.kernel || self.bias.len() != self.c_out {
            bail!(
                Shape,
                "conv parameter buffers do not match {}x{}x{}",
                self.c_out,
                self.c_in,
                self.kernel
            );
        }
        if self.kernel == 0 || self.dilation == 0 {
            bail!(Argument, "conv kernel and dilation must be >= 1");
        }
        Ok(())
    }

    #[inline]
    fn shift(&self, k: usize) -> usize {
        (self.kernel - 1 - k) * self.dilation
    }
}

/// Dot product over eight independent partial sums, which lets the
/// compiler vectorize a reduction it would otherwise keep strictly ordered.
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .fold(T::zero(), |s, (&x, &y)| s + x * y);
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] = acc[l] + x[l] * y[l];
        }
    }
    acc.iter().fold(tail, |s, &v| s + v)
}

pub fn causal_conv1d<T: Real>(x: &Tensor3<T>, p: &ConvParams<T>) -> Result<Tensor3<T>> {
    p.check()?;
    if x.channels() != p.c_in {
        bail!(Shape, "conv expects {} input channels, got {}", p.c_in, x.channels());
    }
    let (n, _, t_len) = x.shape();
    let mut y = Tensor3::zeros(n, p.c_out, t_len);
    for b in 0..n {
        for o in 0..p.c_out {
            let out = y.row_mut(b, o);
            out.fill(p.bias[o]);
            for i in 0..p.c_in {
                let inp = x.row(b, i);
                for k in 0..p.kernel {
                    let s = p.shift(k);
                    if s >= t_len {
                        continue;
                    }
                    let w = p.w(o, i, k);
                    for (yo, &xi) in out[s..].iter_mut().zip(&inp[..t_len - s]) {
                        *yo = *yo + w * xi;
                    }
                }
            }
        }
    }
    Ok(y)
}

pub fn causal_conv1d_backward<T: Real>(x: &Tensor3<T>, p: &ConvParams<T>, grad_y: &Tensor3<T>) -> Result<ConvGrads<T>> {
    p.check()?;
    let (n, c_in, t_len) = x.shape();
    if c_in != p.c_in || grad_y.shape() != (n, p.c_out, t_len) {
        bail!(
            Shape,
            "conv backward: input {:?}, grad {:?}, params {}x{}",
            x.shape(),
            grad_y.shape(),
            p.c_out,
            p.c_in
        );
    }
    let mut grad_x = Tensor3::zeros(n, c_in, t_len);
    let mut grad_w = vec![T::zero(); p.weight.len()];
    let mut grad_b = vec![T::zero(); p.c_out];
    for b in 0..n {
        for (o, gb) in grad_b.iter_mut().enumerate() {
            let gy = grad_y.row(b, o);
            *gb = *gb + gy.iter().copied().sum::<T>();
            for i in 0..c_in {
                let inp = x.row(b, i);
                for k in 0..p.kernel {
                    let s = p.shift(k);
                    if s >= t_len {
                        continue;
                    }
                    let widx = (o * c_in + i) * p.kernel + k;
                    let gw = dot(&gy[s..], &inp[..t_len - s]);
                    grad_w[widx] = grad_w[widx] + gw;
                    let w = p.weight[widx];
                    let gx = grad_x.row_mut(b, i);
                    for (gxi, &g) in gx[..t_len - s].iter_mut().zip(&gy[s..]) {
                        *gxi = *gxi + w * g;
                    }
                }
            }
        }
    }
    Ok(ConvGrads {
        input: grad_x,
        weight: grad_w,
        bias: grad_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(x: &[f64], w: &[f64], d: usize) -> Vec<f64> {
        let x = Tensor3::from_vec(1, 1, x.len(), x.to_vec()).unwrap();
        let mut p = ConvParams::zeros(1, 1, w.len(), d).unwrap();
        p.weight.copy_from_slice(w);
        causal_conv1d(&x, &p).unwrap().into_vec()
    }

    #[test]
    fn two_tap_sum() {
        assert_eq!(single(&[1.0, 2.0, 3.0], &[1.0, 1.0], 1), vec![1.0, 3.0, 5.0]);
    }

    #[test]
    fn dilated_two_tap() {
        assert_eq!(single(&[1.0, 0.0, 0.0, 0.0], &[1.0, 1.0], 2), vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn identity_kernel() {
        let x = [0.5, -2.0, 3.25, 7.0];
        assert_eq!(single(&x, &[1.0], 1), x.to_vec());
    }

    #[test]
    fn kernel_longer_than_signal() {
        // only the newest tap reaches inside a length-2 signal
        assert_eq!(single(&[1.0, 2.0], &[5.0, 0.0, 1.0], 3), vec![1.0, 2.0]);
    }

    #[test]
    fn channel_mismatch_is_shape_error() {
        let x = Tensor3::<f64>::zeros(1, 2, 4);
        let p = ConvParams::<f64>::zeros(1, 3, 2, 1).unwrap();
        assert!(matches!(causal_conv1d(&x, &p), Err(crate::Error::Shape(_))));
        let gy = Tensor3::<f64>::zeros(1, 1, 4);
        assert!(matches!(
            causal_conv1d_backward(&x, &p, &gy),
            Err(crate::Error::Shape(_))
        ));
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let x = Tensor3::from_vec(1, 2, 3, vec![1.0, -1.0, 2.0, 0.5, 0.25, 3.0]).unwrap();
        let mut p = ConvParams::zeros(2, 2, 2, 1).unwrap();
        p.weight.iter_mut().enumerate().for_each(|(i, w)| *w = i as f64 - 3.0);
        let g = causal_conv1d_backward(&x, &p, &Tensor3::zeros(1, 2, 3)).unwrap();
        assert!(g.input.data().iter().chain(&g.weight).chain(&g.bias).all(|&v| v == 0.0));
    }

    #[test]
    fn identity_kernel_passes_gradient_through() {
        let x = Tensor3::from_vec(1, 1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        let mut p = ConvParams::zeros(1, 1, 1, 1).unwrap();
        p.weight[0] = 1.0;
        let gy = Tensor3::from_vec(1, 1, 3, vec![0.1, -0.2, 0.3]).unwrap();
        let g = causal_conv1d_backward(&x, &p, &gy).unwrap();
        assert_eq!(g.input, gy);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(ConvParams::<f64>::zeros(1, 1, 0, 1).is_err());
        assert!(ConvParams::<f64>::zeros(1, 1, 2, 0).is_err());
    }
}
