//! Dense rank-3 tensors (batch × channels × time) and row-major matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    n: usize,
    c: usize,
    t: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(n: usize, c: usize, t: usize) -> Self {
        Self {
            n,
            c,
            t,
            data: vec![T::zero(); n * c * t],
        }
    }

    pub fn from_vec(n: usize, c: usize, t: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * c * t {
            bail!(
                Shape,
                "tensor data has {} values, expected {}x{}x{}",
                data.len(),
                n,
                c,
                t
            );
        }
        Ok(Self { n, c, t, data })
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n, self.c, self.t)
    }

    #[inline]
    pub fn batch(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.c
    }

    #[inline]
    pub fn time(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    fn offset(&self, n: usize, c: usize, t: usize) -> usize {
        (n * self.c + c) * self.t + t
    }

    #[inline]
    pub fn get(&self, n: usize, c: usize, t: usize) -> T {
        self.data[self.offset(n, c, t)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, c: usize, t: usize, v: T) {
        let i = self.offset(n, c, t);
        self.data[i] = v;
    }

    /// The time series of channel `c` in batch item `n`.
    #[inline]
    pub fn row(&self, n: usize, c: usize) -> &[T] {
        let start = self.offset(n, c, 0);
        &self.data[start..start + self.t]
    }

    #[inline]
    pub fn row_mut(&mut self, n: usize, c: usize) -> &mut [T] {
        let start = self.offset(n, c, 0);
        &mut self.data[start..start + self.t]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    /// Elementwise sum with a tensor of identical shape.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            bail!(Shape, "cannot add {:?} and {:?}", self.shape(), other.shape());
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Self {
            n: self.n,
            c: self.c,
            t: self.t,
            data,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Row-major `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            bail!(
                Shape,
                "matrix data has {} values, expected {}x{}",
                data.len(),
                rows,
                cols
            );
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }
}
