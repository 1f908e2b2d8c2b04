use crate::error::{bail, Result};
use crate::scalar::Real;
use crate::tensor::{Matrix, Tensor3};

/// Mean over the time axis: `(N, C, T) -> (N, C)`.
pub fn global_avg_pool<T: Real>(x: &Tensor3<T>) -> Matrix<T> {
    let (n, c, t) = x.shape();
    let mut out = Matrix::zeros(n, c);
    if t == 0 {
        return out;
    }
    let inv = T::one() / T::from_f64(t as f64);
    for b in 0..n {
        for ch in 0..c {
            out.row_mut(b)[ch] = x.row(b, ch).iter().copied().sum::<T>() * inv;
        }
    }
    out
}

pub fn global_avg_pool_backward<T: Real>(grad_y: &Matrix<T>, time: usize) -> Result<Tensor3<T>> {
    let (n, c) = (grad_y.rows(), grad_y.cols());
    let mut g = Tensor3::zeros(n, c, time);
    if time == 0 {
        bail!(Shape, "cannot pool over an empty time axis");
    }
    let inv = T::one() / T::from_f64(time as f64);
    for b in 0..n {
        for ch in 0..c {
            g.row_mut(b, ch).fill(grad_y.get(b, ch) * inv);
        }
    }
    Ok(g)
}
