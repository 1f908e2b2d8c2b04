use crate::error::{bail, Result};
use crate::scalar::Real;
use crate::tensor::Tensor3;

pub fn relu<T: Real>(x: &Tensor3<T>) -> Tensor3<T> {
    let mut y = x.clone();
    for v in y.data_mut() {
        if !(*v > T::zero()) {
            *v = T::zero();
        }
    }
    y
}

/// Gradient is masked wherever `x <= 0`; the subgradient at 0 is 0.
pub fn relu_backward<T: Real>(x: &Tensor3<T>, grad_y: &Tensor3<T>) -> Result<Tensor3<T>> {
    if !x.same_shape(grad_y) {
        bail!(
            Shape,
            "relu backward: input {:?} vs grad {:?}",
            x.shape(),
            grad_y.shape()
        );
    }
    let mut g = grad_y.clone();
    for (gv, &xv) in g.data_mut().iter_mut().zip(x.data()) {
        if !(xv > T::zero()) {
            *gv = T::zero();
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn clamps_negatives_and_zero() {
        let x = Tensor3::from_vec(1, 1, 3, vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        let g = relu_backward(&x, &Tensor3::from_vec(1, 1, 3, vec![1.0; 3]).unwrap()).unwrap();
        assert_eq!(g.data(), &[0.0, 0.0, 1.0]);
    }
}
