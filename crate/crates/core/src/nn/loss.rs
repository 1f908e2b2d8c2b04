use crate::error::{bail, Result};
use crate::scalar::Real;
use crate::tensor::Matrix;

/// Row-wise softmax with max subtraction.
pub fn softmax<T: Real>(logits: &Matrix<T>) -> Matrix<T> {
    let mut p = logits.clone();
    for r in 0..p.rows() {
        let row = p.row_mut(r);
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum = sum + *v;
        }
        for v in row.iter_mut() {
            *v = *v / sum;
        }
    }
    p
}

/// Mean cross-entropy over the batch and its gradient `(softmax - onehot) / N`.
pub fn softmax_xent<T: Real>(logits: &Matrix<T>, labels: &[usize]) -> Result<(T, Matrix<T>)> {
    let (n, c) = (logits.rows(), logits.cols());
    if labels.len() != n {
        bail!(Shape, "{} labels for {} logit rows", labels.len(), n);
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
        bail!(Argument, "label {bad} out of range for {c} classes");
    }
    if n == 0 {
        return Ok((T::zero(), logits.clone()));
    }
    let mut grad = softmax(logits);
    let inv_n = T::one() / T::from_f64(n as f64);
    let mut loss = T::zero();
    for (r, &label) in labels.iter().enumerate() {
        let row = logits.row(r);
        let top = crate::model::argmax(row);
        let max = row[top];
        // ln_1p over the non-max terms keeps precision when one logit dominates
        let rest = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != top)
            .map(|(_, &v)| (v - max).exp())
            .sum::<T>();
        loss = loss + (max - row[label]) + rest.ln_1p();
        let g = grad.row_mut(r);
        g[label] = g[label] - T::one();
        for v in g.iter_mut() {
            *v = *v * inv_n;
        }
    }
    Ok((loss * inv_n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uniform_logits_give_ln_c() {
        let logits = Matrix::from_vec(2, 4, vec![0.3; 8]).unwrap();
        let (loss, _) = softmax_xent(&logits, &[0, 3]).unwrap();
        assert!((loss - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn loss_decreases_to_zero_as_true_logit_grows() {
        let mut prev = f64::INFINITY;
        for step in 0..40 {
            let z = step as f64;
            let logits = Matrix::from_vec(1, 3, vec![z, 0.0, 0.0]).unwrap();
            let (loss, _) = softmax_xent(&logits, &[0]).unwrap();
            assert!(loss < prev);
            prev = loss;
        }
        assert!(prev < 1e-15);
    }

    #[test]
    fn out_of_range_label() {
        let logits = Matrix::<f64>::zeros(1, 2);
        assert!(matches!(softmax_xent(&logits, &[2]), Err(crate::Error::Argument(_))));
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let logits = Matrix::from_vec(1, 2, vec![1e4, -1e4]).unwrap();
        let (loss, g): (f64, _) = softmax_xent(&logits, &[1]).unwrap();
        assert!(loss.is_finite() && g.data().iter().all(|v: &f64| v.is_finite()));
    }
}
