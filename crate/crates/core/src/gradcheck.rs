//! Central finite-difference checks for every backward pass.
//!
//! Each check perturbs inputs or parameters one entry at a time and only
//! uses forward computations, so it is independent of the analytic
//! gradients it is compared against.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{LayerSpec, ResTcnConfig, ResTcnModel};
use crate::nn::{
    causal_conv1d, causal_conv1d_backward, dense, dense_backward, global_avg_pool, global_avg_pool_backward, relu,
    relu_backward, softmax_xent, ConvParams, DenseParams,
};
use crate::tensor::{Matrix, Tensor3};

pub const FD_STEP: f64 = 1e-5;
pub const LAYER_TOLERANCE: f64 = 1e-4;
pub const MODEL_TOLERANCE: f64 = 1e-3;
/// Gradients smaller than this are compared in absolute terms.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub name: &'static str,
    pub entries: usize,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

impl GradCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradSuite {
    pub checks: Vec<GradCheck>,
}

impl GradSuite {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(GradCheck::passed)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.checks.iter().map(|c| c.max_rel_error).fold(0.0, f64::max)
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// `∂f/∂x_i ≈ (f(x + h e_i) − f(x − h e_i)) / 2h` for every `i`.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "gradient length mismatch");
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `Σ y ⊙ r` so that the upstream gradient is `r`.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check(name: &'static str, tolerance: f64, parts: &[(&[f64], &[f64])]) -> GradCheck {
    let entries = parts.iter().map(|(a, _)| a.len()).sum();
    let max_rel_error = parts.iter().map(|(a, n)| max_relative_error(a, n)).fold(0.0, f64::max);
    GradCheck {
        name,
        entries,
        max_rel_error,
        tolerance,
    }
}

pub fn check_conv(seed: u64) -> Result<GradCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, c_in, c_out, t, k, d) = (2, 3, 2, 12, 3, 2);
    let x = Tensor3::from_vec(n, c_in, t, random_vec(&mut rng, n * c_in * t))?;
    let mut p = ConvParams::zeros(c_out, c_in, k, d)?;
    p.weight = random_vec(&mut rng, p.weight.len());
    p.bias = random_vec(&mut rng, c_out);
    let r = random_vec(&mut rng, n * c_out * t);
    let gy = Tensor3::from_vec(n, c_out, t, r.clone())?;
    let g = causal_conv1d_backward(&x, &p, &gy)?;

    let fx = central_difference(
        |v| {
            dot(
                causal_conv1d(&Tensor3::from_vec(n, c_in, t, v.to_vec()).unwrap(), &p)
                    .unwrap()
                    .data(),
                &r,
            )
        },
        x.data(),
        FD_STEP,
    );
    let fw = central_difference(
        |v| {
            let q = ConvParams {
                weight: v.to_vec(),
                ..p.clone()
            };
            dot(causal_conv1d(&x, &q).unwrap().data(), &r)
        },
        &p.weight,
        FD_STEP,
    );
    let fb = central_difference(
        |v| {
            let q = ConvParams {
                bias: v.to_vec(),
                ..p.clone()
            };
            dot(causal_conv1d(&x, &q).unwrap().data(), &r)
        },
        &p.bias,
        FD_STEP,
    );
    Ok(check(
        "causal_conv1d",
        LAYER_TOLERANCE,
        &[(g.input.data(), &fx), (&g.weight, &fw), (&g.bias, &fb)],
    ))
}

pub fn check_relu(seed: u64) -> Result<GradCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, c, t) = (2, 3, 10);
    // keep every input at least 0.1 away from the kink
    let xs: Vec<f64> = random_vec(&mut rng, n * c * t)
        .into_iter()
        .map(|v| if v >= 0.0 { v + 0.1 } else { v - 0.1 })
        .collect();
    let x = Tensor3::from_vec(n, c, t, xs)?;
    let r = random_vec(&mut rng, n * c * t);
    let g = relu_backward(&x, &Tensor3::from_vec(n, c, t, r.clone())?)?;
    let fx = central_difference(
        |v| dot(relu(&Tensor3::from_vec(n, c, t, v.to_vec()).unwrap()).data(), &r),
        x.data(),
        FD_STEP,
    );
    Ok(check("relu", LAYER_TOLERANCE, &[(g.data(), &fx)]))
}

pub fn check_pool(seed: u64) -> Result<GradCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, c, t) = (3, 2, 7);
    let x = Tensor3::from_vec(n, c, t, random_vec(&mut rng, n * c * t))?;
    let r = random_vec(&mut rng, n * c);
    let g = global_avg_pool_backward(&Matrix::from_vec(n, c, r.clone())?, t)?;
    let fx = central_difference(
        |v| {
            dot(
                global_avg_pool(&Tensor3::from_vec(n, c, t, v.to_vec()).unwrap()).data(),
                &r,
            )
        },
        x.data(),
        FD_STEP,
    );
    Ok(check("global_avg_pool", LAYER_TOLERANCE, &[(g.data(), &fx)]))
}

pub fn check_dense(seed: u64) -> Result<GradCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, fin, fout) = (4, 5, 3);
    let x = Matrix::from_vec(rows, fin, random_vec(&mut rng, rows * fin))?;
    let mut p = DenseParams::zeros(fout, fin)?;
    p.weight = random_vec(&mut rng, fout * fin);
    p.bias = random_vec(&mut rng, fout);
    let r = random_vec(&mut rng, rows * fout);
    let g = dense_backward(&x, &p, &Matrix::from_vec(rows, fout, r.clone())?)?;
    let fx = central_difference(
        |v| {
            dot(
                dense(&Matrix::from_vec(rows, fin, v.to_vec()).unwrap(), &p)
                    .unwrap()
                    .data(),
                &r,
            )
        },
        x.data(),
        FD_STEP,
    );
    let fw = central_difference(
        |v| {
            dot(
                dense(
                    &x,
                    &DenseParams {
                        weight: v.to_vec(),
                        ..p.clone()
                    },
                )
                .unwrap()
                .data(),
                &r,
            )
        },
        &p.weight,
        FD_STEP,
    );
    let fb = central_difference(
        |v| {
            dot(
                dense(
                    &x,
                    &DenseParams {
                        bias: v.to_vec(),
                        ..p.clone()
                    },
                )
                .unwrap()
                .data(),
                &r,
            )
        },
        &p.bias,
        FD_STEP,
    );
    Ok(check(
        "dense",
        LAYER_TOLERANCE,
        &[(g.input.data(), &fx), (&g.weight, &fw), (&g.bias, &fb)],
    ))
}

pub fn check_softmax_xent(seed: u64) -> Result<GradCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, classes) = (3, 5);
    let logits = Matrix::from_vec(
        rows,
        classes,
        random_vec(&mut rng, rows * classes).iter().map(|v| 3.0 * v).collect(),
    )?;
    let labels: Vec<usize> = (0..rows).map(|_| rng.random_range(0..classes)).collect();
    let (_, g) = softmax_xent(&logits, &labels)?;
    let fx = central_difference(
        |v| {
            softmax_xent(&Matrix::from_vec(rows, classes, v.to_vec()).unwrap(), &labels)
                .unwrap()
                .0
        },
        logits.data(),
        FD_STEP,
    );
    Ok(check("softmax_xent", LAYER_TOLERANCE, &[(g.data(), &fx)]))
}

/// Loss gradient w.r.t. every parameter of a tiny model. `widen` makes the
/// block change channel count so the 1×1 skip conv is exercised.
pub fn check_model(seed: u64, widen: bool) -> Result<GradCheck> {
    let (n, t, classes) = (3, 16, 3);
    let config = ResTcnConfig {
        in_channels: 1,
        stem: LayerSpec::new(3, 2, 1),
        blocks: alloc::vec![LayerSpec::new(3, if widen { 3 } else { 2 }, 2)],
        num_classes: classes,
        seed,
        ..ResTcnConfig::default()
    };
    let mut model = ResTcnModel::<f64>::build(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    // Zero biases put every activation that only sees padding or dead units
    // exactly on a ReLU kink; move them off it.
    for (i, p) in model.parameters_mut().into_iter().enumerate() {
        if i % 2 == 1 {
            p.iter_mut()
                .for_each(|b| *b = rng.random_range(0.05..0.25) * if rng.random_bool(0.5) { 1.0 } else { -1.0 });
        }
    }
    let x = Tensor3::from_vec(n, 1, t, random_vec(&mut rng, n * t))?;
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let (_, grads) = model.loss_and_gradients(&x, &labels)?;

    let loss_with = |tensor: usize, values: &[f64]| -> f64 {
        let mut m = model.clone();
        m.parameters_mut()[tensor].copy_from_slice(values);
        let logits = m.logits(&x).unwrap();
        softmax_xent(&logits, &labels).unwrap().0
    };
    let params: Vec<Vec<f64>> = model.parameters().iter().map(|p| p.to_vec()).collect();
    let numeric: Vec<Vec<f64>> = params
        .iter()
        .enumerate()
        .map(|(i, p)| central_difference(|v| loss_with(i, v), p, FD_STEP))
        .collect();
    let parts: Vec<(&[f64], &[f64])> = grads
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a.as_slice(), n.as_slice()))
        .collect();
    let name = if widen {
        "restcn_end_to_end_skip_conv"
    } else {
        "restcn_end_to_end"
    };
    Ok(check(name, MODEL_TOLERANCE, &parts))
}

/// Every layer check plus both end-to-end model checks.
pub fn run_suite(seed: u64) -> Result<GradSuite> {
    Ok(GradSuite {
        checks: alloc::vec![
            check_conv(seed)?,
            check_relu(seed)?,
            check_pool(seed)?,
            check_dense(seed)?,
            check_softmax_xent(seed)?,
            check_model(seed, false)?,
            check_model(seed, true)?,
        ],
    })
}
