//! Synthetic window generators with known class structure, used for
//! end-to-end checks that do not need a real dataset.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{bail, Result};
use crate::signal::{Modality, TaskKind, Window, WindowedDataset};

fn zscore(x: &mut [f64]) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let std = Float::sqrt(x.iter().map(|v| Float::powi(v - mean, 2)).sum::<f64>() / n);
    for v in x {
        *v = (*v - mean) / (std + crate::signal::ZSCORE_EPS);
    }
}

fn window(mut x: Vec<f64>, label: usize, subject: usize, t: f64) -> Window {
    zscore(&mut x);
    Window {
        values: x.into_iter().map(|v| v as f32).collect(),
        axes: 1,
        label,
        subject_id: format!("syn{subject:02}"),
        t_start: t,
    }
}

/// `classes` classes whose windows are sinusoids at distinct frequencies
/// (class `c` completes `2 + 3c` cycles per window) with random phase and
/// amplitude plus white noise. Windows are spread round-robin over
/// `subjects` synthetic subjects.
pub fn spectral_classes(
    classes: usize,
    per_class: usize,
    len: usize,
    subjects: usize,
    seed: u64,
) -> Result<WindowedDataset> {
    if classes < 2 || per_class == 0 || len < 8 || subjects == 0 {
        bail!(
            Argument,
            "synthetic dataset needs >= 2 classes, >= 1 window per class, len >= 8, >= 1 subject"
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.3).expect("valid std");
    let mut windows = Vec::with_capacity(classes * per_class);
    for i in 0..per_class {
        for c in 0..classes {
            let cycles = (2 + 3 * c) as f64;
            let phase = rng.random_range(0.0..2.0 * PI);
            let amp = rng.random_range(0.5..2.0);
            let x = (0..len)
                .map(|t| amp * Float::sin(2.0 * PI * cycles * t as f64 / len as f64 + phase) + noise.sample(&mut rng))
                .collect();
            let n = i * classes + c;
            windows.push(window(x, c, n % subjects, n as f64));
        }
    }
    WindowedDataset::new(windows, classes, Modality::ChestResp, TaskKind::Emotion4)
}

/// Two classes: class 1 is a noisy sinusoid, class 0 white noise only.
pub fn sinusoid_vs_noise(per_class: usize, len: usize, seed: u64) -> Result<WindowedDataset> {
    if per_class == 0 || len < 8 {
        bail!(Argument, "need >= 1 window per class and len >= 8");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).expect("valid std");
    let mut windows = Vec::with_capacity(2 * per_class);
    for i in 0..per_class {
        let phase = rng.random_range(0.0..2.0 * PI);
        let sine = (0..len)
            .map(|t| Float::sin(2.0 * PI * 4.0 * t as f64 / len as f64 + phase) + 0.2 * noise.sample(&mut rng))
            .collect();
        let white = (0..len).map(|_| noise.sample(&mut rng)).collect();
        windows.push(window(white, 0, 0, (2 * i) as f64));
        windows.push(window(sine, 1, 0, (2 * i + 1) as f64));
    }
    WindowedDataset::new(windows, 2, Modality::ChestResp, TaskKind::StressBinary)
}
