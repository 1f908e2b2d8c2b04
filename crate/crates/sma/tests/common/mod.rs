#![allow(dead_code)]

use std::f32::consts::TAU;
use std::path::Path;

use sma::config::Config;
use sma::io::write_recording;
use sma_core::model::{LayerSpec, ResTcnConfig};
use sma_core::signal::{Channel, Modality, Recording};

pub const LABEL_RATE: f64 = 700.0;

pub fn native_rate(m: Modality) -> f64 {
    match m {
        Modality::WristAcc => 32.0,
        Modality::WristBvp => 64.0,
        Modality::WristEda | Modality::WristTemp => 4.0,
        _ => 700.0,
    }
}

/// Label schedule: `seg_s` seconds of each of 1..=4 separated by short
/// stretches of label 0.
pub fn label_track(seg_s: f64) -> Vec<i32> {
    let seg = (seg_s * LABEL_RATE) as usize;
    let gap = (2.0 * LABEL_RATE) as usize;
    let mut out = vec![0; gap];
    for l in 1..=4 {
        out.extend(std::iter::repeat_n(l, seg));
        out.extend(std::iter::repeat_n(0, gap));
    }
    out
}

/// Every channel carries one tone set by the label and one set by the
/// subject, so both identification and emotion are learnable.
pub fn recording(subject: usize, seg_s: f64) -> Recording {
    recording_with(subject, seg_s, &Modality::ALL)
}

pub fn recording_with(subject: usize, seg_s: f64, modalities: &[Modality]) -> Recording {
    let labels = label_track(seg_s);
    let secs = labels.len() as f64 / LABEL_RATE;
    let channels = modalities
        .iter()
        .map(|&m| {
            let rate = native_rate(m);
            let n = (secs * rate).round() as usize;
            let cap = (rate / 4.0) as f32;
            let samples = (0..m.axes())
                .map(|axis| {
                    (0..n)
                        .map(|i| {
                            let t = i as f32 / rate as f32;
                            let raw = labels[((i as f64 * LABEL_RATE / rate) as usize).min(labels.len() - 1)] as f32;
                            let f_label = (0.4 + 0.3 * raw).min(cap);
                            let f_subj = (0.25 + 0.35 * subject as f32).min(cap);
                            (TAU * f_label * t).sin() + 0.7 * (TAU * f_subj * t + axis as f32).sin()
                        })
                        .collect()
                })
                .collect();
            Channel::new(m, rate, samples).unwrap()
        })
        .collect();
    Recording::new(format!("S{}", subject + 2), channels, &labels, LABEL_RATE).unwrap()
}

pub fn write_root(root: &Path, subjects: usize, seg_s: f64) -> Vec<Recording> {
    let recs: Vec<Recording> = (0..subjects).map(|s| recording(s, seg_s)).collect();
    for r in &recs {
        write_recording(r, &root.join(r.subject_id())).unwrap();
    }
    recs
}

pub fn tiny_model() -> ResTcnConfig {
    ResTcnConfig {
        stem: LayerSpec::new(3, 4, 1),
        blocks: vec![LayerSpec::new(3, 4, 2)],
        epochs: 2,
        batch_size: 16,
        ..ResTcnConfig::default()
    }
}

pub fn tiny_config(root: &Path, out: &Path) -> Config {
    Config {
        data_root: root.to_path_buf(),
        out: out.to_path_buf(),
        model: tiny_model(),
        folds: 2,
        ..Config::default()
    }
}
