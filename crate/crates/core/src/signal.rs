//! Recordings, label mapping, decimation and fixed-length windowing.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};

/// Raw label values carried by recordings are `0..=MAX_RAW_LABEL`.
pub const MAX_RAW_LABEL: u8 = 7;

/// Added to the per-axis standard deviation before dividing.
pub const ZSCORE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Modality {
    #[serde(rename = "chest.ACC")]
    ChestAcc,
    #[serde(rename = "chest.ECG")]
    ChestEcg,
    #[serde(rename = "chest.EDA")]
    ChestEda,
    #[serde(rename = "chest.EMG")]
    ChestEmg,
    #[serde(rename = "chest.RESP")]
    ChestResp,
    #[serde(rename = "chest.TEMP")]
    ChestTemp,
    #[serde(rename = "wrist.ACC")]
    WristAcc,
    #[serde(rename = "wrist.BVP")]
    WristBvp,
    #[serde(rename = "wrist.EDA")]
    WristEda,
    #[serde(rename = "wrist.TEMP")]
    WristTemp,
}

impl Modality {
    /// Report row order: chest ACC…TEMP, then wrist ACC…TEMP.
    pub const ALL: [Modality; 10] = [
        Modality::ChestAcc,
        Modality::ChestEcg,
        Modality::ChestEda,
        Modality::ChestEmg,
        Modality::ChestResp,
        Modality::ChestTemp,
        Modality::WristAcc,
        Modality::WristBvp,
        Modality::WristEda,
        Modality::WristTemp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Modality::ChestAcc => "chest.ACC",
            Modality::ChestEcg => "chest.ECG",
            Modality::ChestEda => "chest.EDA",
            Modality::ChestEmg => "chest.EMG",
            Modality::ChestResp => "chest.RESP",
            Modality::ChestTemp => "chest.TEMP",
            Modality::WristAcc => "wrist.ACC",
            Modality::WristBvp => "wrist.BVP",
            Modality::WristEda => "wrist.EDA",
            Modality::WristTemp => "wrist.TEMP",
        }
    }

    pub fn axes(self) -> usize {
        match self {
            Modality::ChestAcc | Modality::WristAcc => 3,
            _ => 1,
        }
    }

    pub fn is_chest(self) -> bool {
        matches!(
            self,
            Modality::ChestAcc
                | Modality::ChestEcg
                | Modality::ChestEda
                | Modality::ChestEmg
                | Modality::ChestResp
                | Modality::ChestTemp
        )
    }

    /// The sensor part of the name, e.g. `"RESP"`.
    pub fn signal(self) -> &'static str {
        let name = self.name();
        &name[name.find('.').map_or(0, |i| i + 1)..]
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Modality::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Lookup(alloc::format!("unknown modality {s:?}")))
    }
}

/// One sensor stream: `axes` equally long sample sequences at `sample_rate` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    modality: Modality,
    sample_rate: f64,
    samples: Vec<Vec<f32>>,
}

impl Channel {
    pub fn new(modality: Modality, sample_rate: f64, samples: Vec<Vec<f32>>) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            bail!(
                Validation,
                "{modality}: sample rate must be positive, got {sample_rate}"
            );
        }
        if samples.len() != modality.axes() {
            bail!(
                Validation,
                "{modality}: expected {} axes, got {}",
                modality.axes(),
                samples.len()
            );
        }
        let len = samples[0].len();
        if samples.iter().any(|a| a.len() != len) {
            bail!(Validation, "{modality}: axes have different lengths");
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            bail!(Validation, "{modality}: non-finite sample");
        }
        Ok(Self {
            modality,
            sample_rate,
            samples,
        })
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn axes(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self, i: usize) -> &[f32] {
        &self.samples[i]
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }
}

/// One subject's channels plus the raw label track on the reference clock.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    subject_id: String,
    channels: Vec<Channel>,
    labels: Vec<u8>,
    label_rate: f64,
}

impl Recording {
    /// Validates label values and, for channels sampled on the label clock,
    /// that the label track spans the same duration within one sample.
    pub fn new(subject_id: String, channels: Vec<Channel>, labels: &[i32], label_rate: f64) -> Result<Self> {
        if !(label_rate > 0.0 && label_rate.is_finite()) {
            bail!(Validation, "label rate must be positive, got {label_rate}");
        }
        let labels = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| match u8::try_from(l) {
                Ok(v) if v <= MAX_RAW_LABEL => Ok(v),
                _ => Err(Error::Validation(alloc::format!(
                    "label {l} at index {i} outside 0..={MAX_RAW_LABEL}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        for (i, c) in channels.iter().enumerate() {
            if channels[..i].iter().any(|o| o.modality == c.modality) {
                bail!(Validation, "duplicate channel {}", c.modality);
            }
            if c.sample_rate == label_rate && c.len().abs_diff(labels.len()) > 1 {
                bail!(
                    Validation,
                    "{}: {} samples but {} labels on the same clock",
                    c.modality,
                    c.len(),
                    labels.len()
                );
            }
        }
        Ok(Self {
            subject_id,
            channels,
            labels,
            label_rate,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label_rate(&self) -> f64 {
        self.label_rate
    }

    pub fn channel(&self, modality: Modality) -> Result<&Channel> {
        self.channels
            .iter()
            .find(|c| c.modality == modality)
            .ok_or_else(|| Error::Lookup(alloc::format!("subject {} has no channel {modality}", self.subject_id)))
    }

    /// Replaces one channel, e.g. with a decimated copy.
    pub fn with_channel(mut self, channel: Channel) -> Result<Self> {
        match self.channels.iter_mut().find(|c| c.modality == channel.modality) {
            Some(slot) => *slot = channel,
            None => bail!(
                Lookup,
                "subject {} has no channel {}",
                self.subject_id,
                channel.modality
            ),
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Identification,
    Emotion4,
    StressBinary,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Identification => "identification",
            TaskKind::Emotion4 => "emotion4",
            TaskKind::StressBinary => "stress_binary",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [TaskKind::Identification, TaskKind::Emotion4, TaskKind::StressBinary]
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Lookup(alloc::format!("unknown task {s:?}")))
    }
}

/// A labelling task applied to one recording. Identification needs to know
/// which class the recording's subject maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Identification { subject_index: usize, subject_count: usize },
    Emotion4,
    StressBinary,
}

impl Task {
    pub fn kind(self) -> TaskKind {
        match self {
            Task::Identification { .. } => TaskKind::Identification,
            Task::Emotion4 => TaskKind::Emotion4,
            Task::StressBinary => TaskKind::StressBinary,
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            Task::Identification { subject_count, .. } => subject_count,
            Task::Emotion4 => 4,
            Task::StressBinary => 2,
        }
    }
}

/// Maps a raw protocol label to a class index, or `None` to discard.
///
/// Raw codes: 0 transient, 1 baseline, 2 stress, 3 amusement, 4 meditation,
/// 5–7 unused.
pub fn map_labels(raw: u8, task: Task) -> Option<usize> {
    match (task, raw) {
        (Task::Emotion4, 1..=4) => Some(raw as usize - 1),
        (Task::StressBinary, 2) => Some(1),
        (Task::StressBinary, 1 | 3 | 4) => Some(0),
        (Task::Identification { subject_index, .. }, 1..=4) => Some(subject_index),
        _ => None,
    }
}

/// Block-mean downsampling; a trailing partial block is dropped.
pub fn decimate(ch: &Channel, factor: usize) -> Result<Channel> {
    if factor == 0 {
        bail!(Argument, "decimation factor must be >= 1");
    }
    if factor == 1 {
        return Ok(ch.clone());
    }
    let samples = ch
        .samples
        .iter()
        .map(|axis| {
            axis.chunks_exact(factor)
                .map(|b| (b.iter().map(|&v| v as f64).sum::<f64>() / factor as f64) as f32)
                .collect()
        })
        .collect();
    Channel::new(ch.modality, ch.sample_rate / factor as f64, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_s: f64,
    pub stride_s: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            window_s: 5.0,
            stride_s: 2.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    /// Axis-major `axes × len` standardized samples.
    pub values: Vec<f32>,
    pub axes: usize,
    pub label: usize,
    pub subject_id: String,
    pub t_start: f64,
}

impl Window {
    pub fn len(&self) -> usize {
        self.values.len().checked_div(self.axes).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn axis(&self, i: usize) -> &[f32] {
        let len = self.len();
        &self.values[i * len..(i + 1) * len]
    }
}

/// Windows of a single modality and task. May be empty when a recording is
/// shorter than one window; training rejects empty sets.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    windows: Vec<Window>,
    num_classes: usize,
    modality: Modality,
    task: TaskKind,
}

impl WindowedDataset {
    pub fn new(windows: Vec<Window>, num_classes: usize, modality: Modality, task: TaskKind) -> Result<Self> {
        if let Some(first) = windows.first() {
            let (axes, len) = (first.axes, first.len());
            for (i, w) in windows.iter().enumerate() {
                if w.axes != axes || w.len() != len || w.values.len() != axes * len {
                    bail!(
                        Validation,
                        "window {i} has shape {}x{}, expected {axes}x{len}",
                        w.axes,
                        w.len()
                    );
                }
                if w.label >= num_classes {
                    bail!(Validation, "window {i} has label {} >= {num_classes} classes", w.label);
                }
            }
        }
        Ok(Self {
            windows,
            num_classes,
            modality,
            task,
        })
    }

    /// Concatenates per-subject datasets of the same modality and task.
    pub fn pool(parts: Vec<WindowedDataset>) -> Result<Self> {
        let Some(first) = parts.first() else {
            bail!(Argument, "cannot pool zero datasets");
        };
        let (modality, task) = (first.modality, first.task);
        if let Some(p) = parts.iter().find(|p| p.modality != modality || p.task != task) {
            bail!(
                Validation,
                "cannot pool {}/{} with {}/{}",
                modality,
                task,
                p.modality,
                p.task
            );
        }
        let num_classes = parts.iter().map(|p| p.num_classes).max().unwrap_or(0);
        let windows = parts.into_iter().flat_map(|p| p.windows).collect();
        Self::new(windows, num_classes, modality, task)
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn axes(&self) -> Option<usize> {
        self.windows.first().map(|w| w.axes)
    }

    pub fn window_len(&self) -> Option<usize> {
        self.windows.first().map(Window::len)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.num_classes];
        for w in &self.windows {
            counts[w.label] += 1;
        }
        counts
    }

    /// Distinct subject ids, sorted.
    pub fn subjects(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.windows.iter().map(|w| w.subject_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

fn samples_for(seconds: f64, rate: f64) -> usize {
    round_to_usize(seconds * rate)
}

fn round_to_usize(v: f64) -> usize {
    Float::round(v).max(0.0) as usize
}

fn majority_label(labels: &[u8]) -> u8 {
    let mut counts = [0usize; MAX_RAW_LABEL as usize + 1];
    for &l in labels {
        counts[l as usize] += 1;
    }
    // strict comparison keeps the lowest raw value on ties
    let mut best = 0;
    for (v, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = v;
        }
    }
    best as u8
}

fn standardize_into(out: &mut Vec<f32>, x: &[f32]) {
    let n = x.len() as f64;
    let mean = x.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = x.iter().map(|&v| Float::powi(v as f64 - mean, 2)).sum::<f64>() / n;
    let denom = Float::sqrt(var) + ZSCORE_EPS;
    out.extend(x.iter().map(|&v| ((v as f64 - mean) / denom) as f32));
}

/// Cuts `modality` of `rec` into z-scored windows labelled by the majority
/// raw label over each window's span on the label clock.
pub fn make_windows(rec: &Recording, modality: Modality, spec: WindowSpec, task: Task) -> Result<WindowedDataset> {
    if !(spec.window_s > 0.0) || !(spec.stride_s > 0.0) {
        bail!(
            Argument,
            "window and stride must be positive, got {} / {}",
            spec.window_s,
            spec.stride_s
        );
    }
    if let Task::Identification {
        subject_index,
        subject_count,
    } = task
    {
        if subject_index >= subject_count {
            bail!(
                Argument,
                "subject index {subject_index} >= subject count {subject_count}"
            );
        }
    }
    let ch = rec.channel(modality)?;
    let rate = ch.sample_rate();
    let win = samples_for(spec.window_s, rate);
    let stride = samples_for(spec.stride_s, rate);
    if win == 0 || stride == 0 {
        bail!(Argument, "window {win} / stride {stride} samples at {rate} Hz");
    }
    let label_scale = rec.label_rate / rate;
    let labels = rec.labels();
    let mut windows = Vec::new();
    let mut start = 0;
    while start + win <= ch.len() {
        let lo = round_to_usize(start as f64 * label_scale).min(labels.len());
        let hi = round_to_usize((start + win) as f64 * label_scale).min(labels.len());
        if lo < hi {
            if let Some(label) = map_labels(majority_label(&labels[lo..hi]), task) {
                let mut values = Vec::with_capacity(win * ch.axes());
                for a in 0..ch.axes() {
                    standardize_into(&mut values, &ch.axis(a)[start..start + win]);
                }
                windows.push(Window {
                    values,
                    axes: ch.axes(),
                    label,
                    subject_id: rec.subject_id.clone(),
                    t_start: start as f64 / rate,
                });
            }
        }
        start += stride;
    }
    WindowedDataset::new(windows, task.num_classes(), modality, task.kind())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn resp(values: Vec<f32>, rate: f64) -> Channel {
        Channel::new(Modality::ChestResp, rate, vec![values]).unwrap()
    }

    fn recording(len: usize, label: i32) -> Recording {
        let ch = resp((0..len).map(|i| (i as f32 * 0.01).sin()).collect(), 700.0);
        Recording::new("S2".to_string(), vec![ch], &vec![label; len], 700.0).unwrap()
    }

    #[test]
    fn label_mapping_table() {
        assert_eq!(map_labels(2, Task::Emotion4), Some(1));
        assert_eq!(map_labels(1, Task::Emotion4), Some(0));
        assert_eq!(map_labels(4, Task::Emotion4), Some(3));
        assert_eq!(map_labels(2, Task::StressBinary), Some(1));
        assert_eq!(map_labels(4, Task::StressBinary), Some(0));
        let id = Task::Identification {
            subject_index: 5,
            subject_count: 15,
        };
        assert_eq!(map_labels(3, id), Some(5));
        for task in [Task::Emotion4, Task::StressBinary, id] {
            for raw in [0, 5, 6, 7] {
                assert_eq!(map_labels(raw, task), None);
            }
        }
    }

    #[test]
    fn non_overlapping_windows() {
        let ds = make_windows(
            &recording(60 * 700, 1),
            Modality::ChestResp,
            WindowSpec {
                window_s: 5.0,
                stride_s: 5.0,
            },
            Task::Emotion4,
        )
        .unwrap();
        assert_eq!(ds.len(), 12);
        assert_eq!(ds.window_len(), Some(3500));
    }

    #[test]
    fn half_overlap_windows() {
        let ds = make_windows(
            &recording(60 * 700, 2),
            Modality::ChestResp,
            WindowSpec::default(),
            Task::Emotion4,
        )
        .unwrap();
        // starts 0, 2.5, …, 55 s
        assert_eq!(ds.len(), 23);
        assert_eq!(ds.windows()[22].t_start, 55.0);
        assert!(ds.windows().iter().all(|w| w.label == 1));
    }

    #[test]
    fn constant_window_standardizes_to_zero() {
        let ch = resp(vec![3.5; 700 * 10], 700.0);
        let rec = Recording::new("S3".to_string(), vec![ch], &vec![1; 7000], 700.0).unwrap();
        let ds = make_windows(&rec, Modality::ChestResp, WindowSpec::default(), Task::Emotion4).unwrap();
        assert!(!ds.is_empty());
        assert!(ds.windows().iter().all(|w| w.values.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn window_longer_than_recording_is_empty() {
        let ds = make_windows(
            &recording(700, 1),
            Modality::ChestResp,
            WindowSpec::default(),
            Task::Emotion4,
        )
        .unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn missing_modality_is_lookup_error() {
        let r = make_windows(
            &recording(7000, 1),
            Modality::WristBvp,
            WindowSpec::default(),
            Task::Emotion4,
        );
        assert!(matches!(r, Err(Error::Lookup(_))));
    }

    #[test]
    fn discarded_majority_drops_window() {
        let ds = make_windows(
            &recording(7000, 0),
            Modality::ChestResp,
            WindowSpec::default(),
            Task::Emotion4,
        )
        .unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn majority_tie_goes_to_lower_raw_label() {
        assert_eq!(majority_label(&[3, 3, 2, 2]), 2);
        assert_eq!(majority_label(&[4, 1, 4, 1, 2]), 1);
    }

    #[test]
    fn labels_follow_the_label_clock_after_decimation() {
        // 20 s at 700 Hz: first 10 s baseline, last 10 s stress
        let mut labels = vec![1; 7000];
        labels.extend(vec![2; 7000]);
        let ch = resp((0..14000).map(|i| (i as f32 * 0.05).cos()).collect(), 700.0);
        let rec = Recording::new("S4".to_string(), vec![ch], &labels, 700.0).unwrap();
        let rec = rec
            .clone()
            .with_channel(decimate(rec.channel(Modality::ChestResp).unwrap(), 10).unwrap())
            .unwrap();
        let spec = WindowSpec {
            window_s: 5.0,
            stride_s: 5.0,
        };
        let ds = make_windows(&rec, Modality::ChestResp, spec, Task::StressBinary).unwrap();
        assert_eq!(ds.window_len(), Some(350));
        assert_eq!(ds.labels(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn decimate_block_means() {
        let ch = resp(vec![1.0, 2.0, 3.0, 4.0], 700.0);
        let d = decimate(&ch, 2).unwrap();
        assert_eq!(d.axis(0), &[1.5, 3.5]);
        assert_eq!(d.sample_rate(), 350.0);
        assert_eq!(decimate(&ch, 1).unwrap(), ch);
        assert_eq!(decimate(&resp(vec![1.0; 6], 700.0), 10).unwrap().len(), 0);
        assert!(matches!(decimate(&ch, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn recording_validation() {
        let ch = || resp(vec![0.0; 10], 700.0);
        assert!(matches!(
            Recording::new("x".into(), vec![ch()], &[9; 10], 700.0),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            Recording::new("x".into(), vec![ch()], &[-1; 10], 700.0),
            Err(Error::Validation(_))
        ));
        assert!(Recording::new("x".into(), vec![ch()], &[1; 4], 700.0).is_err());
        assert!(Recording::new("x".into(), vec![ch(), ch()], &[1; 10], 700.0).is_err());
        assert!(Recording::new("x".into(), vec![ch()], &[1; 11], 700.0).is_ok());
    }

    #[test]
    fn channel_validation() {
        assert!(Channel::new(Modality::ChestAcc, 700.0, vec![vec![0.0; 3]]).is_err());
        assert!(Channel::new(
            Modality::ChestAcc,
            700.0,
            vec![vec![0.0; 3], vec![0.0; 3], vec![0.0; 2]]
        )
        .is_err());
        assert!(Channel::new(Modality::ChestEcg, 0.0, vec![vec![0.0]]).is_err());
        assert!(Channel::new(Modality::ChestEcg, 700.0, vec![vec![f32::NAN]]).is_err());
    }

    #[test]
    fn modality_names_round_trip() {
        for m in Modality::ALL {
            assert_eq!(m.name().parse::<Modality>().unwrap(), m);
        }
        assert_eq!(Modality::WristBvp.signal(), "BVP");
        assert!("chest.BVP".parse::<Modality>().is_err());
    }
}
