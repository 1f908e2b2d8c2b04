//! Neutral per-subject recording format.
//!
//! A subject directory holds `manifest.json`, one little-endian `f32` file
//! per channel (axis-major: every sample of axis 0, then axis 1, …) and
//! `labels.i32`, little-endian `i32` labels on the 700 Hz reference clock.
//! A data root may carry `index.json` listing the converted subjects.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sma_core::signal::{Channel, Modality, Recording};

use crate::error::{Result, SmaError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LABELS_FILE: &str = "labels.i32";
pub const INDEX_FILE: &str = "index.json";
pub const LABEL_RATE_HZ: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subject_id: String,
    #[serde(default = "default_label_rate")]
    pub label_rate: f64,
    pub channels: Vec<ManifestChannel>,
}

fn default_label_rate() -> f64 {
    LABEL_RATE_HZ
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestChannel {
    pub name: String,
    pub sample_rate: f64,
    pub axes: usize,
    pub sample_count: usize,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    pub subjects: Vec<String>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(SmaError::io(path))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    if !path.is_file() {
        return Err(SmaError::Format(format!("{} is missing", path.display())));
    }
    serde_json::from_slice(&read(&path)?).map_err(|e| SmaError::Format(format!("{}: {e}", path.display())))
}

fn decode_f32(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect()
}

pub fn load_recording(dir: &Path) -> Result<Recording> {
    let manifest = read_manifest(dir)?;
    let mut channels = Vec::with_capacity(manifest.channels.len());
    for entry in &manifest.channels {
        let modality: Modality = entry
            .name
            .parse()
            .map_err(|_| SmaError::Format(format!("{}: unknown channel {:?}", dir.display(), entry.name)))?;
        if entry.axes != modality.axes() {
            return Err(SmaError::Format(format!(
                "{}: {} declares {} axes",
                dir.display(),
                entry.name,
                entry.axes
            )));
        }
        let path = dir.join(&entry.file);
        let bytes = read(&path)?;
        let expected = 4 * entry.axes * entry.sample_count;
        if bytes.len() != expected {
            return Err(SmaError::Corruption(format!(
                "{}: {} bytes, manifest implies {expected}",
                path.display(),
                bytes.len()
            )));
        }
        let values = decode_f32(&bytes);
        let n = entry.sample_count;
        let samples = (0..entry.axes).map(|a| values[a * n..(a + 1) * n].to_vec()).collect();
        channels.push(Channel::new(modality, entry.sample_rate, samples)?);
    }
    let label_path = dir.join(LABELS_FILE);
    let bytes = read(&label_path)?;
    if bytes.len() % 4 != 0 {
        return Err(SmaError::Corruption(format!(
            "{}: length {} is not a multiple of 4",
            label_path.display(),
            bytes.len()
        )));
    }
    let labels: Vec<i32> = bytes
        .chunks_exact(4)
        .map(|b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok(Recording::new(
        manifest.subject_id,
        channels,
        &labels,
        manifest.label_rate,
    )?)
}

/// Writes `rec` in the neutral format, one `<name>.f32` file per channel.
pub fn write_recording(rec: &Recording, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(SmaError::io(dir))?;
    let mut entries = Vec::new();
    for ch in rec.channels() {
        let file = format!("{}.f32", ch.modality().name());
        let mut bytes = Vec::with_capacity(4 * ch.axes() * ch.len());
        for a in 0..ch.axes() {
            bytes.extend(ch.axis(a).iter().flat_map(|v| v.to_le_bytes()));
        }
        let path = dir.join(&file);
        fs::write(&path, bytes).map_err(SmaError::io(&path))?;
        entries.push(ManifestChannel {
            name: ch.modality().name().to_string(),
            sample_rate: ch.sample_rate(),
            axes: ch.axes(),
            sample_count: ch.len(),
            file,
        });
    }
    let labels: Vec<u8> = rec.labels().iter().flat_map(|&l| i32::from(l).to_le_bytes()).collect();
    let path = dir.join(LABELS_FILE);
    fs::write(&path, labels).map_err(SmaError::io(&path))?;
    let manifest = Manifest {
        subject_id: rec.subject_id().to_string(),
        label_rate: rec.label_rate(),
        channels: entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json).map_err(SmaError::io(&path))
}

/// Subject directories under `root`: the order of `index.json` when present,
/// otherwise every subdirectory holding a manifest, sorted by name.
pub fn subject_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        return Err(SmaError::MissingData(format!(
            "data root {} does not exist",
            root.display()
        )));
    }
    let index = root.join(INDEX_FILE);
    let dirs = if index.is_file() {
        let idx: Index = serde_json::from_slice(&read(&index)?)
            .map_err(|e| SmaError::Format(format!("{}: {e}", index.display())))?;
        idx.subjects.iter().map(|s| root.join(s)).collect()
    } else {
        let mut dirs: Vec<PathBuf> = fs::read_dir(root)
            .map_err(SmaError::io(root))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(MANIFEST_FILE).is_file())
            .collect();
        dirs.sort();
        dirs
    };
    if dirs.is_empty() {
        return Err(SmaError::MissingData(format!(
            "no converted subjects under {}",
            root.display()
        )));
    }
    Ok(dirs)
}

pub fn load_all(root: &Path) -> Result<Vec<Recording>> {
    subject_dirs(root)?.iter().map(|d| load_recording(d)).collect()
}
