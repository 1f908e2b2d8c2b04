//! Run configuration: one JSON file, every field defaulted, command-line
//! flags applied on top, and `SMA_DATA` overriding the data root.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sma_core::experiment::Mode;
use sma_core::model::ResTcnConfig;
use sma_core::risk::RiskMatrix;
use sma_core::signal::{Modality, TaskKind, WindowSpec};

use crate::error::{Result, SmaError};

pub const DATA_ENV: &str = "SMA_DATA";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub data_root: PathBuf,
    pub out: PathBuf,
    pub window_s: f64,
    pub stride_s: f64,
    /// Block-mean factor applied to chest channels only (700 Hz → 70 Hz at 10).
    pub decimation: usize,
    /// Architecture and optimiser settings. `in_channels` and `num_classes`
    /// are resized per dataset; `seed` is replaced by the top-level seed.
    pub model: ResTcnConfig,
    /// Emotion task used by the generalized and personalized runs.
    pub task: TaskKind,
    pub mode: Mode,
    pub modalities: Vec<Modality>,
    pub folds: usize,
    pub seed: u64,
    pub jobs: usize,
    pub risk: RiskMatrix,
}

impl Default for Config {
    fn default() -> Self {
        let spec = WindowSpec::default();
        Self {
            data_root: PathBuf::from("data/wesad-neutral"),
            out: PathBuf::from("out"),
            window_s: spec.window_s,
            stride_s: spec.stride_s,
            decimation: 10,
            model: ResTcnConfig::default(),
            task: TaskKind::Emotion4,
            mode: Mode::Personalized,
            modalities: Modality::ALL.to_vec(),
            folds: 10,
            seed: 42,
            jobs: 1,
            risk: RiskMatrix::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SmaError::Config(e.to_string()))
    }

    /// Reads `path` if given (defaults otherwise) and applies `SMA_DATA`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| SmaError::Config(format!("{}: {e}", p.display())))?;
                Self::from_json(&text).map_err(|e| match e {
                    SmaError::Config(msg) => SmaError::Config(format!("{}: {msg}", p.display())),
                    other => other,
                })?
            }
            None => Self::default(),
        };
        if let Some(root) = std::env::var_os(DATA_ENV).filter(|v| !v.is_empty()) {
            cfg.data_root = PathBuf::from(root);
        }
        Ok(cfg)
    }

    pub fn window_spec(&self) -> WindowSpec {
        WindowSpec {
            window_s: self.window_s,
            stride_s: self.stride_s,
        }
    }

    /// Model settings carrying the run seed.
    pub fn model_config(&self) -> ResTcnConfig {
        ResTcnConfig {
            seed: self.seed,
            ..self.model.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SmaError::Config(msg));
        if !(self.window_s > 0.0 && self.stride_s > 0.0) {
            return bad(format!(
                "window_s and stride_s must be positive ({} / {})",
                self.window_s, self.stride_s
            ));
        }
        if self.decimation == 0 {
            return bad("decimation must be >= 1".into());
        }
        if self.folds < 2 {
            return bad(format!("folds must be >= 2, got {}", self.folds));
        }
        if self.modalities.is_empty() {
            return bad("modalities must not be empty".into());
        }
        if self.task == TaskKind::Identification {
            return bad("task selects the emotion labelling; identification is a mode".into());
        }
        // num_classes is resized per dataset, so validate with a placeholder
        ResTcnConfig {
            num_classes: 2,
            ..self.model.clone()
        }
        .validate()
        .map_err(|e| SmaError::Config(e.to_string()))
    }
}
