//! Suite reports: a deterministic JSON document, a plain-text table laid
//! out like the identification and emotion tables, and the ordinal
//! findings the results are expected to reproduce.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sma_core::experiment::{MeanStd, Mode, RunReport};
use sma_core::model::ResTcnConfig;
use sma_core::signal::{Modality, TaskKind};

use crate::config::Config;
use crate::error::{Result, SmaError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSettings {
    pub window_s: f64,
    pub stride_s: f64,
    pub decimation: usize,
    pub folds: usize,
    pub seed: u64,
    pub emotion_task: TaskKind,
    pub model: ResTcnConfig,
}

impl SuiteSettings {
    pub fn from_config(cfg: &Config) -> Self {
        Self {
            window_s: cfg.window_s,
            stride_s: cfg.stride_s,
            decimation: cfg.decimation,
            folds: cfg.folds,
            seed: cfg.seed,
            emotion_task: cfg.task,
            model: cfg.model_config(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Skipped {
    pub modality: Modality,
    pub mode: Mode,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteReport {
    pub schema_version: u32,
    /// Roster actually used; its length is the reported subject count.
    pub subjects: Vec<String>,
    pub settings: SuiteSettings,
    pub runs: Vec<RunReport>,
    pub skipped: Vec<Skipped>,
}

/// Run metadata kept out of the deterministic report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub generated_at_unix_s: u64,
    pub jobs: usize,
    pub report: PathBuf,
}

impl SuiteReport {
    pub fn find(&self, modality: Modality, mode: Mode) -> Option<&RunReport> {
        self.runs.iter().find(|r| r.modality == modality && r.mode == mode)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text).map_err(|e| SmaError::Format(format!("suite report: {e}")))?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(SmaError::Format(format!(
                "suite report schema {} (expected {SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }
}

fn pct(m: &MeanStd) -> String {
    format!("{:6.2} ± {:5.2}", 100.0 * m.mean, 100.0 * m.std)
}

fn cells(run: Option<&RunReport>) -> (String, String) {
    match run {
        Some(r) => (pct(&r.accuracy), pct(&r.macro_f1)),
        None => ("-".into(), "-".into()),
    }
}

/// Two aligned tables (identification; generalized vs personalized
/// emotion), rows in chest ACC…TEMP then wrist ACC…TEMP order.
pub fn render_table(report: &SuiteReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Subjects: {} | window {} s, stride {} s, chest decimation {}",
        report.subjects.len(),
        report.settings.window_s,
        report.settings.stride_s,
        report.settings.decimation
    );
    let _ = writeln!(out, "\nSubject identification ({}-fold)", report.settings.folds);
    let _ = writeln!(
        out,
        "{:<6} {:<5} | {:>15} | {:>15}",
        "Site", "Signal", "Accuracy", "F1-score"
    );
    let _ = writeln!(out, "{}", "-".repeat(48));
    for m in Modality::ALL {
        let (acc, f1) = cells(report.find(m, Mode::Identification));
        let site = if m.is_chest() { "Chest" } else { "Wrist" };
        let _ = writeln!(out, "{:<6} {:<5} | {:>15} | {:>15}", site, m.signal(), acc, f1);
    }
    let _ = writeln!(out, "\nEmotion classification ({})", report.settings.emotion_task);
    let _ = writeln!(
        out,
        "{:<6} {:<5} | {:>15} | {:>15} | {:>15} | {:>15}",
        "Site", "Signal", "Gen. accuracy", "Gen. F1", "Pers. accuracy", "Pers. F1"
    );
    let _ = writeln!(out, "{}", "-".repeat(84));
    for m in Modality::ALL {
        let (ga, gf) = cells(report.find(m, Mode::Generalized));
        let (pa, pf) = cells(report.find(m, Mode::Personalized));
        let site = if m.is_chest() { "Chest" } else { "Wrist" };
        let _ = writeln!(
            out,
            "{:<6} {:<5} | {:>15} | {:>15} | {:>15} | {:>15}",
            site,
            m.signal(),
            ga,
            gf,
            pa,
            pf
        );
    }
    for s in &report.skipped {
        let _ = writeln!(out, "skipped {} / {}: {}", s.modality, s.mode, s.reason);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub name: String,
    /// `None` when a required run is missing from the report.
    pub holds: Option<bool>,
}

fn acc(report: &SuiteReport, m: Modality, mode: Mode) -> Option<f64> {
    report.find(m, mode).map(|r| r.accuracy.mean)
}

fn best_of(report: &SuiteReport, site: &[Modality], mode: Mode) -> Option<Modality> {
    let scores: Option<Vec<(Modality, f64)>> = site.iter().map(|&m| acc(report, m, mode).map(|a| (m, a))).collect();
    scores?.into_iter().max_by(|a, b| a.1.total_cmp(&b.1)).map(|(m, _)| m)
}

fn worst_of(report: &SuiteReport, site: &[Modality], mode: Mode) -> Option<Modality> {
    let scores: Option<Vec<(Modality, f64)>> = site.iter().map(|&m| acc(report, m, mode).map(|a| (m, a))).collect();
    scores?.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|(m, _)| m)
}

/// RESP best on the chest and BVP best on the wrist in every mode, TEMP the
/// worst identifier at both sites, personalized at least as accurate as
/// generalized for RESP and BVP.
pub fn ordinal_findings(report: &SuiteReport) -> Vec<Finding> {
    let chest: Vec<Modality> = Modality::ALL.into_iter().filter(|m| m.is_chest()).collect();
    let wrist: Vec<Modality> = Modality::ALL.into_iter().filter(|m| !m.is_chest()).collect();
    let mut out = Vec::new();
    for mode in [Mode::Identification, Mode::Generalized, Mode::Personalized] {
        out.push(Finding {
            name: format!("chest.RESP best chest signal ({mode})"),
            holds: best_of(report, &chest, mode).map(|m| m == Modality::ChestResp),
        });
        out.push(Finding {
            name: format!("wrist.BVP best wrist signal ({mode})"),
            holds: best_of(report, &wrist, mode).map(|m| m == Modality::WristBvp),
        });
    }
    out.push(Finding {
        name: "chest.TEMP worst chest identifier".into(),
        holds: worst_of(report, &chest, Mode::Identification).map(|m| m == Modality::ChestTemp),
    });
    out.push(Finding {
        name: "wrist.TEMP worst wrist identifier".into(),
        holds: worst_of(report, &wrist, Mode::Identification).map(|m| m == Modality::WristTemp),
    });
    for m in [Modality::ChestResp, Modality::WristBvp] {
        out.push(Finding {
            name: format!("{m} personalized >= generalized"),
            holds: acc(report, m, Mode::Personalized)
                .zip(acc(report, m, Mode::Generalized))
                .map(|(p, g)| p >= g),
        });
    }
    out
}

/// Writes `suite.json`, `suite.txt` and the `suite.sidecar.json` metadata
/// under `dir`, returning the JSON path.
pub fn write_suite(report: &SuiteReport, dir: &Path, jobs: usize) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(SmaError::io(dir))?;
    let json_path = dir.join("suite.json");
    fs::write(&json_path, report.to_json()).map_err(SmaError::io(&json_path))?;
    let txt = dir.join("suite.txt");
    fs::write(&txt, render_table(report)).map_err(SmaError::io(&txt))?;
    let sidecar = Sidecar {
        generated_at_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        jobs,
        report: json_path.clone(),
    };
    let side = dir.join("suite.sidecar.json");
    fs::write(
        &side,
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"),
    )
    .map_err(SmaError::io(&side))?;
    Ok(json_path)
}

pub fn write_run(report: &RunReport, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(SmaError::io(dir))?;
    let path = dir.join(format!("run_{}_{}.json", report.modality.name(), report.mode.name()));
    let json = serde_json::to_string_pretty(report).expect("run report serializes");
    fs::write(&path, json).map_err(SmaError::io(&path))?;
    Ok(path)
}
