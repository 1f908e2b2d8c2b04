//! Per-fold training and evaluation, aggregated into a run report.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::folds::{FoldPlan, PlanKind};
use crate::metrics::{accuracy, confusion, macro_f1, ConfusionMatrix};
use crate::model::{ResTcnConfig, ResTcnModel};
use crate::scalar::Real;
use crate::signal::{Modality, TaskKind, WindowedDataset};

/// Which experiment a report belongs to: subject identification, or emotion
/// classification with unseen subjects (generalized, leave-one-subject-out)
/// or with every subject partially seen (personalized, k-fold).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Identification,
    Generalized,
    Personalized,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Identification => "identification",
            Mode::Generalized => "generalized",
            Mode::Personalized => "personalized",
        }
    }

    pub fn infer(task: TaskKind, plan: PlanKind) -> Self {
        match (task, plan) {
            (TaskKind::Identification, _) => Mode::Identification,
            (_, PlanKind::Loso) => Mode::Generalized,
            (_, PlanKind::Kfold { .. }) => Mode::Personalized,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Mode::Identification, Mode::Generalized, Mode::Personalized]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Lookup(alloc::format!("unknown mode {s:?}")))
    }
}

/// Mean and sample (n − 1) standard deviation. A single sample has std 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Welford's single-pass update.
    pub fn from_samples(xs: &[f64]) -> Self {
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let delta = x - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (x - mean);
        }
        let std = if xs.len() > 1 {
            num_traits::Float::sqrt(m2 / (xs.len() - 1) as f64)
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub train_windows: usize,
    pub test_windows: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub final_loss: Option<f64>,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub modality: Modality,
    pub task: TaskKind,
    pub mode: Mode,
    pub plan: PlanKind,
    pub subjects: usize,
    pub windows: usize,
    pub folds: Vec<FoldMetrics>,
    pub accuracy: MeanStd,
    pub macro_f1: MeanStd,
}

/// Seed for fold `index` derived from the run seed.
pub fn fold_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

impl ResTcnConfig {
    /// Copy of this configuration sized for `ds` (input axes and classes).
    pub fn for_dataset(&self, ds: &WindowedDataset) -> Self {
        Self {
            in_channels: ds.axes().unwrap_or(self.in_channels),
            num_classes: ds.num_classes(),
            ..self.clone()
        }
    }
}

fn attach(index: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Fold {
        index,
        source: Box::new(e),
    }
}

/// Builds a model seeded for this fold, trains on the fold's train ids and
/// scores its test ids.
pub fn run_fold<T: Real>(
    ds: &WindowedDataset,
    plan: &FoldPlan,
    index: usize,
    config: &ResTcnConfig,
) -> Result<FoldMetrics> {
    let fold = plan
        .folds
        .get(index)
        .ok_or_else(|| Error::Lookup(alloc::format!("plan has no fold {index}")))?;
    let seed = fold_seed(config.seed, index);
    let cfg = ResTcnConfig { seed, ..config.clone() };
    let run = || -> Result<FoldMetrics> {
        let mut model = ResTcnModel::<T>::build(cfg)?;
        model.train_subset(ds, &fold.train, seed)?;
        let pred = model.predict_windows(ds, &fold.test)?;
        let truth: Vec<usize> = fold.test.iter().map(|&i| ds.windows()[i].label).collect();
        let cm = confusion(&truth, &pred.classes, ds.num_classes())?;
        Ok(FoldMetrics {
            fold: index,
            train_windows: fold.train.len(),
            test_windows: fold.test.len(),
            accuracy: accuracy(&cm)?,
            macro_f1: macro_f1(&cm),
            final_loss: model.meta.final_loss,
            confusion: cm,
        })
    };
    run().map_err(attach(index))
}

/// Aggregates per-fold metrics (in any order) into a report.
pub fn summarize(ds: &WindowedDataset, plan: &FoldPlan, mut folds: Vec<FoldMetrics>) -> Result<RunReport> {
    folds.sort_by_key(|f| f.fold);
    if folds.len() != plan.folds.len() || folds.iter().enumerate().any(|(i, f)| f.fold != i) {
        bail!(
            Validation,
            "{} fold results for a {}-fold plan",
            folds.len(),
            plan.folds.len()
        );
    }
    let acc: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let f1: Vec<f64> = folds.iter().map(|f| f.macro_f1).collect();
    Ok(RunReport {
        modality: ds.modality(),
        task: ds.task(),
        mode: Mode::infer(ds.task(), plan.kind),
        plan: plan.kind,
        subjects: ds.subjects().len(),
        windows: ds.len(),
        accuracy: MeanStd::from_samples(&acc),
        macro_f1: MeanStd::from_samples(&f1),
        folds,
    })
}

/// Runs every fold of `plan` sequentially.
pub fn run_experiment<T: Real>(ds: &WindowedDataset, plan: &FoldPlan, config: &ResTcnConfig) -> Result<RunReport> {
    plan.verify(ds)?;
    let folds = (0..plan.folds.len())
        .map(|i| run_fold::<T>(ds, plan, i, config))
        .collect::<Result<Vec<_>>>()?;
    summarize(ds, plan, folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_matches_two_pass() {
        let xs = [0.91, 0.97, 0.88, 1.0, 0.95];
        let s = MeanStd::from_samples(&xs);
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert!((s.mean - mean).abs() < 1e-12);
        assert!((s.std - var.sqrt()).abs() < 1e-12);
        assert_eq!(MeanStd::from_samples(&[0.5]).std, 0.0);
    }

    #[test]
    fn mode_follows_task_and_plan() {
        assert_eq!(
            Mode::infer(TaskKind::Identification, PlanKind::Kfold { k: 10 }),
            Mode::Identification
        );
        assert_eq!(Mode::infer(TaskKind::Emotion4, PlanKind::Loso), Mode::Generalized);
        assert_eq!(
            Mode::infer(TaskKind::StressBinary, PlanKind::Kfold { k: 10 }),
            Mode::Personalized
        );
    }

    #[test]
    fn fold_seeds_differ() {
        assert_eq!(fold_seed(42, 0), 42);
        assert_ne!(fold_seed(42, 1), fold_seed(42, 2));
    }
}
