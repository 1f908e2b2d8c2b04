//! Dataset assembly and fold-parallel experiment execution.

use rayon::prelude::*;
use sma_core::experiment::{run_fold, summarize, Mode, RunReport};
use sma_core::folds::{plan_kfold, plan_loso, FoldPlan};
use sma_core::model::ResTcnConfig;
use sma_core::signal::{decimate, make_windows, Modality, Recording, Task, TaskKind, WindowSpec, WindowedDataset};

use crate::config::Config;
use crate::error::{Result, SmaError};
use crate::report::{Skipped, SuiteReport, SuiteSettings, SCHEMA_VERSION};

/// Pools one modality of every recording into a dataset. Chest channels are
/// decimated by `decimation` first; identification classes follow the
/// order of `recordings`.
pub fn build_dataset(
    recordings: &[Recording],
    modality: Modality,
    task: TaskKind,
    spec: WindowSpec,
    decimation: usize,
) -> Result<WindowedDataset> {
    if recordings.is_empty() {
        return Err(SmaError::MissingData("no recordings".into()));
    }
    let parts = recordings
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let task = match task {
                TaskKind::Identification => Task::Identification {
                    subject_index: i,
                    subject_count: recordings.len(),
                },
                TaskKind::Emotion4 => Task::Emotion4,
                TaskKind::StressBinary => Task::StressBinary,
            };
            let ch = rec.channel(modality)?;
            if modality.is_chest() && decimation > 1 {
                let rec = rec.clone().with_channel(decimate(ch, decimation)?)?;
                make_windows(&rec, modality, spec, task)
            } else {
                make_windows(rec, modality, spec, task)
            }
        })
        .collect::<sma_core::Result<Vec<_>>>()?;
    let ds = WindowedDataset::pool(parts)?;
    if ds.is_empty() {
        return Err(SmaError::MissingData(format!("{modality}: no labelled windows")));
    }
    Ok(ds)
}

/// Identification and personalized runs use seeded k-fold, generalized runs
/// leave one subject out.
pub fn plan_for(mode: Mode, ds: &WindowedDataset, folds: usize, seed: u64) -> Result<FoldPlan> {
    let plan = match mode {
        Mode::Generalized => plan_loso(ds)?,
        Mode::Identification | Mode::Personalized => plan_kfold(ds, folds, seed)?,
    };
    plan.verify(ds)?;
    Ok(plan)
}

/// Runs every fold on a pool of `jobs` threads. Results do not depend on
/// `jobs`: each fold derives its own seed and runs single-threaded.
pub fn run_experiment(ds: &WindowedDataset, plan: &FoldPlan, config: &ResTcnConfig, jobs: usize) -> Result<RunReport> {
    plan.verify(ds)?;
    let config = config.for_dataset(ds);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SmaError::Config(format!("thread pool: {e}")))?;
    let folds = pool.install(|| {
        (0..plan.folds.len())
            .into_par_iter()
            .map(|i| run_fold::<f32>(ds, plan, i, &config))
            .collect::<sma_core::Result<Vec<_>>>()
    })?;
    Ok(summarize(ds, plan, folds)?)
}

pub fn task_for(mode: Mode, emotion_task: TaskKind) -> TaskKind {
    match mode {
        Mode::Identification => TaskKind::Identification,
        Mode::Generalized | Mode::Personalized => emotion_task,
    }
}

/// One modality under one mode, end to end.
pub fn run_mode(recordings: &[Recording], modality: Modality, mode: Mode, cfg: &Config) -> Result<RunReport> {
    let ds = build_dataset(
        recordings,
        modality,
        task_for(mode, cfg.task),
        cfg.window_spec(),
        cfg.decimation,
    )?;
    let plan = plan_for(mode, &ds, cfg.folds, cfg.seed)?;
    run_experiment(&ds, &plan, &cfg.model_config(), cfg.jobs)
}

pub const SUITE_MODES: [Mode; 3] = [Mode::Identification, Mode::Generalized, Mode::Personalized];

/// Every configured modality (in report order) under identification,
/// generalized and personalized modes. A modality missing from any
/// recording is skipped with a note instead of failing the suite.
pub fn run_full_suite(recordings: &[Recording], cfg: &Config) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut runs = Vec::new();
    let mut skipped = Vec::new();
    for modality in Modality::ALL.into_iter().filter(|m| cfg.modalities.contains(m)) {
        if let Some(rec) = recordings.iter().find(|r| r.channel(modality).is_err()) {
            let reason = format!("subject {} has no {modality} channel", rec.subject_id());
            log::warn!("skipping {modality}: {reason}");
            skipped.extend(SUITE_MODES.iter().map(|&mode| Skipped {
                modality,
                mode,
                reason: reason.clone(),
            }));
            continue;
        }
        for mode in SUITE_MODES {
            log::info!("running {modality} / {mode}");
            runs.push(run_mode(recordings, modality, mode, cfg)?);
        }
    }
    Ok(SuiteReport {
        schema_version: SCHEMA_VERSION,
        subjects: recordings.iter().map(|r| r.subject_id().to_string()).collect(),
        settings: SuiteSettings::from_config(cfg),
        runs,
        skipped,
    })
}
