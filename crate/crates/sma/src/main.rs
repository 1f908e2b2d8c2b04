use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sma::checkpoint;
use sma::config::Config;
use sma::io::{load_all, load_recording, subject_dirs};
use sma::report::{ordinal_findings, render_table, write_run, write_suite};
use sma::runner::{build_dataset, run_full_suite, run_mode, task_for};
use sma::{Result, SmaError};
use sma_core::experiment::Mode;
use sma_core::gradcheck::run_suite;
use sma_core::metrics::{accuracy, confusion, macro_f1};
use sma_core::model::ResTcnModel;
use sma_core::risk::{assess, RiskLevel};
use sma_core::signal::{Modality, TaskKind};

#[derive(Parser)]
#[command(
    name = "sma",
    version,
    about = "Stress monitoring assistant: Res-TCN training, evaluation and risk scoring"
)]
struct Cli {
    /// JSON configuration file; every field is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Neutral-format data root (SMA_DATA takes precedence over the config).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    modality: Option<Modality>,
    /// Emotion labelling for generalized and personalized runs.
    #[arg(long, global = true)]
    task: Option<TaskKind>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Folds trained concurrently; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load every subject and print what was found.
    ConvertCheck,
    /// Train on all windows of one modality and save a checkpoint.
    Train,
    /// Cross-validate one modality, or score a checkpoint on the whole dataset.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Every modality under identification, generalized and personalized modes.
    Suite,
    /// Map an impact level and a model accuracy to a risk level.
    Risk {
        #[arg(long)]
        impact: RiskLevel,
        #[arg(long)]
        accuracy: f64,
    },
    /// Finite-difference check of every analytic gradient.
    Gradcheck,
}

fn settings(cli: &Cli) -> Result<Config> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(d) = &cli.data {
        if std::env::var_os(sma::config::DATA_ENV).is_none_or(|v| v.is_empty()) {
            cfg.data_root = d.clone();
        }
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(t) = cli.task {
        cfg.task = t;
    }
    if let Some(m) = cli.mode {
        cfg.mode = m;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = cli.modality {
        cfg.modalities = vec![m];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn single_modality(cfg: &Config) -> Result<Modality> {
    match cfg.modalities.as_slice() {
        [m] => Ok(*m),
        _ => Err(SmaError::Config("choose one signal with --modality".into())),
    }
}

fn checkpoint_path(out: &Path, modality: Modality, task: TaskKind) -> PathBuf {
    out.join(format!("{}_{}.rtcn", modality.name(), task.name()))
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Risk { impact, accuracy } => {
            let cfg = Config::load(cli.config.as_deref())?;
            println!("{}", assess(*impact, *accuracy, &cfg.risk)?);
        }
        Command::Gradcheck => {
            let suite = run_suite(cli.seed.unwrap_or(42))?;
            for c in &suite.checks {
                let verdict = if c.passed() { "ok" } else { "FAIL" };
                println!(
                    "{:<28} entries={:<5} max_rel={:.3e} tol={:.0e} {verdict}",
                    c.name, c.entries, c.max_rel_error, c.tolerance
                );
            }
            if !suite.passed() {
                return Err(SmaError::Core(sma_core::Error::Validation(format!(
                    "gradient check failed (max relative error {:.3e})",
                    suite.max_rel_error()
                ))));
            }
            println!("PASS");
        }
        Command::ConvertCheck => {
            let cfg = settings(&cli)?;
            let dirs = subject_dirs(&cfg.data_root)?;
            for dir in &dirs {
                let rec = load_recording(dir)?;
                let labelled = rec.labels().iter().filter(|&&l| (1..=4).contains(&l)).count();
                let names: Vec<&str> = rec.channels().iter().map(|c| c.modality().name()).collect();
                println!(
                    "{} duration_s={:.1} labelled_s={:.1} channels={}",
                    rec.subject_id(),
                    rec.labels().len() as f64 / rec.label_rate(),
                    labelled as f64 / rec.label_rate(),
                    names.join(",")
                );
            }
            println!("ok subjects={}", dirs.len());
        }
        Command::Train => {
            let cfg = settings(&cli)?;
            let modality = single_modality(&cfg)?;
            let task = task_for(cfg.mode, cfg.task);
            let recs = load_all(&cfg.data_root)?;
            let ds = build_dataset(&recs, modality, task, cfg.window_spec(), cfg.decimation)?;
            let mut model = ResTcnModel::<f32>::build(cfg.model_config().for_dataset(&ds))?;
            let losses = model.train(&ds, cfg.seed)?;
            let path = checkpoint_path(&cfg.out, modality, task);
            checkpoint::save(&model, &path)?;
            println!(
                "saved {} windows={} epochs={} final_loss={}",
                path.display(),
                ds.len(),
                losses.len(),
                losses.last().map_or("n/a".into(), |l| format!("{l:.6}"))
            );
        }
        Command::Eval { checkpoint: Some(path) } => {
            let cfg = settings(&cli)?;
            let modality = single_modality(&cfg)?;
            let model = checkpoint::load(path)?;
            let recs = load_all(&cfg.data_root)?;
            let ds = build_dataset(
                &recs,
                modality,
                task_for(cfg.mode, cfg.task),
                cfg.window_spec(),
                cfg.decimation,
            )?;
            let ids: Vec<usize> = (0..ds.len()).collect();
            let pred = model.predict_windows(&ds, &ids)?;
            let cm = confusion(&ds.labels(), &pred.classes, ds.num_classes())?;
            println!(
                "windows={} accuracy={:.4} macro_f1={:.4}",
                ds.len(),
                accuracy(&cm)?,
                macro_f1(&cm)
            );
        }
        Command::Eval { checkpoint: None } => {
            let cfg = settings(&cli)?;
            let modality = single_modality(&cfg)?;
            let recs = load_all(&cfg.data_root)?;
            let report = run_mode(&recs, modality, cfg.mode, &cfg)?;
            let path = write_run(&report, &cfg.out)?;
            println!(
                "{} {} folds={} accuracy={:.4}±{:.4} macro_f1={:.4}±{:.4} report={}",
                modality,
                cfg.mode,
                report.folds.len(),
                report.accuracy.mean,
                report.accuracy.std,
                report.macro_f1.mean,
                report.macro_f1.std,
                path.display()
            );
        }
        Command::Suite => {
            let cfg = settings(&cli)?;
            let recs = load_all(&cfg.data_root)?;
            let report = run_full_suite(&recs, &cfg)?;
            let path = write_suite(&report, &cfg.out, cfg.jobs)?;
            print!("{}", render_table(&report));
            for f in ordinal_findings(&report) {
                let verdict = match f.holds {
                    Some(true) => "holds",
                    Some(false) => "does not hold",
                    None => "not evaluated",
                };
                println!("finding: {} {verdict}", f.name);
            }
            println!("report={}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error kind={} code={} message={msg}", e.kind(), e.exit_code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
