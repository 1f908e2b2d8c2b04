mod common;

use sma::report::{ordinal_findings, render_table, write_suite, SuiteReport};
use sma::runner::{build_dataset, plan_for, run_experiment, run_full_suite, SUITE_MODES};
use sma_core::experiment::Mode;
use sma_core::signal::{Modality, TaskKind};

#[test]
fn suite_covers_every_modality_and_mode() {
    let dirs = tempfile::tempdir().unwrap();
    let recs: Vec<_> = (0..3).map(|s| common::recording(s, 6.0)).collect();
    let cfg = common::tiny_config(dirs.path(), dirs.path());
    let report = run_full_suite(&recs, &cfg).unwrap();
    assert_eq!(report.runs.len(), 30);
    assert!(report.skipped.is_empty());
    assert_eq!(report.subjects, ["S2", "S3", "S4"]);
    for (i, run) in report.runs.iter().enumerate() {
        assert_eq!(run.modality, Modality::ALL[i / 3]);
        assert_eq!(run.mode, SUITE_MODES[i % 3]);
        let folds = if run.mode == Mode::Generalized { 3 } else { 2 };
        assert_eq!(run.folds.len(), folds, "{} {}", run.modality, run.mode);
        assert!((0.0..=1.0).contains(&run.accuracy.mean));
    }
    let ident = report.find(Modality::ChestResp, Mode::Identification).unwrap();
    assert_eq!(ident.task, TaskKind::Identification);
    assert_eq!(
        report.find(Modality::WristBvp, Mode::Generalized).unwrap().task,
        TaskKind::Emotion4
    );

    let text = render_table(&report);
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("Chest") || l.starts_with("Wrist"))
            .count(),
        20
    );
    assert_eq!(ordinal_findings(&report).len(), 10);
    assert!(ordinal_findings(&report).iter().all(|f| f.holds.is_some()));

    let json = report.to_json();
    assert_eq!(SuiteReport::from_json(&json).unwrap(), report);
    let path = write_suite(&report, &dirs.path().join("out"), 1).unwrap();
    assert_eq!(std::fs::read_to_string(path).unwrap(), json);
    assert!(dirs.path().join("out/suite.sidecar.json").is_file());
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let recs: Vec<_> = (0..3).map(|s| common::recording(s, 6.0)).collect();
    let mut cfg = common::tiny_config("/unused".as_ref(), "/unused".as_ref());
    let ds = build_dataset(
        &recs,
        Modality::WristBvp,
        TaskKind::Emotion4,
        cfg.window_spec(),
        cfg.decimation,
    )
    .unwrap();
    let plan = plan_for(Mode::Generalized, &ds, cfg.folds, cfg.seed).unwrap();
    let one = run_experiment(&ds, &plan, &cfg.model_config(), 1).unwrap();
    let three = run_experiment(&ds, &plan, &cfg.model_config(), 3).unwrap();
    assert_eq!(one, three);
    cfg.seed += 1;
    let other = run_experiment(&ds, &plan, &cfg.model_config(), 1).unwrap();
    assert_ne!(one.folds[0].final_loss, other.folds[0].final_loss);
}

#[test]
fn modality_missing_from_a_subject_is_skipped() {
    let mut recs: Vec<_> = (0..2).map(|s| common::recording(s, 6.0)).collect();
    let partial: Vec<Modality> = Modality::ALL.into_iter().filter(|&m| m != Modality::WristEda).collect();
    recs.push(common::recording_with(2, 6.0, &partial));
    let mut cfg = common::tiny_config("/unused".as_ref(), "/unused".as_ref());
    cfg.modalities = vec![Modality::ChestTemp, Modality::WristEda];
    let report = run_full_suite(&recs, &cfg).unwrap();
    assert_eq!(report.runs.len(), 3);
    assert_eq!(report.skipped.len(), 3);
    assert!(report
        .skipped
        .iter()
        .all(|s| s.modality == Modality::WristEda && s.reason.contains("S4")));
    assert!(render_table(&report).contains("skipped wrist.EDA"));
}

#[test]
fn chest_channels_are_decimated_and_wrist_channels_are_not() {
    let recs: Vec<_> = (0..2).map(|s| common::recording(s, 6.0)).collect();
    let spec = common::tiny_config("/".as_ref(), "/".as_ref()).window_spec();
    let chest = build_dataset(&recs, Modality::ChestEcg, TaskKind::Emotion4, spec, 10).unwrap();
    assert_eq!(chest.window_len(), Some(350));
    let wrist = build_dataset(&recs, Modality::WristBvp, TaskKind::Emotion4, spec, 10).unwrap();
    assert_eq!(wrist.window_len(), Some(320));
    let ident = build_dataset(&recs, Modality::WristAcc, TaskKind::Identification, spec, 10).unwrap();
    assert_eq!(ident.num_classes(), 2);
    assert_eq!(ident.axes(), Some(3));
}

#[test]
fn schema_mismatch_is_rejected() {
    let text = r#"{"schema_version": 2, "subjects": [], "settings": null, "runs": [], "skipped": []}"#;
    assert!(SuiteReport::from_json(text).is_err());
}
