mod common;

use std::process::{Command, Output};

fn sma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sma"))
        .args(args)
        .env_remove("SMA_DATA")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn risk_command_prints_the_level() {
    let o = sma(&["risk", "--impact", "high", "--accuracy", "0.998"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "high");
    assert_eq!(
        stdout(&sma(&["risk", "--impact", "low", "--accuracy", "0.95"])).trim(),
        "low"
    );
    assert_eq!(
        stdout(&sma(&["risk", "--impact", "low", "--accuracy", "0.8"])).trim(),
        "moderate"
    );
}

#[test]
fn gradcheck_command_passes() {
    let o = sma(&["gradcheck"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().last(), Some("PASS"));
}

#[test]
fn missing_data_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("nothing");
    let o = sma(&["convert-check", "--data", root.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error kind=missing_data code=2 "));
}

#[test]
fn bad_config_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"folds": 1}"#).unwrap();
    let o = sma(&["suite", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(&cfg, r#"{"epochs_typo": 3}"#).unwrap();
    assert_eq!(
        sma(&["suite", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(3)
    );
}

#[test]
fn convert_check_train_and_eval_on_neutral_data() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("data");
    common::write_root(&root, 3, 6.0);
    let cfg_path = dir.path().join("c.json");
    let mut cfg = common::tiny_config(&root, &dir.path().join("out"));
    cfg.modalities = vec![sma_core::signal::Modality::ChestResp];
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let c = cfg_path.to_str().unwrap();

    let o = sma(&["convert-check", "--config", c]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("ok subjects=3\n"));

    let o = sma(&["train", "--config", c]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ckpt = dir.path().join("out/chest.RESP_emotion4.rtcn");
    assert!(ckpt.is_file());

    let o = sma(&["eval", "--config", c, "--checkpoint", ckpt.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("accuracy="));

    let o = sma(&["eval", "--config", c, "--mode", "generalized"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("chest.RESP generalized folds=3 "));
    assert!(dir.path().join("out/run_chest.RESP_generalized.json").is_file());

    let o = sma(&[
        "eval",
        "--config",
        c,
        "--modality",
        "wrist.TEMP",
        "--mode",
        "identification",
    ]);
    assert!(o.status.success());
}
