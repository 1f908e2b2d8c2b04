mod common;

use sma::checkpoint::{decode, encode, load, save, MAGIC, VERSION};
use sma::SmaError;
use sma_core::model::ResTcnModel;
use sma_core::synthetic::spectral_classes;

fn trained() -> (ResTcnModel<f32>, sma_core::signal::WindowedDataset) {
    let ds = spectral_classes(3, 10, 32, 2, 5).unwrap();
    let cfg = common::tiny_model().for_dataset(&ds);
    let mut model = ResTcnModel::<f32>::build(cfg).unwrap();
    model.train(&ds, 9).unwrap();
    (model, ds)
}

#[test]
fn loaded_model_predicts_identically() {
    let (model, ds) = trained();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.rtcn");
    save(&model, &path).unwrap();
    let back = load(&path).unwrap();
    let ids: Vec<usize> = (0..ds.len()).collect();
    let a = model.predict_windows(&ds, &ids).unwrap();
    let b = back.predict_windows(&ds, &ids).unwrap();
    assert_eq!(a.classes, b.classes);
    assert_eq!(a.probabilities.data(), b.probabilities.data());
    assert_eq!(back.meta, model.meta);
    assert_eq!(back.config, model.config);
}

#[test]
fn save_load_save_is_byte_identical() {
    let (model, _) = trained();
    let first = encode(&model);
    let second = encode(&decode(&first).unwrap());
    assert_eq!(first, second);
    assert_eq!(&first[..4], MAGIC);
}

#[test]
fn future_version_is_rejected() {
    let (model, _) = trained();
    let mut bytes = encode(&model);
    bytes[4..8].copy_from_slice(&(VERSION + 1).to_le_bytes());
    assert!(matches!(decode(&bytes), Err(SmaError::Version { found, .. }) if found == VERSION + 1));
}

#[test]
fn every_truncation_is_corruption_or_format() {
    let (model, _) = trained();
    let bytes = encode(&model);
    for cut in (0..bytes.len()).step_by(7) {
        match decode(&bytes[..cut]) {
            Err(SmaError::Corruption(_) | SmaError::Format(_)) => {}
            other => panic!("cut at {cut}: {other:?}"),
        }
    }
    let mut long = bytes.clone();
    long.push(0);
    assert!(matches!(decode(&long), Err(SmaError::Corruption(_))));
}
