//! Cross-validation fold plans over window ids.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::signal::WindowedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PlanKind {
    Kfold { k: usize },
    Loso,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub kind: PlanKind,
    pub folds: Vec<Fold>,
    pub seed: u64,
    /// Whether k-fold test sets were dealt per class.
    pub stratified: bool,
}

fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut in_test = vec![false; n];
    for &i in test {
        in_test[i] = true;
    }
    (0..n).filter(|&i| !in_test[i]).collect()
}

fn folds_from_assignment(n: usize, mut tests: Vec<Vec<usize>>) -> Vec<Fold> {
    tests
        .iter_mut()
        .map(|test| {
            test.sort_unstable();
            Fold {
                train: complement(n, test),
                test: core::mem::take(test),
            }
        })
        .collect()
}

/// Seeded k-fold split. When every class present has at least `k` windows,
/// ids are shuffled within each class and dealt round-robin so each fold
/// gets a near-equal share of every class; otherwise the shuffled ids are
/// cut into `k` contiguous runs.
pub fn plan_kfold(ds: &WindowedDataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        bail!(Argument, "k-fold needs k >= 2, got {k}");
    }
    let n = ds.len();
    if n < k {
        bail!(Argument, "{n} windows cannot fill {k} folds");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = ds.class_counts();
    let stratified = counts.iter().all(|&c| c == 0 || c >= k);
    let mut tests = vec![Vec::new(); k];
    if stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes()];
        for (i, w) in ds.windows().iter().enumerate() {
            by_class[w.label].push(i);
        }
        let mut pos = 0;
        for ids in &mut by_class {
            ids.shuffle(&mut rng);
            for &id in ids.iter() {
                tests[pos % k].push(id);
                pos += 1;
            }
        }
    } else {
        log::warn!("some class has fewer than {k} windows; falling back to unstratified k-fold");
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);
        let (base, extra) = (n / k, n % k);
        let mut start = 0;
        for (f, test) in tests.iter_mut().enumerate() {
            let size = base + usize::from(f >= k - extra);
            test.extend_from_slice(&ids[start..start + size]);
            start += size;
        }
    }
    Ok(FoldPlan {
        kind: PlanKind::Kfold { k },
        folds: folds_from_assignment(n, tests),
        seed,
        stratified,
    })
}

/// One fold per subject (sorted by id), holding out all of its windows.
pub fn plan_loso(ds: &WindowedDataset) -> Result<FoldPlan> {
    let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, w) in ds.windows().iter().enumerate() {
        by_subject.entry(w.subject_id.as_str()).or_default().push(i);
    }
    if by_subject.len() < 2 {
        bail!(
            Argument,
            "leave-one-subject-out needs >= 2 subjects, found {}",
            by_subject.len()
        );
    }
    let tests = by_subject.into_values().collect();
    Ok(FoldPlan {
        kind: PlanKind::Loso,
        folds: folds_from_assignment(ds.len(), tests),
        seed: 0,
        stratified: false,
    })
}

impl FoldPlan {
    /// Checks disjointness, coverage, k-fold size balance and, for LOSO,
    /// that each test set is exactly one subject's windows.
    pub fn verify(&self, ds: &WindowedDataset) -> Result<()> {
        let n = ds.len();
        let mut seen = vec![false; n];
        for (f, fold) in self.folds.iter().enumerate() {
            let mut in_fold = vec![0u8; n];
            for &i in &fold.test {
                if i >= n {
                    bail!(Validation, "fold {f}: test id {i} out of range");
                }
                if seen[i] {
                    bail!(Validation, "fold {f}: window {i} appears in two test sets");
                }
                seen[i] = true;
                in_fold[i] |= 1;
            }
            for &i in &fold.train {
                if i >= n {
                    bail!(Validation, "fold {f}: train id {i} out of range");
                }
                in_fold[i] |= 2;
            }
            if let Some(i) = in_fold.iter().position(|&m| m == 3) {
                bail!(Validation, "fold {f}: window {i} is in both train and test");
            }
            if let Some(i) = in_fold.iter().position(|&m| m == 0) {
                bail!(Validation, "fold {f}: window {i} is in neither train nor test");
            }
            if self.kind == PlanKind::Loso {
                let Some(&first) = fold.test.first() else {
                    bail!(Validation, "fold {f}: empty test set");
                };
                let subject = &ds.windows()[first].subject_id;
                let all_of_subject = ds
                    .windows()
                    .iter()
                    .enumerate()
                    .all(|(i, w)| (w.subject_id == *subject) == (in_fold[i] == 1));
                if !all_of_subject {
                    bail!(Validation, "fold {f}: test set is not exactly subject {subject}");
                }
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            bail!(Validation, "window {i} is never tested");
        }
        if let PlanKind::Kfold { k } = self.kind {
            if self.folds.len() != k {
                bail!(Validation, "plan has {} folds, expected {k}", self.folds.len());
            }
            let sizes = self.folds.iter().map(|f| f.test.len());
            let (lo, hi) = sizes
                .clone()
                .fold((usize::MAX, 0), |(lo, hi), s| (lo.min(s), hi.max(s)));
            if hi - lo > 1 {
                bail!(Validation, "k-fold test sizes range from {lo} to {hi}");
            }
        }
        Ok(())
    }
}
