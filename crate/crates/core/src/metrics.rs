//! Confusion matrices and the scores derived from them.
//!
//! Any 0/0 ratio (a class never predicted, never present) scores 0.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ConfusionMatrix {
    pub fn zeros(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let classes = rows.len();
        if rows.iter().any(|r| r.len() != classes) {
            bail!(Argument, "confusion matrix rows must all have {classes} entries");
        }
        Ok(Self {
            classes,
            counts: rows.concat(),
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    #[inline]
    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.classes.max(1)).map(<[u64]>::to_vec).collect()
    }

    /// Accumulates another matrix of the same size.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.classes != self.classes {
            bail!(
                Argument,
                "cannot merge {}-class and {}-class matrices",
                self.classes,
                other.classes
            );
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        Ok(())
    }
}

pub fn confusion(truth: &[usize], pred: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        bail!(Argument, "{} true labels but {} predictions", truth.len(), pred.len());
    }
    let mut cm = ConfusionMatrix::zeros(classes);
    for (&t, &p) in truth.iter().zip(pred) {
        if t >= classes || p >= classes {
            bail!(Argument, "class pair ({t}, {p}) out of range for {classes} classes");
        }
        cm.counts[t * classes + p] += 1;
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        bail!(Argument, "accuracy of an empty confusion matrix");
    }
    Ok(cm.trace() as f64 / total as f64)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One-vs-rest precision `TP/(TP+FP)`, recall `TP/(TP+FN)` and their
/// harmonic mean for class `c`.
pub fn precision_recall_f1(cm: &ConfusionMatrix, c: usize) -> Result<ClassScores> {
    if c >= cm.classes {
        bail!(Argument, "class {c} out of range for {} classes", cm.classes);
    }
    let tp = cm.get(c, c);
    let predicted: u64 = (0..cm.classes).map(|t| cm.get(t, c)).sum();
    let actual: u64 = (0..cm.classes).map(|p| cm.get(c, p)).sum();
    let precision = ratio(tp, predicted);
    let recall = ratio(tp, actual);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(ClassScores { precision, recall, f1 })
}

/// Unweighted mean of per-class F1 over all classes.
pub fn macro_f1(cm: &ConfusionMatrix) -> f64 {
    if cm.classes == 0 {
        return 0.0;
    }
    let sum: f64 = (0..cm.classes)
        .map(|c| precision_recall_f1(cm, c).map(|s| s.f1).unwrap_or(0.0))
        .sum();
    sum / cm.classes as f64
}
