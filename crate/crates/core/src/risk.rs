//! E-coaching risk as an ordinal function of impact and the probability
//! that the stress detector is right.
//!
//! The detector's accuracy is mapped to a probability band (band 0 is the
//! most reliable) and the band is combined with the impact through a 3×3
//! table.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskLevel {
    Low = 0,
    Moderate = 1,
    High = 2,
}

impl RiskLevel {
    pub const ALL: [RiskLevel; 3] = [RiskLevel::Low, RiskLevel::Moderate, RiskLevel::High];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(v: usize) -> Option<Self> {
        Self::ALL.get(v).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            RiskLevel::Low => "low",
            RiskLevel::Moderate => "moderate",
            RiskLevel::High => "high",
        }
    }
}

impl fmt::Display for RiskLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RiskLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Argument(alloc::format!("unknown risk level {s:?}")))
    }
}

/// `table[impact][band]`; thresholds `(t1, t2)` split accuracy into
/// `[0, t1)` → band 2, `[t1, t2)` → band 1, `[t2, 1]` → band 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRiskMatrix")]
pub struct RiskMatrix {
    thresholds: [f64; 2],
    table: [[RiskLevel; 3]; 3],
}

#[derive(Deserialize)]
struct RawRiskMatrix {
    thresholds: [f64; 2],
    table: [[RiskLevel; 3]; 3],
}

impl TryFrom<RawRiskMatrix> for RiskMatrix {
    type Error = Error;

    fn try_from(raw: RawRiskMatrix) -> Result<Self> {
        RiskMatrix::new(raw.thresholds, raw.table)
    }
}

impl Default for RiskMatrix {
    /// Thresholds 0.7 / 0.9; cell = max(impact, band as level).
    fn default() -> Self {
        let mut table = [[RiskLevel::Low; 3]; 3];
        for (i, row) in table.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                *cell = RiskLevel::ALL[i.max(b)];
            }
        }
        Self {
            thresholds: [0.7, 0.9],
            table,
        }
    }
}

impl RiskMatrix {
    pub fn new(thresholds: [f64; 2], table: [[RiskLevel; 3]; 3]) -> Result<Self> {
        let [t1, t2] = thresholds;
        if !(0.0 < t1 && t1 < t2 && t2 < 1.0) {
            bail!(Argument, "thresholds must satisfy 0 < t1 < t2 < 1, got {t1}, {t2}");
        }
        for i in 0..3 {
            for b in 0..3 {
                if (i > 0 && table[i][b] < table[i - 1][b]) || (b > 0 && table[i][b] < table[i][b - 1]) {
                    bail!(
                        Argument,
                        "risk table must be nondecreasing in impact and band (cell {i},{b})"
                    );
                }
            }
        }
        Ok(Self { thresholds, table })
    }

    pub fn thresholds(&self) -> [f64; 2] {
        self.thresholds
    }

    pub fn table(&self) -> &[[RiskLevel; 3]; 3] {
        &self.table
    }
}

pub fn band(prob: f64, matrix: &RiskMatrix) -> Result<usize> {
    if !(0.0..=1.0).contains(&prob) {
        bail!(Argument, "probability must lie in [0, 1], got {prob}");
    }
    let [t1, t2] = matrix.thresholds;
    Ok(if prob < t1 {
        2
    } else if prob < t2 {
        1
    } else {
        0
    })
}

pub fn assess(impact: RiskLevel, prob: f64, matrix: &RiskMatrix) -> Result<RiskLevel> {
    Ok(matrix.table[impact.ordinal()][band(prob, matrix)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_with_default_thresholds() {
        let m = RiskMatrix::default();
        assert_eq!(band(0.998, &m).unwrap(), 0);
        assert_eq!(band(0.0, &m).unwrap(), 2);
        assert_eq!(band(0.9, &m).unwrap(), 0);
        assert_eq!(band(0.7, &m).unwrap(), 1);
        assert_eq!(band(0.6999, &m).unwrap(), 2);
        assert!(band(1.01, &m).is_err());
        assert!(band(-0.1, &m).is_err());
        assert!(band(f64::NAN, &m).is_err());
    }

    #[test]
    fn default_table_is_max() {
        let m = RiskMatrix::default();
        assert_eq!(assess(RiskLevel::Low, 0.99, &m).unwrap(), RiskLevel::Low);
        assert_eq!(assess(RiskLevel::Moderate, 0.5, &m).unwrap(), RiskLevel::High);
        for p in [0.0, 0.75, 0.998, 1.0] {
            assert_eq!(assess(RiskLevel::High, p, &m).unwrap(), RiskLevel::High);
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        let t = *RiskMatrix::default().table();
        assert!(RiskMatrix::new([0.9, 0.7], t).is_err());
        assert!(RiskMatrix::new([0.0, 0.7], t).is_err());
        let mut bad = t;
        bad[2][2] = RiskLevel::Low;
        assert!(RiskMatrix::new([0.7, 0.9], bad).is_err());
    }
}
