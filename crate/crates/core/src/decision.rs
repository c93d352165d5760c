//! Turning anomaly scores into labels: a fixed threshold, or two-cluster
//! k-means over the scores with the higher-mean cluster flagged.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Normal,
    Anomaly,
}

impl Label {
    pub fn is_anomaly(self) -> bool {
        self == Label::Anomaly
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionMode {
    Threshold,
    KMeans,
}

impl fmt::Display for DecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecisionMode::Threshold => "threshold",
            DecisionMode::KMeans => "kmeans",
        })
    }
}

impl FromStr for DecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "threshold" => Ok(DecisionMode::Threshold),
            "kmeans" => Ok(DecisionMode::KMeans),
            other => Err(Error::invalid(format!("unknown decision mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionModel {
    /// Anomaly iff `score > threshold`.
    Threshold { threshold: f64 },
    /// Anomaly iff the score is strictly closer to `anomaly_mean`.
    KMeans { normal_mean: f64, anomaly_mean: f64 },
}

impl DecisionModel {
    pub fn threshold(threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        Ok(DecisionModel::Threshold { threshold })
    }

    pub fn mode(&self) -> DecisionMode {
        match self {
            DecisionModel::Threshold { .. } => DecisionMode::Threshold,
            DecisionModel::KMeans { .. } => DecisionMode::KMeans,
        }
    }

    /// Equidistant scores resolve to normal.
    pub fn assign(&self, score: f64) -> Label {
        let anomalous = match *self {
            DecisionModel::Threshold { threshold } => score > threshold,
            DecisionModel::KMeans {
                normal_mean,
                anomaly_mean,
            } => (score - anomaly_mean).abs() < (score - normal_mean).abs(),
        };
        if anomalous {
            Label::Anomaly
        } else {
            Label::Normal
        }
    }

    pub fn assign_all(&self, scores: &[f64]) -> Vec<Label> {
        scores.iter().map(|&s| self.assign(s)).collect()
    }

    /// Fits a model of the requested mode on in-sample scores. K-means on
    /// constant scores falls back to the threshold rule.
    pub fn fit(mode: DecisionMode, scores: &[f64], threshold: f64) -> Result<Self> {
        match mode {
            DecisionMode::Threshold => Self::threshold(threshold),
            DecisionMode::KMeans => match fit_kmeans2(scores) {
                Err(Error::DegenerateScores) => Self::threshold(threshold),
                other => other,
            },
        }
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "threshold {threshold} is outside (0, 1)"
        )))
    }
}

pub fn label_threshold(scores: &[f64], threshold: f64) -> Result<Vec<Label>> {
    Ok(DecisionModel::threshold(threshold)?.assign_all(scores))
}

/// Two-cluster k-means on scalar scores.
///
/// In one dimension an optimal 2-means partition is a cut of the sorted
/// scores, so every cut is scanned and the one with the largest
/// between-cluster separation `k (n-k) (m_lo - m_hi)^2` (equivalently, the
/// smallest within-cluster sum of squares) is kept. The result is the
/// global optimum and hence a fixed point of Lloyd iterations. The first
/// cut wins ties.
pub fn fit_kmeans2(scores: &[f64]) -> Result<DecisionModel> {
    if scores.len() < 2 {
        return Err(Error::invalid("2-means needs at least two scores"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("scores must be finite"));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateScores);
    }

    let n = sorted.len();
    let total: f64 = sorted.iter().sum();
    let mut prefix = 0.0;
    let mut best: Option<(f64, f64, f64)> = None;
    for k in 1..n {
        prefix += sorted[k - 1];
        let lo_mean = prefix / k as f64;
        let hi_mean = (total - prefix) / (n - k) as f64;
        let gap = lo_mean - hi_mean;
        let separation = (k as f64) * ((n - k) as f64) * gap * gap;
        if best.is_none_or(|(s, _, _)| separation > s) {
            best = Some((separation, lo_mean, hi_mean));
        }
    }
    let (_, normal_mean, anomaly_mean) = best.expect("n >= 2 gives at least one cut");
    Ok(DecisionModel::KMeans {
        normal_mean,
        anomaly_mean,
    })
}
