//! Performance measures. All of them are minimized.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Task;
use crate::error::{Error, Result};

const LOGLOSS_EPS: f64 = 1e-15;

/// Row-major `n × k` matrix of class probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMatrix {
    n_classes: usize,
    data: Vec<f64>,
}

impl ProbMatrix {
    pub fn new(n_classes: usize, data: Vec<f64>) -> Result<Self> {
        if n_classes == 0 || !data.len().is_multiple_of(n_classes) {
            return Err(Error::invalid(format!(
                "{} probabilities do not form rows of {n_classes}",
                data.len()
            )));
        }
        Ok(ProbMatrix { n_classes, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("ragged probability rows"));
        }
        Self::new(k, rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.n_classes
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_classes..(i + 1) * self.n_classes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_classes)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Probability of the last class per row (the positive class for binary tasks).
    pub fn positive(&self) -> Vec<f64> {
        self.rows().map(|r| r[self.n_classes - 1]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Mean misclassification error.
    Mmce,
    Logloss,
    Rmse,
}

/// What a measure consumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Requirement {
    Labels,
    Probabilities,
    Numeric,
}

impl Measure {
    pub fn requires(self) -> Requirement {
        match self {
            Measure::Mmce => Requirement::Labels,
            Measure::Logloss => Requirement::Probabilities,
            Measure::Rmse => Requirement::Numeric,
        }
    }

    pub fn default_for(task: Task) -> Measure {
        if task.is_classification() {
            Measure::Mmce
        } else {
            Measure::Rmse
        }
    }

    /// Whether a model for `task` produces what this measure consumes.
    pub fn applies_to(self, task: Task) -> bool {
        match self.requires() {
            Requirement::Labels | Requirement::Probabilities => task.is_classification(),
            Requirement::Numeric => !task.is_classification(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Mmce => "mmce",
            Measure::Logloss => "logloss",
            Measure::Rmse => "rmse",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmce" => Ok(Measure::Mmce),
            "logloss" => Ok(Measure::Logloss),
            "rmse" => Ok(Measure::Rmse),
            other => Err(Error::invalid(format!("unknown measure {other:?}"))),
        }
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!("length mismatch: {a} vs {b}")));
    }
    if a == 0 {
        return Err(Error::invalid("empty input"));
    }
    Ok(())
}

/// Fraction of positions where `predicted` and `truth` differ.
pub fn mmce<T: PartialEq>(predicted: &[T], truth: &[T]) -> Result<f64> {
    check_lengths(predicted.len(), truth.len())?;
    let wrong = predicted.iter().zip(truth).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// Mean negative log-probability of the true class, probabilities clipped to
/// `[1e-15, 1 - 1e-15]`.
pub fn logloss(prob: &ProbMatrix, truth: &[usize]) -> Result<f64> {
    check_lengths(prob.n_rows(), truth.len())?;
    let mut total = 0.0;
    for (i, (row, &y)) in prob.rows().zip(truth).enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-8 || row.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(format!("row {i} is not a probability vector")));
        }
        let p = *row
            .get(y)
            .ok_or_else(|| Error::invalid(format!("label {y} outside {} classes", row.len())))?;
        total -= p.clamp(LOGLOSS_EPS, 1.0 - LOGLOSS_EPS).ln();
    }
    Ok(total / truth.len() as f64)
}

pub fn rmse(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(predicted.len(), truth.len())?;
    let sse: f64 = predicted.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / truth.len() as f64).sqrt())
}
