//! Classification thresholds tuned directly against a label-based measure.
//!
//! Binary models predict the positive class when `p ≥ t`. Multiclass models
//! predict `argmax_k p_k / t_k` with the thresholds kept on the simplex, so
//! uniform thresholds reproduce plain argmax and only the ratios matter.

mod binary;
mod gsa;

use serde::{Deserialize, Serialize};

pub use binary::{optimize_binary, BinarySearch};
pub use gsa::{optimize_multiclass_gsa, tsallis_visit, visiting_temperature, GsaOptions};

use crate::error::{Error, Result};
use crate::metrics::{self, Measure, ProbMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub enum ThresholdVector {
    /// Cutoff on the positive-class probability, in (0, 1).
    Binary(f64),
    /// Positive per-class divisors summing to 1.
    Multiclass(Vec<f64>),
}

impl ThresholdVector {
    pub fn binary(t: f64) -> Result<Self> {
        if t > 0.0 && t < 1.0 {
            Ok(ThresholdVector::Binary(t))
        } else {
            Err(Error::invalid(format!("binary threshold must lie in (0,1), got {t}")))
        }
    }

    /// Normalizes positive weights onto the simplex.
    pub fn multiclass(weights: &[f64]) -> Result<Self> {
        if weights.len() < 3 {
            return Err(Error::invalid("multiclass thresholds need at least 3 classes"));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("multiclass thresholds must be positive"));
        }
        let sum: f64 = weights.iter().sum();
        Ok(ThresholdVector::Multiclass(weights.iter().map(|w| w / sum).collect()))
    }

    /// 0.5 for two classes, uniform otherwise.
    pub fn default_for(n_classes: usize) -> Result<Self> {
        if n_classes == 2 {
            Self::binary(0.5)
        } else {
            Self::multiclass(&vec![1.0; n_classes])
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            ThresholdVector::Binary(_) => 2,
            ThresholdVector::Multiclass(t) => t.len(),
        }
    }

    pub fn as_vec(&self) -> Vec<f64> {
        match self {
            ThresholdVector::Binary(t) => vec![*t],
            ThresholdVector::Multiclass(t) => t.clone(),
        }
    }
}

impl From<ThresholdVector> for Vec<f64> {
    fn from(t: ThresholdVector) -> Self {
        t.as_vec()
    }
}

impl TryFrom<Vec<f64>> for ThresholdVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        match v.as_slice() {
            [t] => ThresholdVector::binary(*t),
            _ if v.len() >= 3 => {
                let t = ThresholdVector::multiclass(&v)?;
                // keep stored values verbatim so reloading is exact
                Ok(match t {
                    ThresholdVector::Multiclass(_) => ThresholdVector::Multiclass(v),
                    other => other,
                })
            }
            _ => Err(Error::invalid(format!("{} thresholds is not a valid vector", v.len()))),
        }
    }
}

/// `argmax_k p_k / t_k`, ties to the lowest class index. `t` need not be normalized.
pub fn apply_ratio(prob: &ProbMatrix, t: &[f64]) -> Result<Vec<usize>> {
    if prob.n_classes() != t.len() {
        return Err(Error::invalid(format!(
            "{} thresholds for {} classes",
            t.len(),
            prob.n_classes()
        )));
    }
    Ok(prob
        .rows()
        .map(|row| {
            let mut best = 0;
            let mut best_ratio = row[0] / t[0];
            for (k, (&p, &tk)) in row.iter().zip(t).enumerate().skip(1) {
                let r = p / tk;
                if r > best_ratio {
                    best = k;
                    best_ratio = r;
                }
            }
            best
        })
        .collect())
}

pub fn apply_thresholds(prob: &ProbMatrix, t: &ThresholdVector) -> Result<Vec<usize>> {
    match t {
        ThresholdVector::Binary(cut) => {
            if prob.n_classes() != 2 {
                return Err(Error::invalid(format!(
                    "binary threshold applied to {} classes",
                    prob.n_classes()
                )));
            }
            Ok(prob.rows().map(|r| usize::from(r[1] >= *cut)).collect())
        }
        ThresholdVector::Multiclass(w) => apply_ratio(prob, w),
    }
}

/// Labels under default thresholds.
pub fn default_labels(prob: &ProbMatrix) -> Vec<usize> {
    if prob.n_classes() == 2 {
        prob.rows().map(|r| usize::from(r[1] >= 0.5)).collect()
    } else {
        prob.rows()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |(bi, bp), (i, &p)| if p > bp { (i, p) } else { (bi, bp) })
                    .0
            })
            .collect()
    }
}

/// Scores predicted labels with a label-consuming measure.
pub fn label_measure(measure: Measure, predicted: &[usize], truth: &[usize]) -> Result<f64> {
    match measure {
        Measure::Mmce => metrics::mmce(predicted, truth),
        other => Err(Error::invalid(format!("{other} does not consume labels"))),
    }
}
