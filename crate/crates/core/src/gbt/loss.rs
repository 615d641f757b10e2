//! Training objectives and their first and second derivatives with respect to
//! the raw (margin) score.

use serde::{Deserialize, Serialize};

use crate::data::{Target, Task};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Objective {
    /// ½(f − y)²
    Squared,
    /// Logistic loss on the margin of the positive (second) class.
    Logistic,
    /// Cross-entropy over softmax of one logit per class.
    Softmax { n_classes: usize },
}

pub fn sigmoid(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax of `logits` into `out`.
pub fn softmax_into(logits: &[f64], out: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

pub fn squared_grad_hess(f: f64, y: f64) -> (f64, f64) {
    (f - y, 1.0)
}

/// `y` is 1 for the positive class and 0 otherwise.
pub fn logistic_grad_hess(f: f64, y: f64) -> (f64, f64) {
    let p = sigmoid(f);
    (p - y, p * (1.0 - p))
}

/// Per-class gradient and diagonal hessian of softmax cross-entropy.
pub fn softmax_grad_hess(logits: &[f64], class: usize, grad: &mut [f64], hess: &mut [f64]) {
    softmax_into(logits, grad);
    for (c, (g, h)) in grad.iter_mut().zip(hess.iter_mut()).enumerate() {
        let p = *g;
        *g = if c == class { p - 1.0 } else { p };
        *h = p * (1.0 - p);
    }
}

// Keeps log-priors finite when a class is absent from the training rows.
const PRIOR_FLOOR: f64 = 1e-6;

impl Objective {
    pub fn for_task(task: Task, n_classes: usize) -> Objective {
        match task {
            Task::Regression => Objective::Squared,
            Task::Binary => Objective::Logistic,
            Task::Multiclass => Objective::Softmax { n_classes },
        }
    }

    /// Raw scores per row: one, or one per class for softmax.
    pub fn n_outputs(self) -> usize {
        match self {
            Objective::Softmax { n_classes } => n_classes,
            _ => 1,
        }
    }

    /// Training mean, logit of the positive frequency, or log class frequencies.
    pub fn base_score(self, target: &Target) -> Vec<f64> {
        match (self, target) {
            (Objective::Squared, Target::Numeric(y)) => vec![y.iter().sum::<f64>() / y.len() as f64],
            (Objective::Logistic, Target::Classes { codes, .. }) => {
                let pos = codes.iter().filter(|&&c| c == 1).count() as f64 / codes.len() as f64;
                let p = pos.clamp(PRIOR_FLOOR, 1.0 - PRIOR_FLOOR);
                vec![(p / (1.0 - p)).ln()]
            }
            (Objective::Softmax { n_classes }, Target::Classes { codes, .. }) => {
                let mut counts = vec![0.0; n_classes];
                for &c in codes {
                    counts[c] += 1.0;
                }
                let n = codes.len() as f64;
                counts.iter().map(|c| (c / n).max(PRIOR_FLOOR).ln()).collect()
            }
            _ => panic!("objective {self:?} does not match target kind"),
        }
    }

    /// Fills row-major gradient/hessian buffers (`n × n_outputs`).
    pub fn grad_hess(self, raw: &[f64], target: &Target, grad: &mut [f64], hess: &mut [f64]) {
        let k = self.n_outputs();
        match (self, target) {
            (Objective::Squared, Target::Numeric(y)) => {
                for i in 0..y.len() {
                    (grad[i], hess[i]) = squared_grad_hess(raw[i], y[i]);
                }
            }
            (Objective::Logistic, Target::Classes { codes, .. }) => {
                for (i, &c) in codes.iter().enumerate() {
                    (grad[i], hess[i]) = logistic_grad_hess(raw[i], if c == 1 { 1.0 } else { 0.0 });
                }
            }
            (Objective::Softmax { .. }, Target::Classes { codes, .. }) => {
                for (i, &c) in codes.iter().enumerate() {
                    let r = i * k..(i + 1) * k;
                    softmax_grad_hess(&raw[r.clone()], c, &mut grad[r.clone()], &mut hess[r]);
                }
            }
            _ => panic!("objective {self:?} does not match target kind"),
        }
    }

    /// Maps one row of raw scores to class probabilities (classification only).
    pub fn probabilities(self, raw: &[f64], out: &mut [f64]) {
        match self {
            Objective::Logistic => {
                let p = sigmoid(raw[0]);
                out[0] = 1.0 - p;
                out[1] = p;
            }
            Objective::Softmax { .. } => softmax_into(raw, out),
            Objective::Squared => panic!("squared loss has no probabilities"),
        }
    }
}
