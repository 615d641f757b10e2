//! Gradient-boosted regression trees with second-order loss expansion,
//! L1/L2-regularized leaves, learned default directions for missing values,
//! row and column subsampling, and early stopping on a validation set.

mod loss;
mod matrix;
mod tree;

use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use loss::{logistic_grad_hess, sigmoid, softmax_grad_hess, softmax_into, squared_grad_hess, Objective};
pub use matrix::DenseMatrix;
pub use tree::{leaf_weight, split_gain, split_gain_l1, Node, Tree, TreeParams};

use crate::data::{Dataset, Target};
use crate::error::{Error, Result};
use crate::metrics::{self, Measure, ProbMatrix};
use crate::threshold;

/// Boosting hyperparameters. The first eight fields are the tuned ones;
/// `max_rounds`, `patience` and `seed` are fixed training controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub eta: f64,
    /// Minimum gain for a split.
    pub gamma: f64,
    pub max_depth: usize,
    pub colsample_bytree: f64,
    pub colsample_bylevel: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// L1 penalty on leaf weights.
    pub alpha: f64,
    pub subsample: f64,
    pub max_rounds: usize,
    /// Rounds without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            eta: 0.1,
            gamma: 0.0,
            max_depth: 6,
            colsample_bytree: 1.0,
            colsample_bylevel: 1.0,
            lambda: 1.0,
            alpha: 0.0,
            subsample: 1.0,
            max_rounds: 1000,
            patience: 10,
            seed: 1,
        }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        let checks = [
            (self.eta > 0.0 && self.eta.is_finite(), "eta must be positive"),
            (self.gamma >= 0.0 && self.gamma.is_finite(), "gamma must be >= 0"),
            (self.lambda >= 0.0 && self.lambda.is_finite(), "lambda must be >= 0"),
            (self.alpha >= 0.0 && self.alpha.is_finite(), "alpha must be >= 0"),
            (self.max_depth >= 1, "max_depth must be >= 1"),
            (unit(self.colsample_bytree), "colsample_bytree must lie in (0,1]"),
            (unit(self.colsample_bylevel), "colsample_bylevel must lie in (0,1]"),
            (unit(self.subsample), "subsample must lie in (0,1]"),
            (self.max_rounds >= 1, "max_rounds must be >= 1"),
            (self.patience >= 1, "patience must be >= 1"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::invalid(*msg)),
            None => Ok(()),
        }
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            lambda: self.lambda,
            alpha: self.alpha,
            gamma: self.gamma,
            eta: self.eta,
            colsample_bylevel: self.colsample_bylevel,
        }
    }
}

/// Model output for a batch of rows.
#[derive(Clone, Debug, PartialEq)]
pub enum Scores {
    Values(Vec<f64>),
    Probabilities(ProbMatrix),
}

impl Scores {
    pub fn values(&self) -> Option<&[f64]> {
        match self {
            Scores::Values(v) => Some(v),
            Scores::Probabilities(_) => None,
        }
    }

    pub fn probabilities(&self) -> Option<&ProbMatrix> {
        match self {
            Scores::Probabilities(p) => Some(p),
            Scores::Values(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub objective: Objective,
    pub n_features: usize,
    pub base_score: Vec<f64>,
    /// Round-major; softmax models hold one tree per class per round.
    pub trees: Vec<Tree>,
    /// Number of rounds used for prediction (1-based, earliest best round).
    pub best_iteration: usize,
    /// Measure used for early stopping.
    pub stopping_measure: Measure,
    /// Validation measure after each trained round.
    pub valid_history: Vec<f64>,
}

impl BoostedModel {
    pub fn n_rounds(&self) -> usize {
        self.trees.len() / self.objective.n_outputs()
    }

    /// Raw margins, row-major `n × n_outputs`, using the first `upto` rounds
    /// (default: `best_iteration`).
    pub fn predict_raw(&self, x: &DenseMatrix, upto: Option<usize>) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features {
            return Err(Error::schema(format!(
                "model expects {} features, got {}",
                self.n_features,
                x.n_cols()
            )));
        }
        let k = self.objective.n_outputs();
        let rounds = upto.unwrap_or(self.best_iteration).min(self.n_rounds());
        let mut raw: Vec<f64> = (0..x.n_rows()).flat_map(|_| self.base_score.iter().copied()).collect();
        for (t, tree) in self.trees[..rounds * k].iter().enumerate() {
            let c = t % k;
            for i in 0..x.n_rows() {
                raw[i * k + c] += tree.predict_row(x, i);
            }
        }
        Ok(raw)
    }

    /// Regression values or class probabilities (rows sum to 1).
    pub fn predict(&self, x: &DenseMatrix, upto: Option<usize>) -> Result<Scores> {
        let raw = self.predict_raw(x, upto)?;
        Ok(scores_from_raw(self.objective, &raw))
    }
}

fn scores_from_raw(objective: Objective, raw: &[f64]) -> Scores {
    match objective {
        Objective::Squared => Scores::Values(raw.to_vec()),
        Objective::Logistic => {
            let mut p = vec![0.0; raw.len() * 2];
            for (i, r) in raw.iter().enumerate() {
                objective.probabilities(std::slice::from_ref(r), &mut p[2 * i..2 * i + 2]);
            }
            Scores::Probabilities(ProbMatrix::new(2, p).expect("two columns"))
        }
        Objective::Softmax { n_classes } => {
            let mut p = vec![0.0; raw.len()];
            for (r, out) in raw.chunks_exact(n_classes).zip(p.chunks_exact_mut(n_classes)) {
                objective.probabilities(r, out);
            }
            Scores::Probabilities(ProbMatrix::new(n_classes, p).expect("k columns"))
        }
    }
}

/// The tuning measure if the model's output can feed it, else logloss/rmse.
pub fn stopping_measure(measure: Measure, target: &Target) -> Measure {
    let task = target.task();
    if measure.applies_to(task) {
        measure
    } else if task.is_classification() {
        Measure::Logloss
    } else {
        Measure::Rmse
    }
}

/// Evaluates `measure` on model scores against `target`. Labels come from the
/// default thresholds (0.5 for binary, argmax otherwise).
pub fn evaluate(measure: Measure, scores: &Scores, target: &Target) -> Result<f64> {
    match (measure, scores, target) {
        (Measure::Mmce, Scores::Probabilities(p), Target::Classes { codes, .. }) => {
            metrics::mmce(&threshold::default_labels(p), codes)
        }
        (Measure::Logloss, Scores::Probabilities(p), Target::Classes { codes, .. }) => metrics::logloss(p, codes),
        (Measure::Rmse, Scores::Values(v), Target::Numeric(y)) => metrics::rmse(v, y),
        _ => Err(Error::invalid(format!("measure {measure} does not apply to this task"))),
    }
}

/// Trains with early stopping on `valid`. Both datasets must be all-numeric
/// with the same schema and a target.
pub fn train(train: &Dataset, valid: &Dataset, cfg: &GbtConfig, measure: Measure) -> Result<BoostedModel> {
    train_until(train, valid, cfg, measure, None)
}

/// [`train`] that stops adding rounds once `deadline` has passed (at least
/// one round is always trained).
pub fn train_until(
    train: &Dataset,
    valid: &Dataset,
    cfg: &GbtConfig,
    measure: Measure,
    deadline: Option<Instant>,
) -> Result<BoostedModel> {
    cfg.validate()?;
    if train.n_rows() == 0 {
        return Err(Error::data("empty training set"));
    }
    if valid.n_rows() == 0 {
        return Err(Error::data("empty validation set"));
    }
    train.schema().check(&valid.schema())?;
    let target = train.target().ok_or_else(|| Error::data("training set has no target"))?;
    let valid_target = valid.target().ok_or_else(|| Error::data("validation set has no target"))?;
    if target.task() != valid_target.task() || target.labels() != valid_target.labels() {
        return Err(Error::data("training and validation targets differ in kind or labels"));
    }
    let x = DenseMatrix::from_dataset(train)?;
    let xv = DenseMatrix::from_dataset(valid)?;

    let n_classes = target.labels().map_or(1, <[String]>::len);
    let objective = Objective::for_task(target.task(), n_classes);
    let k = objective.n_outputs();
    let stop_measure = stopping_measure(measure, target);
    let base_score = objective.base_score(target);
    let params = cfg.tree_params();
    let (n, nv, d) = (x.n_rows(), xv.n_rows(), x.n_cols());

    let presorted = x.presort();
    let mut raw: Vec<f64> = (0..n).flat_map(|_| base_score.iter().copied()).collect();
    let mut raw_valid: Vec<f64> = (0..nv).flat_map(|_| base_score.iter().copied()).collect();
    let mut grad = vec![0.0; n * k];
    let mut hess = vec![0.0; n * k];
    let (mut g_k, mut h_k) = (vec![0.0; n], vec![0.0; n]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut trees = Vec::new();
    let mut history = Vec::new();
    let (mut best_round, mut best_value) = (0, f64::INFINITY);

    for round in 1..=cfg.max_rounds {
        if round > 1 && deadline.is_some_and(|t| Instant::now() >= t) {
            break;
        }
        objective.grad_hess(&raw, target, &mut grad, &mut hess);
        let mut rows: Vec<u32> = if cfg.subsample < 1.0 {
            index::sample(&mut rng, n, tree::sample_count(cfg.subsample, n))
                .into_iter()
                .map(|i| i as u32)
                .collect()
        } else {
            (0..n as u32).collect()
        };
        rows.sort_unstable();

        for c in 0..k {
            for i in 0..n {
                g_k[i] = grad[i * k + c];
                h_k[i] = hess[i * k + c];
            }
            let mut features: Vec<usize> = if cfg.colsample_bytree < 1.0 {
                index::sample(&mut rng, d, tree::sample_count(cfg.colsample_bytree, d)).into_vec()
            } else {
                (0..d).collect()
            };
            features.sort_unstable();
            let tree = tree::grow(&x, &presorted, &rows, &g_k, &h_k, &features, &params, &mut rng);
            for i in 0..n {
                raw[i * k + c] += tree.predict_row(&x, i);
            }
            for i in 0..nv {
                raw_valid[i * k + c] += tree.predict_row(&xv, i);
            }
            trees.push(tree);
        }

        let value = evaluate(stop_measure, &scores_from_raw(objective, &raw_valid), valid_target)?;
        history.push(value);
        if value < best_value {
            best_value = value;
            best_round = round;
        } else if round - best_round >= cfg.patience {
            break;
        }
    }

    Ok(BoostedModel {
        objective,
        n_features: d,
        base_score,
        trees,
        best_iteration: best_round.max(1),
        stopping_measure: stop_measure,
        valid_history: history,
    })
}

/// Earliest index (1-based) of the minimum of `history`.
pub fn best_iteration(history: &[f64]) -> Option<usize> {
    history
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |acc, (i, &v)| match acc {
            Some((_, b)) if b <= v => acc,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i + 1)
}
