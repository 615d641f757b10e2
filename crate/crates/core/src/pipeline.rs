//! Fit, predict and persist the full pipeline: encoders, boosted model and
//! decision thresholds.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{split_holdout, Dataset, Schema, Target, Task};
use crate::encoding::{fit_encoders, EncoderModel, EncodingOptions, HighCardinality};
use crate::error::{Error, Result};
use crate::gbt::{self, BoostedModel, DenseMatrix, GbtConfig, Scores};
use crate::metrics::{Measure, ProbMatrix, Requirement};
use crate::smbo::{decode_config, tune, NoiseModel, ParamSpace, TuneOptions, TuneState};
use crate::threshold::{
    self, apply_thresholds, optimize_binary, optimize_multiclass_gsa, BinarySearch, GsaOptions, ThresholdVector,
};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "autoboost-bundle";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoConfig {
    /// `None` picks mmce for classification and rmse for regression.
    pub measure: Option<Measure>,
    pub budget: usize,
    pub deadline_secs: f64,
    pub valid_fraction: f64,
    pub n_init: usize,
    pub k: usize,
    pub high_cardinality: HighCardinality,
    pub smoothing: f64,
    pub max_rounds: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for AutoConfig {
    fn default() -> Self {
        AutoConfig {
            measure: None,
            budget: 160,
            deadline_secs: 3600.0,
            valid_fraction: 0.2,
            n_init: 16,
            k: 10,
            high_cardinality: HighCardinality::Impact,
            smoothing: 1.0,
            max_rounds: 1000,
            patience: 10,
            seed: 1,
        }
    }
}

impl AutoConfig {
    fn encoding(&self) -> EncodingOptions {
        EncodingOptions {
            k: self.k,
            high_cardinality: self.high_cardinality,
            smoothing: self.smoothing,
        }
    }

    /// The measure that will be optimized for `task`.
    pub fn resolve_measure(&self, task: Task) -> Result<Measure> {
        let m = self.measure.unwrap_or_else(|| Measure::default_for(task));
        if !m.applies_to(task) {
            return Err(Error::invalid(format!("measure {m} does not apply to {task}")));
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget < 2 {
            return Err(Error::invalid("budget must be at least 2"));
        }
        if self.n_init < 2 {
            return Err(Error::invalid("n_init must be at least 2"));
        }
        if !(self.deadline_secs >= 0.0) {
            return Err(Error::invalid("deadline must be non-negative"));
        }
        if self.k < 2 {
            return Err(Error::invalid("k must be at least 2"));
        }
        if !(self.smoothing >= 0.0) {
            return Err(Error::invalid("smoothing must be non-negative"));
        }
        self.base_gbt().validate()
    }

    fn base_gbt(&self) -> GbtConfig {
        GbtConfig {
            max_rounds: self.max_rounds,
            patience: self.patience,
            seed: self.seed,
            ..GbtConfig::default()
        }
    }
}

/// A fitted pipeline. Needs nothing from the training data to predict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub format_version: u32,
    pub task: Task,
    pub target_name: String,
    /// Class labels in code order; `None` for regression.
    pub labels: Option<Vec<String>>,
    pub measure: Measure,
    pub encoders: EncoderModel,
    pub model: BoostedModel,
    /// Tuned cutoffs when the measure is computed from labels.
    pub thresholds: Option<ThresholdVector>,
    pub config: GbtConfig,
    pub auto_config: AutoConfig,
    pub history: TuneState,
    /// Validation measure of the chosen model, as seen by the tuner.
    pub validation_value: f64,
    /// Source rows held out for validation.
    pub valid_rows: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predictions {
    Classes {
        labels: Vec<String>,
        /// Untouched class probabilities, columns in `class_names` order.
        probabilities: ProbMatrix,
        class_names: Vec<String>,
    },
    Values(Vec<f64>),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Classes { labels, .. } => labels.len(),
            Predictions::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct Candidate {
    value: f64,
    model: BoostedModel,
    thresholds: Option<ThresholdVector>,
    config: GbtConfig,
}

fn tune_thresholds(
    scores: &Scores,
    target: &Target,
    measure: Measure,
    seed: u64,
) -> Result<(Option<ThresholdVector>, f64)> {
    match (scores, target) {
        (Scores::Probabilities(p), Target::Classes { codes, .. }) if measure.requires() == Requirement::Labels => {
            let (t, v) = if p.n_classes() == 2 {
                optimize_binary(&p.positive(), codes, measure, BinarySearch::default())?
            } else {
                let opts = GsaOptions { seed, ..Default::default() };
                optimize_multiclass_gsa(p, codes, measure, &opts)?
            };
            Ok((Some(t), v))
        }
        _ => Ok((None, gbt::evaluate(measure, scores, target)?)),
    }
}

/// Splits, encodes, tunes the boosting hyperparameters on the holdout and
/// returns the best model found. The chosen model is not refit.
pub fn autogbt_fit(d: &Dataset, cfg: &AutoConfig) -> Result<PipelineModel> {
    cfg.validate()?;
    let started = Instant::now();
    let deadline = started + Duration::from_secs_f64(cfg.deadline_secs);
    let target = d.target().ok_or_else(|| Error::data("dataset has no target"))?;
    let task = target.task();
    let measure = cfg.resolve_measure(task)?;

    let split = split_holdout(d, cfg.valid_fraction, cfg.seed, task.is_classification())?;
    let encoders = fit_encoders(&split.train, &cfg.encoding())?;
    let train = encoders.transform(&split.train)?;
    let valid = encoders.transform(&split.valid)?;
    let valid_target = valid.target().expect("split keeps the target");

    let space = ParamSpace::simple();
    let base = cfg.base_gbt();
    let mut best: Option<Candidate> = None;
    let mut failure: Option<Error> = None;
    let objective = |point: &[f64]| -> f64 {
        let run = || -> Result<Candidate> {
            let config = decode_config(point, &space, &base)?;
            let model = gbt::train_until(&train, &valid, &config, measure, Some(deadline))?;
            let scores = model.predict(&DenseMatrix::from_dataset(&valid)?, None)?;
            let (thresholds, value) = tune_thresholds(&scores, valid_target, measure, cfg.seed)?;
            Ok(Candidate { value, model, thresholds, config })
        };
        match run() {
            Ok(c) => {
                let v = c.value;
                if v.is_finite() && best.as_ref().is_none_or(|b| v < b.value) {
                    best = Some(c);
                }
                v
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let opts = TuneOptions {
        budget: cfg.budget,
        deadline: Duration::from_secs_f64(cfg.deadline_secs),
        n_init: cfg.n_init.min(cfg.budget),
        seed: cfg.seed,
        noise: NoiseModel::Estimated { floor: 1e-8 },
    };
    let tuned = tune(objective, &space, &opts);
    // report the first training failure rather than the tuner's summary of it
    let history = tuned.map_err(|e| failure.unwrap_or(e))?;
    let chosen = best.ok_or_else(|| Error::Numerical("no configuration trained successfully".into()))?;
    Ok(PipelineModel {
        format_version: FORMAT_VERSION,
        task,
        target_name: d.target_name().unwrap_or_default().to_string(),
        labels: target.labels().map(<[String]>::to_vec),
        measure,
        encoders,
        model: chosen.model,
        thresholds: chosen.thresholds,
        config: chosen.config,
        auto_config: cfg.clone(),
        history,
        validation_value: chosen.value,
        valid_rows: split.valid_rows,
    })
}

/// Predicts rows of `newdata`, which must have the training feature schema.
/// A target column, if present, is ignored.
pub fn autogbt_predict(p: &PipelineModel, newdata: &Dataset) -> Result<Predictions> {
    let encoded = p.encoders.transform(&newdata.without_target())?;
    let x = DenseMatrix::from_dataset(&encoded)?;
    match (p.model.predict(&x, None)?, &p.labels) {
        (Scores::Probabilities(prob), Some(names)) => {
            let codes = match &p.thresholds {
                Some(t) => apply_thresholds(&prob, t)?,
                None => threshold::default_labels(&prob),
            };
            Ok(Predictions::Classes {
                labels: codes.iter().map(|&c| names[c].clone()).collect(),
                probabilities: prob,
                class_names: names.clone(),
            })
        }
        (Scores::Values(v), None) => Ok(Predictions::Values(v)),
        _ => Err(Error::Bundle("model output does not match the stored task".into())),
    }
}

impl PipelineModel {
    pub fn schema(&self) -> &Schema {
        &self.encoders.schema
    }

    /// The bundle text: a header line with version and SHA-256 of the JSON
    /// payload that follows.
    pub fn to_bundle(&self) -> Result<String> {
        let payload = serde_json::to_string_pretty(self).map_err(|e| Error::Bundle(e.to_string()))?;
        let mut out = format!("{MAGIC} v{} sha256={}\n", self.format_version, hex_digest(payload.as_bytes()));
        out.push_str(&payload);
        Ok(out)
    }

    pub fn from_bundle(text: &str) -> Result<Self> {
        let (header, payload) = text
            .split_once('\n')
            .ok_or_else(|| Error::Bundle("missing header line".into()))?;
        let mut fields = header.split(' ');
        if fields.next() != Some(MAGIC) {
            return Err(Error::Bundle("not an autoboost bundle".into()));
        }
        let version: u32 = fields
            .next()
            .and_then(|v| v.strip_prefix('v'))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Bundle("unreadable version".into()))?;
        if version > FORMAT_VERSION {
            return Err(Error::Version { found: version, supported: FORMAT_VERSION });
        }
        let digest = fields
            .next()
            .and_then(|d| d.strip_prefix("sha256="))
            .ok_or_else(|| Error::Bundle("missing checksum".into()))?;
        if digest != hex_digest(payload.as_bytes()) {
            return Err(Error::Checksum);
        }
        let model: PipelineModel = serde_json::from_str(payload).map_err(|e| Error::Bundle(e.to_string()))?;
        if model.format_version != version {
            return Err(Error::Bundle("header and payload versions differ".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bundle()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_bundle(&text)
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
