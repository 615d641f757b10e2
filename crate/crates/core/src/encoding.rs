//! Categorical feature encoders.
//!
//! Each categorical column is dispatched by its number of distinct training
//! levels `L` (the missing level included): `L < k` gets one indicator column
//! per level, otherwise the configured high-cardinality strategy applies.
//! Integer encoding maps sorted levels to `1..=L`; impact encoding replaces a
//! level with the smoothed target aggregate of its rows:
//!
//! ```text
//! classification: (count_a(y = c) + m·P(y = c)) / (n_a + m)   one column per class
//! regression:     (Σ_{x_i = a} y_i + m·ȳ)        / (n_a + m)
//! ```
//!
//! Levels not seen during fitting map to `0` (integer), all-zero indicators
//! (dummy) or the global prior (impact).

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Column, ColumnData, ColumnKind, Dataset, Schema, Target};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HighCardinality {
    Integer,
    Impact,
}

impl FromStr for HighCardinality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integer" => Ok(HighCardinality::Integer),
            "impact" => Ok(HighCardinality::Impact),
            other => Err(Error::invalid(format!("unknown encoding strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingOptions {
    /// Columns with fewer than `k` levels are dummy encoded.
    pub k: usize,
    pub high_cardinality: HighCardinality,
    /// Additive smoothing toward the prior for impact encoding.
    pub smoothing: f64,
}

impl Default for EncodingOptions {
    fn default() -> Self {
        EncodingOptions {
            k: 10,
            high_cardinality: HighCardinality::Impact,
            smoothing: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
pub enum ColumnEncoder {
    Passthrough,
    /// Level at sorted position `i` becomes `i + 1`; unseen levels become `0`.
    Integer { levels: Vec<String> },
    Dummy { levels: Vec<String> },
    Impact {
        levels: Vec<String>,
        /// One vector per level: length 1 for regression, one entry per class otherwise.
        values: Vec<Vec<f64>>,
        fallback: Vec<f64>,
    },
}

impl ColumnEncoder {
    fn width(&self) -> usize {
        match self {
            ColumnEncoder::Passthrough | ColumnEncoder::Integer { .. } => 1,
            ColumnEncoder::Dummy { levels } => levels.len(),
            ColumnEncoder::Impact { fallback, .. } => fallback.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedColumn {
    pub name: String,
    pub encoder: ColumnEncoder,
}

/// Fitted transform for every feature column of a schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderModel {
    pub schema: Schema,
    pub options: EncodingOptions,
    pub columns: Vec<FittedColumn>,
    /// Class labels the impact columns refer to, in column order.
    pub classes: Option<Vec<String>>,
}

fn lookup(levels: &[String], level: &str) -> Option<usize> {
    levels.binary_search_by(|l| l.as_str().cmp(level)).ok()
}

fn fit_impact(col: &Column, levels: &[String], target: &Target, m: f64) -> ColumnEncoder {
    let n = target.len() as f64;
    let (width, prior) = match target {
        Target::Classes { labels, codes } => {
            let mut prior = vec![0.0; labels.len()];
            for &c in codes {
                prior[c] += 1.0;
            }
            prior.iter_mut().for_each(|p| *p /= n);
            (labels.len(), prior)
        }
        Target::Numeric(y) => (1, vec![y.iter().sum::<f64>() / n]),
    };
    let mut sums = vec![vec![0.0; width]; levels.len()];
    let mut counts = vec![0.0; levels.len()];
    for i in 0..target.len() {
        let a = lookup(levels, col.level(i).unwrap()).unwrap();
        counts[a] += 1.0;
        match target {
            Target::Classes { codes, .. } => sums[a][codes[i]] += 1.0,
            Target::Numeric(y) => sums[a][0] += y[i],
        }
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n_a)| {
            s.iter()
                .zip(&prior)
                .map(|(&sum, &p)| (sum + m * p) / (n_a + m))
                .collect()
        })
        .collect();
    ColumnEncoder::Impact {
        levels: levels.to_vec(),
        values,
        fallback: prior,
    }
}

/// Fits one encoder per feature column of `train`.
pub fn fit_encoders(train: &Dataset, opts: &EncodingOptions) -> Result<EncoderModel> {
    if opts.k < 2 {
        return Err(Error::invalid(format!("cardinality threshold k must be >= 2, got {}", opts.k)));
    }
    if !(opts.smoothing >= 0.0 && opts.smoothing.is_finite()) {
        return Err(Error::invalid(format!("smoothing must be >= 0, got {}", opts.smoothing)));
    }
    if train.n_rows() == 0 {
        return Err(Error::data("cannot fit encoders on an empty dataset"));
    }
    let mut columns = Vec::with_capacity(train.features().len());
    for col in train.features() {
        let encoder = match col.kind() {
            ColumnKind::Numeric => ColumnEncoder::Passthrough,
            ColumnKind::Categorical => {
                let levels = col.sorted_levels();
                if levels.len() < opts.k {
                    ColumnEncoder::Dummy { levels }
                } else {
                    match opts.high_cardinality {
                        HighCardinality::Integer => ColumnEncoder::Integer { levels },
                        HighCardinality::Impact => {
                            let target = train.target().ok_or_else(|| {
                                Error::data(format!(
                                    "impact encoding of {:?} needs a target column",
                                    col.name
                                ))
                            })?;
                            fit_impact(col, &levels, target, opts.smoothing)
                        }
                    }
                }
            }
        };
        columns.push(FittedColumn {
            name: col.name.clone(),
            encoder,
        });
    }
    Ok(EncoderModel {
        schema: train.schema(),
        options: *opts,
        columns,
        classes: train.target().and_then(Target::labels).map(<[String]>::to_vec),
    })
}

impl EncoderModel {
    /// Names of the numeric output columns, in order.
    pub fn output_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for c in &self.columns {
            match &c.encoder {
                ColumnEncoder::Passthrough | ColumnEncoder::Integer { .. } => names.push(c.name.clone()),
                ColumnEncoder::Dummy { levels } => {
                    names.extend(levels.iter().map(|l| format!("{}={l}", c.name)))
                }
                ColumnEncoder::Impact { fallback, .. } if fallback.len() == 1 => {
                    names.push(c.name.clone())
                }
                ColumnEncoder::Impact { .. } => {
                    let classes = self.classes.as_deref().unwrap_or_default();
                    names.extend(classes.iter().map(|k| format!("{}:{k}", c.name)))
                }
            }
        }
        names
    }

    pub fn n_outputs(&self) -> usize {
        self.columns.iter().map(|c| c.encoder.width()).sum()
    }

    /// Applies the fitted encoders; the target (if any) passes through untouched.
    pub fn transform(&self, d: &Dataset) -> Result<Dataset> {
        self.schema.check(&d.schema())?;
        let n = d.n_rows();
        let names = self.output_names();
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(names.len());
        for (fitted, col) in self.columns.iter().zip(d.features()) {
            match (&fitted.encoder, &col.data) {
                (ColumnEncoder::Passthrough, ColumnData::Numeric(v)) => out.push(v.clone()),
                (ColumnEncoder::Integer { levels }, _) => out.push(
                    (0..n)
                        .map(|i| lookup(levels, col.level(i).unwrap()).map_or(0.0, |a| (a + 1) as f64))
                        .collect(),
                ),
                (ColumnEncoder::Dummy { levels }, _) => {
                    let base = out.len();
                    out.extend(std::iter::repeat_with(|| vec![0.0; n]).take(levels.len()));
                    for i in 0..n {
                        if let Some(a) = lookup(levels, col.level(i).unwrap()) {
                            out[base + a][i] = 1.0;
                        }
                    }
                }
                (ColumnEncoder::Impact { levels, values, fallback }, _) => {
                    let base = out.len();
                    out.extend(std::iter::repeat_with(|| vec![0.0; n]).take(fallback.len()));
                    for i in 0..n {
                        let v = lookup(levels, col.level(i).unwrap()).map_or(fallback, |a| &values[a]);
                        for (j, &x) in v.iter().enumerate() {
                            out[base + j][i] = x;
                        }
                    }
                }
                (ColumnEncoder::Passthrough, ColumnData::Categorical(_)) => {
                    return Err(Error::schema(format!("column {:?} should be numeric", col.name)))
                }
            }
        }
        let columns = names
            .into_iter()
            .zip(out)
            .map(|(name, values)| Column::numeric(name, values))
            .collect();
        Ok(d.with_features(columns))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(x: &[&str], target: Target) -> Dataset {
        Dataset::new(vec![Column::levels("x", x)], Some(("y".into(), target))).unwrap()
    }

    fn numeric_column(d: &Dataset, j: usize) -> &[f64] {
        match &d.features()[j].data {
            ColumnData::Numeric(v) => v,
            _ => panic!("not numeric"),
        }
    }

    fn impact(m: f64) -> EncodingOptions {
        EncodingOptions {
            k: 2,
            high_cardinality: HighCardinality::Impact,
            smoothing: m,
        }
    }

    #[test]
    fn binary_impact_is_conditional_frequency() {
        let d = dataset(&["a", "a", "b", "b"], Target::classes(&["1", "0", "1", "1"]));
        let enc = fit_encoders(&d, &impact(0.0)).unwrap();
        let out = enc.transform(&d).unwrap();
        // second output column is P(y = "1" | x)
        assert_eq!(numeric_column(&out, 1), &[0.5, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn regression_impact_is_group_mean() {
        let d = dataset(&["a", "a", "b"], Target::Numeric(vec![2.0, 4.0, 6.0]));
        let enc = fit_encoders(&d, &impact(0.0)).unwrap();
        assert_eq!(numeric_column(&enc.transform(&d).unwrap(), 0), &[3.0, 3.0, 6.0]);
    }

    #[test]
    fn smoothing_pulls_toward_prior() {
        let d = dataset(&["a", "a", "b"], Target::Numeric(vec![2.0, 4.0, 6.0]));
        let enc = fit_encoders(&d, &impact(1.0)).unwrap();
        let v = numeric_column(&enc.transform(&d).unwrap(), 0).to_vec();
        // prior 4: a → (6 + 4)/3, b → (6 + 4)/2
        assert!((v[0] - 10.0 / 3.0).abs() < 1e-15);
        assert_eq!(v[2], 5.0);
    }

    #[test]
    fn dispatch_by_cardinality() {
        let three: Vec<String> = (0..30).map(|i| format!("l{}", i % 3)).collect();
        let twelve: Vec<String> = (0..30).map(|i| format!("l{:02}", i % 12)).collect();
        let d = Dataset::new(
            vec![Column::levels("small", &three), Column::levels("big", &twelve)],
            Some(("y".into(), Target::Numeric((0..30).map(f64::from).collect()))),
        )
        .unwrap();
        let opts = EncodingOptions {
            k: 10,
            high_cardinality: HighCardinality::Integer,
            smoothing: 1.0,
        };
        let enc = fit_encoders(&d, &opts).unwrap();
        assert!(matches!(&enc.columns[0].encoder, ColumnEncoder::Dummy { levels } if levels.len() == 3));
        assert!(matches!(enc.columns[1].encoder, ColumnEncoder::Integer { .. }));
        assert_eq!(enc.transform(&d).unwrap().features().len(), 4);
    }

    #[test]
    fn exactly_k_levels_is_high_cardinality() {
        let d = dataset(&["a", "b", "c"], Target::Numeric(vec![1.0, 2.0, 3.0]));
        let opts = EncodingOptions { k: 3, ..impact(0.0) };
        let enc = fit_encoders(&d, &opts).unwrap();
        assert!(matches!(enc.columns[0].encoder, ColumnEncoder::Impact { .. }));
    }

    #[test]
    fn integer_encoding_of_sorted_levels() {
        let d = dataset(&["c", "a", "b"], Target::Numeric(vec![1.0, 2.0, 3.0]));
        let opts = EncodingOptions {
            k: 2,
            high_cardinality: HighCardinality::Integer,
            smoothing: 0.0,
        };
        let enc = fit_encoders(&d, &opts).unwrap();
        assert_eq!(numeric_column(&enc.transform(&d).unwrap(), 0), &[3.0, 1.0, 2.0]);
        let unseen = dataset(&["z"], Target::Numeric(vec![0.0]));
        assert_eq!(numeric_column(&enc.transform(&unseen).unwrap(), 0), &[0.0]);
    }

    #[test]
    fn unseen_level_gets_prior() {
        let d = dataset(&["a", "a", "b", "b"], Target::classes(&["1", "0", "1", "1"]));
        let enc = fit_encoders(&d, &impact(1.0)).unwrap();
        let new = Dataset::new(vec![Column::levels("x", &["z"])], None).unwrap();
        let out = enc.transform(&new).unwrap();
        assert_eq!(numeric_column(&out, 0), &[0.25]);
        assert_eq!(numeric_column(&out, 1), &[0.75]);
    }

    #[test]
    fn no_categoricals_is_identity() {
        let d = Dataset::new(
            vec![Column::numeric("a", vec![1.0, f64::NAN, 3.0])],
            Some(("y".into(), Target::Numeric(vec![0.0, 1.0, 2.0]))),
        )
        .unwrap();
        let enc = fit_encoders(&d, &EncodingOptions::default()).unwrap();
        let out = enc.transform(&d).unwrap();
        assert_eq!(out.schema(), d.schema());
        assert_eq!(numeric_column(&out, 0)[0], 1.0);
        assert!(numeric_column(&out, 0)[1].is_nan());
        assert_eq!(out.target(), d.target());
    }

    #[test]
    fn missing_level_is_encoded() {
        let d = Dataset::new(
            vec![Column::categorical("x", &[Some("a"), None, Some("a")])],
            Some(("y".into(), Target::Numeric(vec![0.0, 1.0, 2.0]))),
        )
        .unwrap();
        let enc = fit_encoders(&d, &EncodingOptions::default()).unwrap();
        let out = enc.transform(&d).unwrap();
        assert_eq!(enc.output_names(), vec!["x=__NA__", "x=a"]);
        assert_eq!(numeric_column(&out, 0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn errors() {
        let d = dataset(&["a", "b"], Target::Numeric(vec![1.0, 2.0]));
        assert!(fit_encoders(&d, &EncodingOptions { k: 1, ..Default::default() }).is_err());
        assert!(fit_encoders(&d, &impact(-1.0)).is_err());
        let no_target = d.without_target();
        assert!(matches!(fit_encoders(&no_target, &impact(0.0)), Err(Error::Data(_))));
        let enc = fit_encoders(&d, &impact(0.0)).unwrap();
        let other = Dataset::new(vec![Column::levels("w", &["a"])], None).unwrap();
        assert!(matches!(enc.transform(&other), Err(Error::Schema(_))));
    }
}
