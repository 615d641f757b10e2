//! Tabular datasets: typed columns, CSV ingestion, holdout splitting and the
//! majority-class baseline.
//!
//! Numeric cells are stored as `f64` with `NaN` marking a missing value, which
//! is exactly what the tree learner consumes. Categorical cells keep their raw
//! string; a missing categorical cell is reported as the level [`NA_LEVEL`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Level used for missing categorical cells.
pub const NA_LEVEL: &str = "__NA__";

/// Cell strings treated as missing unless configured otherwise.
pub const DEFAULT_NA_TOKENS: [&str; 3] = ["", "NA", "?"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Binary,
    Multiclass,
    Regression,
}

impl Task {
    pub fn is_classification(self) -> bool {
        !matches!(self, Task::Regression)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Binary => "binary",
            Task::Multiclass => "multiclass",
            Task::Regression => "regression",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Task::Binary),
            "multiclass" => Ok(Task::Multiclass),
            "regression" => Ok(Task::Regression),
            other => Err(Error::invalid(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    /// `NaN` marks a missing cell.
    Numeric(Vec<f64>),
    /// `None` marks a missing cell.
    Categorical(Vec<Option<String>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    /// Builds a categorical column; `None` entries are missing.
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Categorical(
                values
                    .iter()
                    .map(|v| v.as_ref().map(|s| s.as_ref().to_string()))
                    .collect(),
            ),
        }
    }

    /// Builds a categorical column with no missing cells.
    pub fn levels<S: AsRef<str>>(name: impl Into<String>, values: &[S]) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Categorical(
                values.iter().map(|s| Some(s.as_ref().to_string())).collect(),
            ),
        }
    }

    pub fn kind(&self) -> ColumnKind {
        match self.data {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Level of row `i` for a categorical column (missing → [`NA_LEVEL`]).
    pub fn level(&self, i: usize) -> Option<&str> {
        match &self.data {
            ColumnData::Categorical(v) => Some(v[i].as_deref().unwrap_or(NA_LEVEL)),
            ColumnData::Numeric(_) => None,
        }
    }

    /// Distinct levels, sorted lexicographically. Empty for numeric columns.
    pub fn sorted_levels(&self) -> Vec<String> {
        match &self.data {
            ColumnData::Categorical(v) => v
                .iter()
                .map(|c| c.as_deref().unwrap_or(NA_LEVEL))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .map(str::to_string)
                .collect(),
            ColumnData::Numeric(_) => Vec::new(),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(rows.iter().map(|&i| v[i].clone()).collect())
            }
        };
        Column {
            name: self.name.clone(),
            data,
        }
    }
}

/// Target values. Class labels are kept sorted and rows store indices into them.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Classes { labels: Vec<String>, codes: Vec<usize> },
    Numeric(Vec<f64>),
}

impl Target {
    /// Class target from raw labels; the label set is sorted lexicographically.
    pub fn classes<S: AsRef<str>>(values: &[S]) -> Self {
        let labels: Vec<String> = values
            .iter()
            .map(|s| s.as_ref())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(str::to_string)
            .collect();
        let codes = values
            .iter()
            .map(|s| labels.binary_search_by(|l| l.as_str().cmp(s.as_ref())).unwrap())
            .collect();
        Target::Classes { labels, codes }
    }

    pub fn len(&self) -> usize {
        match self {
            Target::Classes { codes, .. } => codes.len(),
            Target::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Target::Classes { labels, .. } if labels.len() == 2 => Task::Binary,
            Target::Classes { .. } => Task::Multiclass,
            Target::Numeric(_) => Task::Regression,
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match self {
            Target::Classes { labels, .. } => Some(labels),
            Target::Numeric(_) => None,
        }
    }

    pub fn codes(&self) -> Option<&[usize]> {
        match self {
            Target::Classes { codes, .. } => Some(codes),
            Target::Numeric(_) => None,
        }
    }

    pub fn values(&self) -> Option<&[f64]> {
        match self {
            Target::Numeric(v) => Some(v),
            Target::Classes { .. } => None,
        }
    }

    fn select(&self, rows: &[usize]) -> Target {
        match self {
            Target::Classes { labels, codes } => Target::Classes {
                labels: labels.clone(),
                codes: rows.iter().map(|&i| codes[i]).collect(),
            },
            Target::Numeric(v) => Target::Numeric(rows.iter().map(|&i| v[i]).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Ordered feature names and kinds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn check(&self, other: &Schema) -> Result<()> {
        if self.columns.len() != other.columns.len() {
            return Err(Error::schema(format!(
                "expected {} feature columns, found {}",
                self.columns.len(),
                other.columns.len()
            )));
        }
        for (want, got) in self.columns.iter().zip(&other.columns) {
            if want != got {
                return Err(Error::schema(format!(
                    "expected column {:?} ({:?}), found {:?} ({:?})",
                    want.name, want.kind, got.name, got.kind
                )));
            }
        }
        Ok(())
    }
}

/// An immutable table of feature columns plus an optional target.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<Column>,
    target_name: Option<String>,
    target: Option<Target>,
    n_rows: usize,
}

impl Dataset {
    /// Validates column lengths and target invariants.
    pub fn new(features: Vec<Column>, target: Option<(String, Target)>) -> Result<Self> {
        let n_rows = match (&target, features.first()) {
            (Some((_, t)), _) => t.len(),
            (None, Some(c)) => c.len(),
            (None, None) => 0,
        };
        for c in &features {
            if c.len() != n_rows {
                return Err(Error::data(format!(
                    "column {:?} has {} rows, expected {n_rows}",
                    c.name,
                    c.len()
                )));
            }
        }
        let mut names = BTreeSet::new();
        for c in &features {
            if !names.insert(c.name.as_str()) {
                return Err(Error::data(format!("duplicate column {:?}", c.name)));
            }
        }
        if let Some((name, t)) = &target {
            if names.contains(name.as_str()) {
                return Err(Error::data(format!("target {name:?} is also a feature")));
            }
            match t {
                Target::Classes { labels, codes } => {
                    if labels.len() < 2 {
                        return Err(Error::data(format!(
                            "classification target {name:?} needs at least 2 classes"
                        )));
                    }
                    if codes.iter().any(|&c| c >= labels.len()) {
                        return Err(Error::data("class code out of range"));
                    }
                }
                Target::Numeric(v) => {
                    if v.iter().any(|y| !y.is_finite()) {
                        return Err(Error::data(format!(
                            "target {name:?} has missing or non-finite values"
                        )));
                    }
                }
            }
        }
        let (target_name, target) = match target {
            Some((n, t)) => (Some(n), Some(t)),
            None => (None, None),
        };
        Ok(Dataset {
            features,
            target_name,
            target,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn features(&self) -> &[Column] {
        &self.features
    }

    pub fn feature(&self, name: &str) -> Option<&Column> {
        self.features.iter().find(|c| c.name == name)
    }

    pub fn target(&self) -> Option<&Target> {
        self.target.as_ref()
    }

    pub fn target_name(&self) -> Option<&str> {
        self.target_name.as_deref()
    }

    pub fn task(&self) -> Option<Task> {
        self.target.as_ref().map(Target::task)
    }

    pub fn schema(&self) -> Schema {
        Schema {
            columns: self
                .features
                .iter()
                .map(|c| ColumnSpec {
                    name: c.name.clone(),
                    kind: c.kind(),
                })
                .collect(),
        }
    }

    /// Row subset in the given order. Class label sets are preserved.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: self.features.iter().map(|c| c.select(rows)).collect(),
            target_name: self.target_name.clone(),
            target: self.target.as_ref().map(|t| t.select(rows)),
            n_rows: rows.len(),
        }
    }

    /// Same features, target dropped.
    pub fn without_target(&self) -> Dataset {
        Dataset {
            features: self.features.clone(),
            target_name: None,
            target: None,
            n_rows: self.n_rows,
        }
    }

    pub(crate) fn with_features(&self, features: Vec<Column>) -> Dataset {
        Dataset {
            features,
            target_name: self.target_name.clone(),
            target: self.target.clone(),
            n_rows: self.n_rows,
        }
    }

    /// Per-class row counts (classification only).
    pub fn class_counts(&self) -> Option<Vec<usize>> {
        match &self.target {
            Some(Target::Classes { labels, codes }) => {
                let mut counts = vec![0; labels.len()];
                for &c in codes {
                    counts[c] += 1;
                }
                Some(counts)
            }
            _ => None,
        }
    }
}

/// CSV ingestion settings.
#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub target: String,
    pub task_hint: Option<Task>,
    pub na_tokens: Vec<String>,
}

impl CsvOptions {
    pub fn new(target: impl Into<String>) -> Self {
        CsvOptions {
            target: target.into(),
            task_hint: None,
            na_tokens: DEFAULT_NA_TOKENS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn read_records<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn infer_column(name: &str, cells: Vec<Option<String>>) -> Column {
    let numeric: Option<Vec<f64>> = cells
        .iter()
        .map(|c| match c {
            None => Some(f64::NAN),
            Some(s) => parse_number(s),
        })
        .collect();
    match numeric {
        Some(values) => Column::numeric(name, values),
        None => Column {
            name: name.to_string(),
            data: ColumnData::Categorical(cells),
        },
    }
}

/// Reads a dataset from any CSV source. See [`load_csv`].
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let (header, rows) = read_records(reader)?;
    let target_idx = header
        .iter()
        .position(|h| *h == opts.target)
        .ok_or_else(|| Error::data(format!("target column {:?} not in header", opts.target)))?;
    if rows.len() < 2 {
        return Err(Error::data(format!("need at least 2 rows, found {}", rows.len())));
    }
    let is_na = |s: &str| opts.na_tokens.iter().any(|t| t == s);

    let mut features = Vec::with_capacity(header.len() - 1);
    for (j, name) in header.iter().enumerate() {
        if j == target_idx {
            continue;
        }
        let cells = rows
            .iter()
            .map(|r| {
                let s = r[j].as_str();
                (!is_na(s)).then(|| s.to_string())
            })
            .collect();
        features.push(infer_column(name, cells));
    }

    let raw_target: Vec<&str> = rows.iter().map(|r| r[target_idx].as_str()).collect();
    if let Some(row) = raw_target.iter().position(|s| is_na(s)) {
        return Err(Error::data(format!(
            "target {:?} is missing at data row {}",
            opts.target,
            row + 1
        )));
    }
    let numeric_target: Option<Vec<f64>> = raw_target.iter().map(|s| parse_number(s)).collect();
    let target = match (opts.task_hint, numeric_target) {
        (Some(Task::Regression), Some(v)) | (None, Some(v)) => Target::Numeric(v),
        (Some(Task::Regression), None) => {
            return Err(Error::data(format!(
                "regression target {:?} is not numeric",
                opts.target
            )))
        }
        (hint, _) => {
            let trimmed: Vec<&str> = raw_target.iter().map(|s| s.trim()).collect();
            let t = Target::classes(&trimmed);
            let k = t.labels().map_or(0, <[String]>::len);
            match hint {
                Some(Task::Binary) if k != 2 => {
                    return Err(Error::data(format!("binary target has {k} distinct levels")))
                }
                Some(Task::Multiclass) if k < 3 => {
                    return Err(Error::data(format!(
                        "multiclass target has {k} distinct levels"
                    )))
                }
                _ => {}
            }
            t
        }
    };
    Dataset::new(features, Some((opts.target.clone(), target)))
}

/// Loads a CSV file with a header row. Columns whose non-missing cells all
/// parse as finite numbers become numeric, everything else categorical.
/// Without a task hint, a numeric target means regression; otherwise the
/// number of distinct labels decides between binary and multiclass.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    read_csv(open(path.as_ref())?, opts)
}

/// Reads feature columns named in `schema`, parsing each with its fitted
/// kind. Other columns (including a target, if present) are ignored.
pub fn read_features_csv<R: Read>(reader: R, schema: &Schema, na_tokens: &[String]) -> Result<Dataset> {
    let (header, rows) = read_records(reader)?;
    let is_na = |s: &str| na_tokens.iter().any(|t| t == s);
    let mut features = Vec::with_capacity(schema.columns.len());
    for spec in &schema.columns {
        let j = header
            .iter()
            .position(|h| *h == spec.name)
            .ok_or_else(|| Error::schema(format!("column {:?} not in header", spec.name)))?;
        let col = match spec.kind {
            ColumnKind::Numeric => {
                let mut values = Vec::with_capacity(rows.len());
                for (i, r) in rows.iter().enumerate() {
                    let s = r[j].as_str();
                    if is_na(s) {
                        values.push(f64::NAN);
                    } else {
                        values.push(parse_number(s).ok_or_else(|| {
                            Error::data(format!(
                                "non-numeric cell {s:?} in numeric column {:?} (row {})",
                                spec.name,
                                i + 1
                            ))
                        })?);
                    }
                }
                Column::numeric(spec.name.clone(), values)
            }
            ColumnKind::Categorical => Column {
                name: spec.name.clone(),
                data: ColumnData::Categorical(
                    rows.iter()
                        .map(|r| (!is_na(&r[j])).then(|| r[j].clone()))
                        .collect(),
                ),
            },
        };
        features.push(col);
    }
    let mut d = Dataset::new(features, None)?;
    d.n_rows = rows.len();
    Ok(d)
}

pub fn load_features_csv(path: impl AsRef<Path>, schema: &Schema, na_tokens: &[String]) -> Result<Dataset> {
    read_features_csv(open(path.as_ref())?, schema, na_tokens)
}

/// Reads a labelled CSV whose feature columns are parsed with the kinds in
/// `schema`. For classification the label set is the union of `known_labels`
/// and the labels found in the file, so a test split that lacks some
/// training class is still representable.
pub fn load_csv_like(
    path: impl AsRef<Path>,
    schema: &Schema,
    target: &str,
    known_labels: Option<&[String]>,
    na_tokens: &[String],
) -> Result<Dataset> {
    let path = path.as_ref();
    let mut d = load_features_csv(path, schema, na_tokens)?;
    let (header, rows) = read_records(open(path)?)?;
    let j = header
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::data(format!("target column {target:?} not in header")))?;
    if rows.iter().any(|r| na_tokens.contains(&r[j])) {
        return Err(Error::data(format!("target {target:?} has missing cells")));
    }
    let t = match known_labels {
        Some(known) => {
            let raw: Vec<&str> = rows.iter().map(|r| r[j].trim()).collect();
            let labels: Vec<String> = known
                .iter()
                .map(String::as_str)
                .chain(raw.iter().copied())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .map(str::to_string)
                .collect();
            let codes = raw
                .iter()
                .map(|s| labels.binary_search_by(|l| l.as_str().cmp(s)).unwrap())
                .collect();
            Target::Classes { labels, codes }
        }
        None => Target::Numeric(
            rows.iter()
                .map(|r| {
                    parse_number(&r[j])
                        .ok_or_else(|| Error::data(format!("non-numeric target cell {:?}", r[j])))
                })
                .collect::<Result<_>>()?,
        ),
    };
    d.target_name = Some(target.to_string());
    d.target = Some(t);
    Dataset::new(d.features, d.target_name.zip(d.target))
}

/// Train/validation partition of one dataset.
#[derive(Clone, Debug)]
pub struct SplitPair {
    pub train: Dataset,
    pub valid: Dataset,
    pub seed: u64,
    /// Source row indices, ascending.
    pub train_rows: Vec<usize>,
    pub valid_rows: Vec<usize>,
}

/// Largest-remainder allocation of `total` validation rows across classes,
/// never taking every row of a class.
fn stratified_quota(counts: &[usize], fraction: f64, total: usize) -> Vec<usize> {
    let exact: Vec<f64> = counts.iter().map(|&c| c as f64 * fraction).collect();
    let mut quota: Vec<usize> = exact
        .iter()
        .zip(counts)
        .map(|(e, &c)| (e.floor() as usize).min(c.saturating_sub(1)))
        .collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - quota[a] as f64;
        let rb = exact[b] - quota[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut assigned: usize = quota.iter().sum();
    while assigned < total {
        let before = assigned;
        for &c in &order {
            if assigned == total {
                break;
            }
            if quota[c] + 1 < counts[c] {
                quota[c] += 1;
                assigned += 1;
            }
        }
        if assigned == before {
            break;
        }
    }
    quota
}

/// Splits off `round(valid_fraction · n)` validation rows (clamped so both
/// parts are non-empty). Stratified splits allocate validation rows per class
/// by largest remainder. Deterministic in `seed`.
pub fn split_holdout(d: &Dataset, valid_fraction: f64, seed: u64, stratify: bool) -> Result<SplitPair> {
    if !(valid_fraction > 0.0 && valid_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "valid_fraction must lie in (0,1), got {valid_fraction}"
        )));
    }
    let n = d.n_rows();
    if n < 5 {
        return Err(Error::data(format!("holdout split needs at least 5 rows, found {n}")));
    }
    let n_valid = ((valid_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut valid_rows = match (stratify, d.target()) {
        (true, Some(Target::Classes { labels, codes })) => {
            let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); labels.len()];
            for (i, &c) in codes.iter().enumerate() {
                by_class[c].push(i);
            }
            if let Some((c, _)) = by_class.iter().enumerate().find(|(_, rows)| rows.len() == 1) {
                return Err(Error::data(format!(
                    "class {:?} has a single row; cannot stratify",
                    labels[c]
                )));
            }
            let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
            let quota = stratified_quota(&counts, valid_fraction, n_valid);
            let mut rows = Vec::with_capacity(n_valid);
            for (members, q) in by_class.iter_mut().zip(quota) {
                members.shuffle(&mut rng);
                rows.extend_from_slice(&members[..q]);
            }
            rows
        }
        _ => {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            all.truncate(n_valid);
            all
        }
    };
    valid_rows.sort_unstable();
    let mut in_valid = vec![false; n];
    for &i in &valid_rows {
        in_valid[i] = true;
    }
    let train_rows: Vec<usize> = (0..n).filter(|&i| !in_valid[i]).collect();
    Ok(SplitPair {
        train: d.select_rows(&train_rows),
        valid: d.select_rows(&valid_rows),
        seed,
        train_rows,
        valid_rows,
    })
}

/// Most frequent training label, ties broken by the lexicographically
/// smallest label.
pub fn majority_label(train: &Dataset) -> Result<String> {
    match train.target() {
        Some(Target::Classes { labels, codes }) => {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for &c in codes {
                *counts.entry(labels[c].as_str()).or_default() += 1;
            }
            let best = counts
                .iter()
                .fold(None::<(&str, usize)>, |acc, (&l, &n)| match acc {
                    Some((_, bn)) if bn >= n => acc,
                    _ => Some((l, n)),
                })
                .map(|(l, _)| l.to_string())
                .ok_or_else(|| Error::data("empty training set"))?;
            Ok(best)
        }
        Some(Target::Numeric(_)) => Err(Error::invalid("majority baseline needs a classification task")),
        None => Err(Error::data("training set has no target")),
    }
}

/// Misclassification rate of always predicting the training majority class.
pub fn majority_baseline(train: &Dataset, test: &Dataset) -> Result<f64> {
    let predicted = majority_label(train)?;
    match test.target() {
        Some(Target::Classes { labels, codes }) => {
            if codes.is_empty() {
                return Err(Error::data("empty test set"));
            }
            let wrong = codes.iter().filter(|&&c| labels[c] != predicted).count();
            Ok(wrong as f64 / codes.len() as f64)
        }
        Some(Target::Numeric(_)) => Err(Error::invalid("majority baseline needs a classification task")),
        None => Err(Error::data("test set has no target")),
    }
}
