//! Repeated-run benchmarking with bootstrap aggregation of the run results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, load_csv_like, majority_baseline, CsvOptions, Dataset, Target, Task, DEFAULT_NA_TOKENS};
use crate::error::{Error, Result};
use crate::metrics::{self, Measure, ProbMatrix};
use crate::pipeline::{autogbt_fit, autogbt_predict, AutoConfig, PipelineModel, Predictions};

/// How the values of one bootstrap sample are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Best of the sample, as if the runs had been made in parallel.
    #[default]
    Min,
    Mean,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Aggregation::Min),
            "mean" => Ok(Aggregation::Mean),
            _ => Err(Error::invalid(format!("unknown aggregation {s:?} (expected min or mean)"))),
        }
    }
}

/// `b` bootstrap samples of `size` values drawn with replacement from
/// `values`, each reduced with `agg`.
pub fn bootstrap_samples(values: &[f64], b: usize, size: usize, seed: u64, agg: Aggregation) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::invalid("no run values to aggregate"));
    }
    if b == 0 || size == 0 {
        return Err(Error::invalid("bootstrap count and sample size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = values.len();
    Ok((0..b)
        .map(|_| {
            let draws = (0..size).map(|_| values[rng.gen_range(0..r)]);
            match agg {
                Aggregation::Min => draws.fold(f64::INFINITY, f64::min),
                Aggregation::Mean => draws.sum::<f64>() / size as f64,
            }
        })
        .collect())
}

/// Median over `b` bootstrap samples (mean of the two central values for
/// even `b`).
pub fn bootstrap_aggregate(values: &[f64], b: usize, size: usize, seed: u64, agg: Aggregation) -> Result<f64> {
    let mut samples = bootstrap_samples(values, b, size, seed, agg)?;
    samples.sort_unstable_by(f64::total_cmp);
    let mid = b / 2;
    Ok(if b % 2 == 1 { samples[mid] } else { (samples[mid - 1] + samples[mid]) / 2.0 })
}

/// One row of a benchmark specification.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchEntry {
    pub name: String,
    pub train_path: PathBuf,
    pub test_path: PathBuf,
    pub target: String,
    pub measure: Option<Measure>,
}

/// Reads a tab-separated spec with columns `name, train_path, test_path,
/// target, measure` (measure may be empty). Relative paths resolve against
/// the spec file's directory.
pub fn read_bench_spec(path: impl AsRef<Path>) -> Result<Vec<BenchEntry>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new(""));
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_path(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::data(format!("benchmark spec lacks a {name:?} column")))
    };
    let (ni, tri, tei, ti) = (col("name")?, col("train_path")?, col("test_path")?, col("target")?);
    let mi = col("measure").ok();
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or("").trim().to_string();
        let measure = match mi.map(get).as_deref() {
            None | Some("") => None,
            Some(m) => Some(m.parse().map_err(|_| Error::data(format!("unknown measure {m:?}")))?),
        };
        entries.push(BenchEntry {
            name: get(ni),
            train_path: base.join(get(tri)),
            test_path: base.join(get(tei)),
            target: get(ti),
            measure,
        });
    }
    Ok(entries)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOptions {
    pub reps: usize,
    pub bootstrap: usize,
    pub size: usize,
    pub seed: u64,
    pub agg: Aggregation,
    /// Run the repetitions of one dataset concurrently.
    pub parallel: bool,
    pub na_tokens: Vec<String>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            reps: 25,
            bootstrap: 100_000,
            size: 4,
            seed: 1,
            agg: Aggregation::Min,
            parallel: true,
            na_tokens: DEFAULT_NA_TOKENS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub value: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub name: String,
    pub measure: Option<Measure>,
    /// Majority-class error for classification, error of the training mean
    /// for regression.
    pub baseline: Option<f64>,
    pub runs: Vec<RunRecord>,
    pub aggregated: Option<f64>,
    /// Set when the dataset could not be loaded or a run failed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub datasets: Vec<DatasetReport>,
}

/// Test-set value of `measure` for a fitted pipeline. Test labels never seen
/// in training count as errors (and get probability zero).
pub fn score_on_test(p: &PipelineModel, test: &Dataset, measure: Measure) -> Result<f64> {
    let preds = autogbt_predict(p, test)?;
    match (preds, test.target()) {
        (Predictions::Classes { labels, probabilities, class_names }, Some(Target::Classes { labels: names, codes })) => {
            match measure {
                Measure::Mmce => {
                    let truth: Vec<&str> = codes.iter().map(|&c| names[c].as_str()).collect();
                    let predicted: Vec<&str> = labels.iter().map(String::as_str).collect();
                    metrics::mmce(&predicted, &truth)
                }
                Measure::Logloss => {
                    let k = names.len();
                    let mut data = vec![0.0; probabilities.n_rows() * k];
                    for (j, name) in class_names.iter().enumerate() {
                        let to = names
                            .iter()
                            .position(|n| n == name)
                            .ok_or_else(|| Error::data(format!("class {name:?} missing from test labels")))?;
                        for (i, row) in probabilities.rows().enumerate() {
                            data[i * k + to] = row[j];
                        }
                    }
                    metrics::logloss(&ProbMatrix::new(k, data)?, codes)
                }
                Measure::Rmse => Err(Error::invalid("rmse needs a regression target")),
            }
        }
        (Predictions::Values(v), Some(Target::Numeric(y))) if measure == Measure::Rmse => metrics::rmse(&v, y),
        _ => Err(Error::invalid(format!("measure {measure} does not fit the test target"))),
    }
}

/// Loads a training CSV. A classification `measure` forces a numeric target
/// to be read as class labels.
pub fn load_training_csv(path: impl AsRef<Path>, opts: &CsvOptions, measure: Option<Measure>) -> Result<Dataset> {
    let path = path.as_ref();
    let d = load_csv(path, opts)?;
    let wants_classes = matches!(measure, Some(Measure::Mmce | Measure::Logloss));
    match d.target() {
        Some(Target::Numeric(y)) if wants_classes && opts.task_hint.is_none() => {
            let mut distinct: Vec<f64> = y.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            let hint = if distinct.len() == 2 { Task::Binary } else { Task::Multiclass };
            load_csv(path, &CsvOptions { task_hint: Some(hint), ..opts.clone() })
        }
        _ => Ok(d),
    }
}

fn baseline(train: &Dataset, test: &Dataset) -> Result<f64> {
    match (train.target(), test.target()) {
        (Some(Target::Numeric(y)), Some(Target::Numeric(t))) => {
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            metrics::rmse(&vec![mean; t.len()], t)
        }
        _ => majority_baseline(train, test),
    }
}

fn run_dataset(entry: &BenchEntry, cfg: &AutoConfig, opts: &BenchOptions) -> DatasetReport {
    let mut report = DatasetReport {
        name: entry.name.clone(),
        measure: entry.measure.or(cfg.measure),
        baseline: None,
        runs: Vec::new(),
        aggregated: None,
        error: None,
    };
    let loaded = (|| -> Result<(Dataset, Dataset, Measure)> {
        let csv_opts = CsvOptions { na_tokens: opts.na_tokens.clone(), ..CsvOptions::new(&entry.target) };
        let train = load_training_csv(&entry.train_path, &csv_opts, report.measure)?;
        let labels = train.target().and_then(Target::labels);
        let test = load_csv_like(&entry.test_path, &train.schema(), &entry.target, labels, &opts.na_tokens)?;
        let task = train.task().expect("loaded with a target");
        let measure = AutoConfig { measure: report.measure, ..cfg.clone() }.resolve_measure(task)?;
        Ok((train, test, measure))
    })();
    let (train, test, measure) = match loaded {
        Ok(v) => v,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    report.measure = Some(measure);
    report.baseline = baseline(&train, &test).ok();

    let one = |r: usize| -> Result<RunRecord> {
        let seed = opts.seed + r as u64;
        let started = Instant::now();
        let run_cfg = AutoConfig { measure: Some(measure), seed, ..cfg.clone() };
        let model = autogbt_fit(&train, &run_cfg)?;
        let value = score_on_test(&model, &test, measure)?;
        Ok(RunRecord { seed, value, seconds: started.elapsed().as_secs_f64() })
    };
    let runs: Vec<Result<RunRecord>> = if opts.parallel {
        (1..=opts.reps).into_par_iter().map(one).collect()
    } else {
        (1..=opts.reps).map(one).collect()
    };
    for run in runs {
        match run {
            Ok(r) => report.runs.push(r),
            Err(e) => {
                report.error.get_or_insert(e.to_string());
            }
        }
    }
    let values: Vec<f64> = report.runs.iter().map(|r| r.value).collect();
    match bootstrap_aggregate(&values, opts.bootstrap, opts.size, opts.seed, opts.agg) {
        Ok(v) => report.aggregated = Some(v),
        Err(e) => {
            report.error.get_or_insert(e.to_string());
        }
    }
    report
}

/// Fits every dataset `opts.reps` times (seeds `seed+1 ..= seed+reps`) and
/// aggregates the test results. A dataset that fails is reported, not fatal.
pub fn run_benchmark(entries: &[BenchEntry], cfg: &AutoConfig, opts: &BenchOptions) -> Result<BenchmarkReport> {
    if opts.reps == 0 || opts.bootstrap == 0 || opts.size == 0 {
        return Err(Error::invalid("reps, bootstrap and size must be positive"));
    }
    cfg.validate()?;
    Ok(BenchmarkReport {
        datasets: entries.iter().map(|e| run_dataset(e, cfg, opts)).collect(),
    })
}

fn fmt_value(v: Option<f64>, measure: Option<Measure>) -> String {
    match (v, measure) {
        (None, _) => "NA".to_string(),
        (Some(v), Some(Measure::Mmce)) => format!("{:.2}", 100.0 * v),
        (Some(v), _) => format!("{v:.4}"),
    }
}

impl BenchmarkReport {
    const COLUMNS: [&'static str; 9] =
        ["name", "measure", "baseline", "aggregated", "min", "max", "runs", "mean_seconds", "status"];

    fn rows(&self) -> Vec<[String; 9]> {
        self.datasets
            .iter()
            .map(|d| {
                let values: Vec<f64> = d.runs.iter().map(|r| r.value).collect();
                let min = values.iter().copied().reduce(f64::min);
                let max = values.iter().copied().reduce(f64::max);
                let secs = (!d.runs.is_empty())
                    .then(|| d.runs.iter().map(|r| r.seconds).sum::<f64>() / d.runs.len() as f64);
                [
                    d.name.clone(),
                    d.measure.map_or("NA".into(), |m| m.to_string()),
                    fmt_value(d.baseline, d.measure),
                    fmt_value(d.aggregated, d.measure),
                    fmt_value(min, d.measure),
                    fmt_value(max, d.measure),
                    d.runs.len().to_string(),
                    secs.map_or("NA".into(), |s| format!("{s:.2}")),
                    d.error.clone().map_or("ok".into(), |e| e.replace(['\t', '\n'], " ")),
                ]
            })
            .collect()
    }

    /// Tab-separated report; classification errors are percentages.
    pub fn to_tsv(&self) -> String {
        let mut out = Self::COLUMNS.join("\t");
        out.push('\n');
        for row in self.rows() {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let rows = self.rows();
        let mut widths: Vec<usize> = Self::COLUMNS.iter().map(|c| c.len()).collect();
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let header = Self::COLUMNS.map(str::to_string);
        for row in std::iter::once(&header).chain(&rows) {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_runs() {
        for size in [1, 4] {
            assert_eq!(bootstrap_aggregate(&[0.1; 5], 101, size, 3, Aggregation::Min).unwrap(), 0.1);
        }
    }

    #[test]
    fn single_run() {
        assert_eq!(bootstrap_aggregate(&[0.37], 10, 4, 0, Aggregation::Mean).unwrap(), 0.37);
    }

    #[test]
    fn plain_bootstrap_median() {
        let v = bootstrap_aggregate(&[0.1, 0.2, 0.3], 100_000, 1, 7, Aggregation::Min).unwrap();
        assert!((v - 0.2).abs() <= 0.01);
    }

    #[test]
    fn even_count_averages_middle() {
        // two samples of one draw each from {0, 1}: find a seed giving one of each
        let seed = (0..100)
            .find(|&s| {
                let mut v = bootstrap_samples(&[0.0, 1.0], 2, 1, s, Aggregation::Min).unwrap();
                v.sort_by(f64::total_cmp);
                v == [0.0, 1.0]
            })
            .unwrap();
        assert_eq!(bootstrap_aggregate(&[0.0, 1.0], 2, 1, seed, Aggregation::Min).unwrap(), 0.5);
    }

    #[test]
    fn rejects_empty() {
        assert!(bootstrap_aggregate(&[], 10, 4, 0, Aggregation::Min).is_err());
        assert!(bootstrap_aggregate(&[1.0], 0, 4, 0, Aggregation::Min).is_err());
    }

    #[test]
    fn parses_aggregation() {
        assert_eq!("mean".parse::<Aggregation>().unwrap(), Aggregation::Mean);
        assert!("max".parse::<Aggregation>().is_err());
    }
}
