use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use autoboost::bench::{load_training_csv, read_bench_spec, run_benchmark, Aggregation, BenchOptions};
use autoboost::data::{load_features_csv, CsvOptions, Task, DEFAULT_NA_TOKENS};
use autoboost::metrics::Measure;
use autoboost::pipeline::{autogbt_fit, autogbt_predict, AutoConfig, PipelineModel, Predictions};
use autoboost::Error;

#[derive(Parser)]
#[command(name = "autoboost", version, about = "Automatic gradient boosting for tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tune and fit a pipeline on a labelled CSV file.
    Fit(FitArgs),
    /// Predict a CSV file with a saved pipeline.
    Predict(PredictArgs),
    /// Repeated fits over the datasets listed in a TSV spec.
    Benchmark(BenchArgs),
}

#[derive(Args)]
struct Common {
    /// Tuning budget (number of evaluated configurations).
    #[arg(long, default_value_t = 160)]
    budget: usize,
    /// Wall-clock limit for tuning, in seconds.
    #[arg(long = "time-limit", default_value_t = 3600.0)]
    time_limit: f64,
    /// Cell values read as missing (repeatable).
    #[arg(long = "na", value_name = "TOKEN")]
    na: Vec<String>,
}

impl Common {
    fn na_tokens(&self) -> Vec<String> {
        if self.na.is_empty() {
            DEFAULT_NA_TOKENS.iter().map(|s| s.to_string()).collect()
        } else {
            self.na.clone()
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    target: String,
    /// mmce, logloss or rmse. Defaults to mmce for classification and rmse
    /// for regression.
    #[arg(long)]
    measure: Option<Measure>,
    /// Force the task instead of inferring it from the target column.
    #[arg(long)]
    task: Option<Task>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "valid-fraction", default_value_t = 0.2)]
    valid_fraction: f64,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
    /// Also write the tuning history as CSV.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "na", value_name = "TOKEN")]
    na: Vec<String>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 25)]
    reps: usize,
    #[arg(long, default_value_t = 100_000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 4)]
    size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// How each bootstrap sample is reduced: min or mean.
    #[arg(long, default_value = "min")]
    agg: Aggregation,
    /// Run repetitions one at a time.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 1,
        Error::Io { .. }
        | Error::Csv(_)
        | Error::Data(_)
        | Error::Schema(_)
        | Error::Version { .. }
        | Error::Checksum
        | Error::Bundle(_) => 2,
        Error::Numerical(_) | Error::BudgetExhausted(_) => 3,
    }
}

fn write_file(path: &Path, contents: &str) -> autoboost::Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn fit(args: FitArgs) -> autoboost::Result<()> {
    let na_tokens = args.common.na_tokens();
    let opts = CsvOptions { task_hint: args.task, na_tokens, ..CsvOptions::new(&args.target) };
    let d = load_training_csv(&args.data, &opts, args.measure)?;
    let cfg = AutoConfig {
        measure: args.measure,
        budget: args.common.budget,
        deadline_secs: args.common.time_limit,
        valid_fraction: args.valid_fraction,
        seed: args.seed,
        ..AutoConfig::default()
    };
    let p = autogbt_fit(&d, &cfg)?;
    p.save(&args.out)?;
    if let Some(path) = &args.history {
        write_file(path, &p.history.history_csv()?)?;
    }
    eprintln!(
        "{} task, {} evaluations, validation {} = {:.6}, {} rounds",
        p.task,
        p.history.evaluated.len(),
        p.measure,
        p.validation_value,
        p.model.best_iteration
    );
    Ok(())
}

fn predict(args: PredictArgs) -> autoboost::Result<()> {
    let p = PipelineModel::load(&args.model)?;
    let na_tokens = if args.na.is_empty() {
        DEFAULT_NA_TOKENS.iter().map(|s| s.to_string()).collect()
    } else {
        args.na
    };
    let d = load_features_csv(&args.data, p.schema(), &na_tokens)?;
    let preds = autogbt_predict(&p, &d)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    match &preds {
        Predictions::Classes { labels, probabilities, class_names } => {
            let mut header = vec!["prediction".to_string()];
            header.extend(class_names.iter().map(|c| format!("prob_{c}")));
            w.write_record(&header)?;
            for (label, row) in labels.iter().zip(probabilities.rows()) {
                let mut rec = vec![label.clone()];
                rec.extend(row.iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
        }
        Predictions::Values(v) => {
            w.write_record(["prediction"])?;
            for x in v {
                w.write_record([x.to_string()])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    write_file(&args.out, &String::from_utf8_lossy(&bytes))
}

fn benchmark(args: BenchArgs) -> autoboost::Result<()> {
    let entries = read_bench_spec(&args.spec)?;
    let cfg = AutoConfig {
        budget: args.common.budget,
        deadline_secs: args.common.time_limit,
        ..AutoConfig::default()
    };
    let opts = BenchOptions {
        reps: args.reps,
        bootstrap: args.bootstrap,
        size: args.size,
        seed: args.seed,
        agg: args.agg,
        parallel: !args.sequential,
        na_tokens: args.common.na_tokens(),
    };
    let report = run_benchmark(&entries, &cfg, &opts)?;
    print!("{}", report.to_table());
    write_file(&args.out, &report.to_tsv())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Benchmark(a) => benchmark(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("autoboost: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
