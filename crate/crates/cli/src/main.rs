use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fastfood_ensemble::dataio::{
    concat_features, read_csv, read_features, split_features, stratified_subsample, synth_mixture, write_csv,
    write_features, FeatureMatrix, SplitSpec,
};
use fastfood_ensemble::ensemble::{train_ensemble, EnsembleConfig, EnsembleModel, NonlinearityKind, Weighting};
use fastfood_ensemble::fastfood::ScaleMode;
use fastfood_ensemble::harness::{bench_projection, evaluate, grid_search, GridSpec, KeyValues};
use fastfood_ensemble::tree::{argmax, TreeParams};
use fastfood_ensemble::{Error, Result};

#[derive(Parser)]
#[command(name = "ffens", version, about = "Fastfood random-subspace tree ensembles")]
struct Cli {
    /// Worker threads (defaults to DFEL_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled Gaussian-mixture feature file.
    Synth(SynthArgs),
    /// Keep exactly n rows per class.
    Subsample(SubsampleArgs),
    /// Stratified train/validation/test split.
    Split(SplitArgs),
    /// Concatenate feature files column-wise, in argument order.
    Concat(ConcatArgs),
    /// Train an ensemble and write a model file.
    Train(TrainArgs),
    /// Write per-row predictions.
    Predict(PredictArgs),
    /// Score a model on a labeled feature file.
    Eval(EvalArgs),
    /// Cross-validated search over D and N.
    Gridsearch(GridArgs),
    /// Time Fastfood projection against a dense multiply.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    #[arg(long, default_value_t = 2048)]
    m: usize,
    #[arg(long, default_value_t = 15.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SubsampleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    n_per_class: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.6)]
    train: f64,
    #[arg(long, default_value_t = 0.2)]
    val: f64,
    #[arg(long, default_value_t = 0.2)]
    test: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Split the rows as one pool instead of per class.
    #[arg(long)]
    no_stratify: bool,
    #[arg(long)]
    out_train: PathBuf,
    #[arg(long)]
    out_val: Option<PathBuf>,
    #[arg(long)]
    out_test: PathBuf,
}

#[derive(Args)]
struct ConcatArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Projection dimension D.
    #[arg(long = "d", default_value_t = 100)]
    d_out: usize,
    /// Ensemble size N.
    #[arg(long = "n", default_value_t = 10)]
    n_members: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = NonlinearityArg::Identity)]
    nonlinearity: NonlinearityArg,
    #[arg(long, value_enum, default_value_t = ScaleArg::Chi)]
    s_mode: ScaleArg,
    #[arg(long, value_enum, default_value_t = WeightingArg::ValidationAccuracy)]
    weighting: WeightingArg,
    #[arg(long, default_value_t = 10)]
    max_depth: usize,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
    #[arg(long, default_value_t = 0.0)]
    min_impurity_decrease: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum NonlinearityArg {
    Identity,
    RbfCos,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Chi,
    Unit,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    ValidationAccuracy,
    Uniform,
}

impl ModelArgs {
    fn config(&self) -> EnsembleConfig {
        EnsembleConfig {
            n_members: self.n_members,
            d_out: self.d_out,
            sigma: self.sigma,
            nonlinearity: match self.nonlinearity {
                NonlinearityArg::Identity => NonlinearityKind::Identity,
                NonlinearityArg::RbfCos => NonlinearityKind::RbfCos,
            },
            scale_mode: match self.s_mode {
                ScaleArg::Chi => ScaleMode::Chi,
                ScaleArg::Unit => ScaleMode::Unit,
            },
            tree: TreeParams {
                max_depth: self.max_depth,
                min_samples_leaf: self.min_samples_leaf,
                min_impurity_decrease: self.min_impurity_decrease,
            },
            weighting: match self.weighting {
                WeightingArg::ValidationAccuracy => Weighting::ValidationAccuracy,
                WeightingArg::Uniform => Weighting::Uniform,
            },
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    val: Option<PathBuf>,
    /// Evaluate on this labeled file right after training.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = GridSpec::default().d_values)]
    d_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = GridSpec::default().n_values)]
    n_values: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 8192)]
    m: usize,
    #[arg(long, default_value_t = 8192)]
    d: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allow dense matrices above the built-in memory cap.
    #[arg(long)]
    dense_cap_override: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

fn load(path: &Path) -> Result<FeatureMatrix> {
    let fm = if is_csv(path) { read_csv(path) } else { read_features(path) };
    fm.map_err(|e| with_path(e, path))
}

fn store(fm: &FeatureMatrix, path: &Path) -> Result<()> {
    let done = if is_csv(path) { write_csv(fm, path) } else { write_features(fm, path) };
    done.map_err(|e| with_path(e, path))
}

fn print_report(pairs: &[(String, String)], format: Format) {
    match format {
        Format::Text => {
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in pairs {
                println!("{k:<width$}  {v}");
            }
        }
        Format::Csv => {
            println!("key,value");
            for (k, v) in pairs {
                println!("{k},{v}");
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => {
            let fm = synth_mixture(a.classes, a.per_class, a.m, a.separation, a.seed)?;
            store(&fm, &a.out)?;
            println!("wrote {} rows x {} dims to {}", fm.n_samples(), fm.n_dims(), a.out.display());
        }
        Command::Subsample(a) => {
            let fm = stratified_subsample(&load(&a.input)?, a.n_per_class, a.seed)?;
            store(&fm, &a.out)?;
            println!("wrote {} rows to {}", fm.n_samples(), a.out.display());
        }
        Command::Split(a) => {
            let spec = SplitSpec::new(a.train, a.val, a.test, a.seed, !a.no_stratify)?;
            let parts = split_features(&load(&a.input)?, &spec)?;
            store(&parts.train, &a.out_train)?;
            store(&parts.test, &a.out_test)?;
            if let Some(p) = &a.out_val {
                store(&parts.val, p)?;
            } else if parts.val.n_samples() > 0 {
                return Err(Error::Parameter("validation fraction is nonzero but --out-val is missing".into()));
            }
            println!(
                "train {} / val {} / test {} rows",
                parts.train.n_samples(),
                parts.val.n_samples(),
                parts.test.n_samples()
            );
        }
        Command::Concat(a) => {
            let parts = a.inputs.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
            let fm = concat_features(&parts)?;
            store(&fm, &a.out)?;
            println!("wrote {} rows x {} dims to {}", fm.n_samples(), fm.n_dims(), a.out.display());
        }
        Command::Train(a) => {
            let train = load(&a.input)?;
            let val = a.val.as_deref().map(load).transpose()?;
            let test = a.test.as_deref().map(load).transpose()?;
            let start = Instant::now();
            let model = train_ensemble(&train, val.as_ref(), &a.model.config(), a.seed)?;
            let train_time = start.elapsed().as_secs_f64();
            model.save(&a.out)?;
            let mut pairs = vec![
                ("model".to_string(), a.out.display().to_string()),
                ("members".into(), model.members().len().to_string()),
                ("d_out".into(), model.config().d_out.to_string()),
                ("m_in".into(), model.m_in().to_string()),
            ];
            match test {
                Some(test) => {
                    let mut report = evaluate(&model, &test)?;
                    report.train_time = train_time;
                    pairs.extend(report.key_values());
                }
                None => pairs.push(("train_time".into(), format!("{train_time:.6}"))),
            }
            print_report(&pairs, a.format);
        }
        Command::Predict(a) => {
            let model = EnsembleModel::load(&a.model).map_err(|e| with_path(e, &a.model))?;
            let fm = load(&a.input)?;
            let probs = model.predict_proba_all(&fm)?;
            let mut out = String::from("row,label");
            for c in model.class_labels() {
                out.push_str(&format!(",p_{c}"));
            }
            out.push('\n');
            for (i, p) in probs.iter().enumerate() {
                out.push_str(&format!("{i},{}", model.class_labels()[argmax(p)]));
                for v in p {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
            match &a.out {
                Some(path) => std::fs::write(path, out)?,
                None => print!("{out}"),
            }
        }
        Command::Eval(a) => {
            let model = EnsembleModel::load(&a.model).map_err(|e| with_path(e, &a.model))?;
            let report = evaluate(&model, &load(&a.input)?)?;
            print_report(&report.key_values(), a.format);
        }
        Command::Gridsearch(a) => {
            let train = load(&a.input)?;
            let grid = GridSpec { d_values: a.d_values, n_values: a.n_values, folds: a.folds };
            let result = grid_search(&train, &grid, &a.model.config(), a.seed)?;
            match a.format {
                Format::Text => {
                    println!("{:>8} {:>6} {:>10}  best", "D", "N", "mean_acc");
                    for (i, c) in result.cells.iter().enumerate() {
                        let flag = if i == result.best_index { "  *" } else { "" };
                        println!("{:>8} {:>6} {:>10.6}{flag}", c.d_out, c.n_members, c.mean_accuracy);
                    }
                }
                Format::Csv => {
                    println!("d,n,mean_accuracy,best");
                    for (i, c) in result.cells.iter().enumerate() {
                        println!("{},{},{},{}", c.d_out, c.n_members, c.mean_accuracy, i == result.best_index);
                    }
                }
            }
        }
        Command::Bench(a) => {
            let report = bench_projection(a.m, a.d, a.reps, a.seed, a.dense_cap_override)?;
            print_report(&report.key_values(), a.format);
        }
    }
    Ok(())
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").replace('"', "'")
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let from_env = std::env::var("DFEL_THREADS").ok().map(|v| {
        v.trim().parse::<usize>().map_err(|_| Error::Parameter(format!("DFEL_THREADS='{v}' is not a count")))
    });
    let threads = match (flag, from_env) {
        (Some(n), _) => Some(n),
        (None, Some(n)) => Some(n?),
        (None, None) => None,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Parameter("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Parameter(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error kind=usage message=\"{}\"", one_line(first));
            return ExitCode::from(2);
        }
    };
    let result = configure_threads(cli.threads).and_then(|()| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={} message=\"{}\"", e.kind(), one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}
