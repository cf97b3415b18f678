//! Command-line front end: train, predict, evaluate, benchmark, and
//! optimize against models stored on disk.
//!
//! Exit codes: 0 on success, 1 for runtime failures (e.g. divergence),
//! 2 for usage and file errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ndarray::Array3;

use jenn::benchmarks::{
    metrics, run_noisy_partials_study, run_runtime_scaling, run_validation_suite,
    NoisyPartialsConfig, RuntimeScalingConfig, ValidationConfig,
};
use jenn::error::{JennError, Result};
use jenn::io::{
    read_dataset_csv, read_inputs_csv, write_cost_history_csv, write_predictions_csv,
    write_trace_csv,
};
use jenn::optimizer::OptimizerKind;
use jenn::sbo::{
    minimize, run_rosenbrock_study, surrogate_objective, MinimizeSettings, OptProblem,
    RosenbrockStudyConfig,
};
use jenn::training::{polish_weights, PolishConfig};
use jenn::{train, train_from, Architecture, BatchSize, Dataset, Model, TrainingConfig};

#[derive(Parser)]
#[command(
    name = "jenn",
    about = "Train and use gradient-enhanced neural network surrogates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a dataset CSV.
    Train(TrainArgs),
    /// Predict values and partials at points from a CSV.
    Predict(PredictArgs),
    /// Score a model against a labeled dataset.
    Evaluate(EvaluateArgs),
    /// Run a benchmark study and write its result tables.
    Bench(BenchArgs),
    /// Minimize a trained surrogate inside box bounds.
    Sbo(SboArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV (columns x1..x{nx}, y1..y{ny}, optional dy{k}_dx{j}).
    #[arg(long)]
    data: PathBuf,
    /// Layer sizes, e.g. "1,12,12,1". Input/output sizes must match the
    /// dataset.
    #[arg(long)]
    arch: String,
    /// Output model file.
    #[arg(long)]
    model: PathBuf,
    /// Optional cost-history CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Learning rate.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// L2 regularization strength.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1000)]
    epochs: usize,
    /// "full" or a mini-batch size.
    #[arg(long, default_value = "full")]
    batch_size: String,
    /// "adam" or "gd".
    #[arg(long, default_value = "adam")]
    optimizer: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Value-error weights: scalar, per-output list "b1,b2,...", or a
    /// CSV path with y{k} columns (one row per example).
    #[arg(long)]
    beta: Option<String>,
    /// Partial-error weights: scalar, per-output list, or a CSV path
    /// with dy{k}_dx{j} columns. Applied on top of the presence mask,
    /// so partials absent from the dataset stay unweighted.
    #[arg(long)]
    gamma: Option<String>,
    /// Enable polishing with this gamma amplification factor.
    #[arg(long)]
    polish_eta: Option<f64>,
    /// Polishing slope scale.
    #[arg(long, default_value_t = 0.1)]
    polish_epsilon: f64,
    /// Extra epochs for the polishing stage (defaults to --epochs).
    #[arg(long)]
    polish_epochs: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Input CSV with x1..x{nx} columns.
    #[arg(long)]
    input: PathBuf,
    /// Output CSV with x, y, and dy{k}_dx{j} columns.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Labeled dataset CSV.
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// One of: validation, noisy-partials, runtime, rosenbrock.
    experiment: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scales epoch budgets for quicker smoke runs.
    #[arg(long, default_value_t = 1.0)]
    epoch_scale: f64,
    /// Output directory (default: $JENN_OUT_DIR, then the current
    /// directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SboArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated lower bounds, one per input.
    #[arg(long, allow_hyphen_values = true)]
    lower: String,
    /// Comma-separated upper bounds, one per input.
    #[arg(long, allow_hyphen_values = true)]
    upper: String,
    /// Comma-separated start point.
    #[arg(long, allow_hyphen_values = true)]
    start: String,
    #[arg(long, default_value_t = 1e-6)]
    gtol: f64,
    #[arg(long, default_value_t = 1e-10)]
    xtol: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    /// Optional iterate trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Sbo(args) => cmd_sbo(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            // Usage and file problems exit 2, runtime failures 1.
            match e {
                JennError::Io(_) | JennError::Csv(_) | JennError::Parse(_)
                | JennError::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn parse_float_list(spec: &str, what: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                JennError::Parse(format!("cannot parse \"{}\" in {what}", s.trim()))
            })
        })
        .collect()
}

/// Weight spec: scalar, per-output comma list, or a CSV path.
enum WeightSpec {
    Scalar(f64),
    PerOutput(Vec<f64>),
    File(PathBuf),
}

fn parse_weight_spec(spec: &str) -> WeightSpec {
    if let Ok(v) = spec.trim().parse::<f64>() {
        return WeightSpec::Scalar(v);
    }
    if let Ok(list) = parse_float_list(spec, "weight list") {
        return WeightSpec::PerOutput(list);
    }
    WeightSpec::File(PathBuf::from(spec))
}

fn apply_beta(data: &mut Dataset, spec: &str) -> Result<()> {
    let (n_y, m) = data.beta.dim();
    match parse_weight_spec(spec) {
        WeightSpec::Scalar(v) => data.beta.mapv_inplace(|b| b * v),
        WeightSpec::PerOutput(list) => {
            if list.len() != n_y {
                return Err(JennError::InvalidArgument(format!(
                    "--beta list has {} entries, dataset has {n_y} outputs",
                    list.len()
                )));
            }
            for (k, &v) in list.iter().enumerate() {
                for t in 0..m {
                    data.beta[[k, t]] *= v;
                }
            }
        }
        WeightSpec::File(path) => {
            let table = read_dataset_csv(&path)?;
            if table.y.dim() != (n_y, m) {
                return Err(JennError::ShapeMismatch(format!(
                    "beta file {} has shape {:?}, dataset needs ({n_y}, {m})",
                    path.display(),
                    table.y.dim()
                )));
            }
            data.beta = &data.beta * &table.y;
        }
    }
    if data.beta.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(JennError::InvalidArgument(
            "beta weights must be finite and >= 0".into(),
        ));
    }
    Ok(())
}

fn apply_gamma(data: &mut Dataset, spec: &str) -> Result<()> {
    let (n_y, n_x, m) = data.gamma.dim();
    match parse_weight_spec(spec) {
        WeightSpec::Scalar(v) => data.scale_gamma(v),
        WeightSpec::PerOutput(list) => {
            if list.len() != n_y {
                return Err(JennError::InvalidArgument(format!(
                    "--gamma list has {} entries, dataset has {n_y} outputs",
                    list.len()
                )));
            }
            for (k, &v) in list.iter().enumerate() {
                for j in 0..n_x {
                    for t in 0..m {
                        data.gamma[[k, j, t]] *= v;
                    }
                }
            }
        }
        WeightSpec::File(path) => {
            let table = read_gamma_table(&path, n_y, n_x, m)?;
            data.gamma = &data.gamma * &table;
        }
    }
    if data.gamma.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(JennError::InvalidArgument(
            "gamma weights must be finite and >= 0".into(),
        ));
    }
    Ok(())
}

/// Reads a gamma mask/weight table: CSV with dy{k}_dx{j} columns, one
/// row per example. Columns absent from the file default to weight 1.
fn read_gamma_table(path: &Path, n_y: usize, n_x: usize, m: usize) -> Result<Array3<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| JennError::Parse(format!("cannot open {}: {e}", path.display())))?;
    let mut cols = Vec::new();
    for (pos, field) in reader.headers()?.iter().enumerate() {
        let field = field.trim();
        let parsed = field
            .strip_prefix("dy")
            .and_then(|rest| rest.split_once("_dx"))
            .and_then(|(k, j)| Some((k.parse::<usize>().ok()?, j.parse::<usize>().ok()?)));
        match parsed {
            Some((k, j)) if (1..=n_y).contains(&k) && (1..=n_x).contains(&j) => {
                cols.push((k - 1, j - 1, pos));
            }
            _ => {
                return Err(JennError::Parse(format!(
                    "{}: unrecognized gamma column \"{field}\"",
                    path.display()
                )));
            }
        }
    }
    let mut table = Array3::ones((n_y, n_x, m));
    let mut rows = 0usize;
    for (t, record) in reader.records().enumerate() {
        let record = record?;
        if t >= m {
            rows += 1;
            continue;
        }
        for &(k, j, pos) in &cols {
            let v = record[pos].trim().parse::<f64>().map_err(|_| {
                JennError::Parse(format!(
                    "{}: line {}: bad gamma value \"{}\"",
                    path.display(),
                    t + 2,
                    record[pos].trim()
                ))
            })?;
            table[[k, j, t]] = v;
        }
        rows += 1;
    }
    if rows != m {
        return Err(JennError::ShapeMismatch(format!(
            "gamma file {} has {rows} rows, dataset has {m} examples",
            path.display()
        )));
    }
    Ok(table)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut data = read_dataset_csv(&args.data)?;
    let arch = Architecture::parse(&args.arch)?;
    if arch.num_inputs() != data.num_inputs() || arch.num_outputs() != data.num_outputs() {
        return Err(JennError::InvalidArgument(format!(
            "architecture {} expects {} inputs / {} outputs, dataset has {} / {}",
            args.arch,
            arch.num_inputs(),
            arch.num_outputs(),
            data.num_inputs(),
            data.num_outputs()
        )));
    }
    if let Some(spec) = &args.beta {
        apply_beta(&mut data, spec)?;
    }
    if let Some(spec) = &args.gamma {
        apply_gamma(&mut data, spec)?;
    }

    let batch_size = match args.batch_size.trim() {
        "full" => BatchSize::Full,
        s => BatchSize::Size(s.parse::<usize>().map_err(|_| {
            JennError::InvalidArgument(format!(
                "--batch-size must be \"full\" or a positive integer, got \"{s}\""
            ))
        })?),
    };
    let config = TrainingConfig {
        alpha: args.alpha,
        lambda: args.lambda,
        epochs: args.epochs,
        batch_size,
        optimizer: args.optimizer.parse::<OptimizerKind>()?,
        seed: args.seed,
        ..Default::default()
    };
    let (model, mut report) = train(&data, &arch, &config)?;

    let model = if let Some(eta) = args.polish_eta {
        let polish = PolishConfig { eta, epsilon: args.polish_epsilon };
        let weights = polish_weights(&data.j, &polish)?;
        let mut polished = data.clone();
        // Keep absent partials silent: amplified weights apply only
        // where the mask is already nonzero.
        polished.gamma = &weights * &data.gamma.mapv(|g| if g > 0.0 { 1.0 } else { 0.0 });
        let polish_config = TrainingConfig {
            epochs: args.polish_epochs.unwrap_or(args.epochs),
            ..config
        };
        let (model, polish_report) =
            train_from(&polished, &arch, &polish_config, Some(model.parameters().clone()))?;
        report.cost_history.extend(polish_report.cost_history);
        report.final_cost = polish_report.final_cost;
        model
    } else {
        model
    };

    model.save(&args.model)?;
    if let Some(path) = &args.history {
        write_cost_history_csv(path, &report.cost_history)?;
    }
    println!(
        "trained {} on {} examples: final cost {:.6e} after {} epochs",
        args.arch,
        data.num_examples(),
        report.final_cost,
        report.cost_history.len()
    );
    println!("model written to {}", args.model.display());
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let x = read_inputs_csv(&args.input)?;
    if x.nrows() != model.architecture().num_inputs() {
        return Err(JennError::ShapeMismatch(format!(
            "input has {} columns x1..x{}, model expects {}",
            x.nrows(),
            x.nrows(),
            model.architecture().num_inputs()
        )));
    }
    let (y, j) = model.predict(&x)?;
    write_predictions_csv(&args.output, &x, &y, &j)?;
    println!(
        "wrote {} predictions to {}",
        x.ncols(),
        args.output.display()
    );
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let data = read_dataset_csv(&args.data)?;
    if data.num_inputs() != model.architecture().num_inputs()
        || data.num_outputs() != model.architecture().num_outputs()
    {
        return Err(JennError::ShapeMismatch(format!(
            "dataset is {} -> {}, model is {} -> {}",
            data.num_inputs(),
            data.num_outputs(),
            model.architecture().num_inputs(),
            model.architecture().num_outputs()
        )));
    }
    let (y_pred, _) = model.predict(&data.x)?;
    println!("{:<8} {:>12} {:>12}", "output", "r_squared", "error_std");
    for k in 0..data.num_outputs() {
        let truth: Vec<f64> = data.y.row(k).to_vec();
        let pred: Vec<f64> = y_pred.row(k).to_vec();
        let (r2, std) = metrics(&truth, &pred)?;
        println!("y{:<7} {r2:>12.6} {std:>12.6e}", k + 1);
    }
    Ok(())
}

fn out_dir(arg: Option<PathBuf>) -> Result<PathBuf> {
    let dir = arg
        .or_else(|| std::env::var_os("JENN_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let dir = out_dir(args.out_dir.clone())?;
    match args.experiment.as_str() {
        "validation" => bench_validation(&args, &dir),
        "noisy-partials" => bench_noisy_partials(&args, &dir),
        "runtime" => bench_runtime(&args, &dir),
        "rosenbrock" => bench_rosenbrock(&args, &dir),
        other => Err(JennError::InvalidArgument(format!(
            "unknown experiment \"{other}\"; valid names: validation, noisy-partials, runtime, rosenbrock"
        ))),
    }
}

fn bench_validation(args: &BenchArgs, dir: &Path) -> Result<()> {
    let config = ValidationConfig { seed: args.seed, epoch_scale: args.epoch_scale };
    let results = run_validation_suite(&config, Some(dir))?;
    let path = dir.join("validation_results.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["function", "variant", "samples", "r_squared", "error_std", "runtime_seconds"])?;
    for r in &results {
        w.write_record([
            r.function.clone(),
            r.variant.clone(),
            r.samples.to_string(),
            format!("{}", r.r_squared),
            format!("{}", r.error_std),
            format!("{}", r.runtime_seconds),
        ])?;
    }
    w.flush()?;
    println!("{:<12} {:>8} {:>8} {:>12} {:>12}", "function", "variant", "samples", "r_squared", "error_std");
    for r in &results {
        println!(
            "{:<12} {:>8} {:>8} {:>12.6} {:>12.4e}",
            r.function, r.variant, r.samples, r.r_squared, r.error_std
        );
    }
    println!("results written to {}", path.display());
    Ok(())
}

fn bench_noisy_partials(args: &BenchArgs, dir: &Path) -> Result<()> {
    let config = NoisyPartialsConfig {
        seed: args.seed,
        epochs: (8000.0 * args.epoch_scale).round() as usize,
        ..Default::default()
    };
    let curve = run_noisy_partials_study(&config)?;
    let path = dir.join("noisy_partials.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["step", "mean_fd_error_pct", "jenn_r_squared", "nn_r_squared"])?;
    for p in &curve {
        w.write_record([
            format!("{}", p.step),
            format!("{}", p.mean_fd_error_pct),
            format!("{}", p.jenn_r_squared),
            format!("{}", p.nn_r_squared),
        ])?;
    }
    w.flush()?;
    println!("{:>10} {:>12} {:>10} {:>10}", "step", "fd_err_pct", "jenn_r2", "nn_r2");
    for p in &curve {
        println!(
            "{:>10.4} {:>12.2} {:>10.4} {:>10.4}",
            p.step, p.mean_fd_error_pct, p.jenn_r_squared, p.nn_r_squared
        );
    }
    println!("results written to {}", path.display());
    Ok(())
}

fn bench_runtime(args: &BenchArgs, dir: &Path) -> Result<()> {
    let config = RuntimeScalingConfig { seed: args.seed, ..Default::default() };
    let result = run_runtime_scaling(&config)?;
    let path = dir.join("runtime_scaling.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["samples", "per_epoch_seconds"])?;
    for (m, t) in result.sizes.iter().zip(&result.per_epoch_seconds) {
        w.write_record([m.to_string(), format!("{t}")])?;
    }
    w.flush()?;
    println!("{:>8} {:>18}", "samples", "sec_per_epoch");
    for (m, t) in result.sizes.iter().zip(&result.per_epoch_seconds) {
        println!("{m:>8} {t:>18.6e}");
    }
    println!(
        "linear fit: {:.3e} s/sample + {:.3e} s, R^2 = {:.4}",
        result.slope, result.intercept, result.linear_fit_r_squared
    );
    println!("results written to {}", path.display());
    Ok(())
}

fn bench_rosenbrock(args: &BenchArgs, dir: &Path) -> Result<()> {
    let config = RosenbrockStudyConfig {
        seed: args.seed,
        epochs: (10000.0 * args.epoch_scale).round() as usize,
        polish_epochs: (30000.0 * args.epoch_scale).round() as usize,
        ..Default::default()
    };
    let result = run_rosenbrock_study(&config)?;
    println!("{:<15} {:>10} {:>14} {:>16}", "objective", "iters", "final_value", "dist_to_(1,1)");
    for ((name, trace), dist) in result.traces.iter().zip(&result.distances) {
        let path = dir.join(format!("rosenbrock_trace_{name}.csv"));
        write_trace_csv(&path, trace)?;
        println!(
            "{:<15} {:>10} {:>14.6e} {:>16.6e}",
            name,
            trace.iterates.len() - 1,
            trace.final_value(),
            dist
        );
    }
    for (name, spread) in &result.dispersion {
        println!("{name}: final-point dispersion over random starts {spread:.4}");
    }
    println!("traces written to {}", dir.display());
    Ok(())
}

fn cmd_sbo(args: SboArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let lower = parse_float_list(&args.lower, "--lower")?;
    let upper = parse_float_list(&args.upper, "--upper")?;
    let start = parse_float_list(&args.start, "--start")?;
    if lower.len() != upper.len() {
        return Err(JennError::InvalidArgument(format!(
            "--lower has {} entries, --upper has {}",
            lower.len(),
            upper.len()
        )));
    }
    let problem = OptProblem {
        objective: surrogate_objective(&model)?,
        bounds: lower.into_iter().zip(upper).collect(),
        x0: start,
    };
    let settings = MinimizeSettings {
        gtol: args.gtol,
        xtol: args.xtol,
        max_iter: args.max_iter,
    };
    let trace = minimize(&problem, &settings)?;
    let point: Vec<String> = trace.final_point().iter().map(|v| format!("{v:.6}")).collect();
    println!(
        "minimum {:.6e} at [{}] after {} iterations ({:?})",
        trace.final_value(),
        point.join(", "),
        trace.iterates.len() - 1,
        trace.termination_reason
    );
    if let Some(path) = &args.trace {
        write_trace_csv(path, &trace)?;
        println!("trace written to {}", path.display());
    }
    Ok(())
}
