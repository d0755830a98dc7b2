use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use supersparse::data::{load_csv, WeightMode};
use supersparse::experiment::{
    best_point, cross_validate, metrics_csv, path_csv, regularization_path, train, OneOrMany, OutputDir, RunConfig,
};
use supersparse::formulate::{ConstraintSpec, SlimParams};
use supersparse::reduce::{analyze, epsilon_bounds};
use supersparse::scoring::{render_markdown, render_table, ScoringSystem};
use supersparse::theory::{coprime_count, coprime_density, farey_count, full_count, occam_bound, sparse_hypothesis_count};
use supersparse::{Error, Result};

#[derive(Parser)]
#[command(name = "slim", version, about = "Sparse integer scoring systems by exact 0-1 loss minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model on all of the data.
    Train(RunArgs),
    /// Stratified k-fold cross-validation.
    Cv(RunArgs),
    /// Final model and cross-validation for each C0.
    Path(RunArgs),
    /// LP-based data reduction.
    Reduce(ReduceArgs),
    /// Generalization bounds and lattice counts.
    Bounds(BoundsArgs),
    /// Print a saved model as a scoring table.
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Weights {
    Uniform,
    Balanced,
    MaxSensitivity,
}

#[derive(Args)]
struct RunArgs {
    /// CSV file (overrides the config's dataset).
    data: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// One value, or several separated by commas for `path`.
    #[arg(long, value_delimiter = ',')]
    c0: Option<Vec<f64>>,
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long)]
    max_fpr: Option<f64>,
    /// Seconds per integer program.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, value_enum)]
    weights: Option<Weights>,
    #[arg(long)]
    workers: Option<usize>,
    /// Reduce the data before solving.
    #[arg(long)]
    reduce: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(d) = &self.data {
            cfg.dataset = Some(d.clone());
        }
        if let Some(l) = &self.label {
            cfg.label = l.clone();
        }
        if let Some(c) = &self.c0 {
            cfg.c0 = Some(OneOrMany::Many(c.clone()));
        }
        if let Some(theta) = self.max_size {
            cfg.constraints.push(ConstraintSpec::MaxModelSize { theta });
        }
        if let Some(gamma) = self.max_fpr {
            cfg.constraints.push(ConstraintSpec::MaxFpr { gamma });
        }
        if let Some(t) = self.time_limit {
            cfg.time_limit = Some(t);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.folds {
            cfg.folds = k;
        }
        if let Some(w) = self.weights {
            cfg.weights = match w {
                Weights::Uniform => WeightMode::Uniform,
                Weights::Balanced => WeightMode::Balanced,
                Weights::MaxSensitivity => WeightMode::MaxSensitivity,
            };
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        cfg.reduce |= self.reduce;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ReduceArgs {
    data: PathBuf,
    #[arg(long, default_value = "label")]
    label: String,
    #[arg(long, default_value_t = 0.01)]
    c0: f64,
    #[arg(long, default_value_t = 10)]
    cap: i64,
    #[arg(long, default_value_t = 100)]
    intercept_cap: i64,
    /// Level-set width; defaults to the zero-model width.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Use the width of this saved model instead.
    #[arg(long, conflicts_with = "epsilon")]
    model: Option<PathBuf>,
    #[arg(long, default_value = "reduced")]
    out: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    /// Number of features.
    #[arg(long)]
    p: usize,
    /// Resolutions Λ to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,10,20,50,100")]
    lambda: Vec<u64>,
    #[arg(long, default_value_t = 0.01)]
    c0: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Sample size.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    model: PathBuf,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    markdown: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 2,
        Error::NoIncumbent(_) => 3,
        _ => 4,
    }
}

fn out_dir(cfg: &RunConfig) -> Result<OutputDir> {
    OutputDir::create(cfg.output.clone().unwrap_or_else(|| PathBuf::from("slim-out")))
}

fn run_train(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let data = cfg.load_dataset()?;
    let out = train(&cfg, &data, cfg.single_c0())?;
    let dir = out_dir(&cfg)?;
    dir.write_model(&out.model, Some(&out.solve), cfg.target.as_deref())?;
    dir.write("metrics.csv", &metrics_csv(None, Some(&out))?)?;
    if let Some(r) = &out.reduction {
        dir.write_reduction(r)?;
    }
    print!("{}", render_table(&out.model, cfg.target.as_deref()));
    println!(
        "status {}  training error {:.2}%  model size {}  gap {:.3e}",
        out.solve.status.as_str(),
        100.0 * out.train.error,
        out.model.model_size(),
        out.solve.gap
    );
    Ok(())
}

fn run_cv(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let data = cfg.load_dataset()?;
    let cv = cross_validate(&cfg, &data, cfg.single_c0())?;
    let dir = out_dir(&cfg)?;
    dir.write("metrics.csv", &metrics_csv(Some(&cv), None)?)?;
    let (te, tr, size) = (cv.test_error(), cv.train_error(), cv.model_size());
    println!(
        "{}-fold CV at C0 = {}: test error {:.1} ± {:.1}%, train error {:.1} ± {:.1}%, model size {}-{}",
        cv.folds.len(),
        cv.c0,
        100.0 * te.mean,
        100.0 * te.sd,
        100.0 * tr.mean,
        100.0 * tr.sd,
        size.min,
        size.max
    );
    Ok(())
}

fn run_path(args: &RunArgs) -> Result<()> {
    let cfg = args.config()?;
    let data = cfg.load_dataset()?;
    let points = regularization_path(&cfg, &data)?;
    let dir = out_dir(&cfg)?;
    dir.write("path.csv", &path_csv(&points)?)?;
    print!("{}", path_csv(&points)?);
    let Some(best) = best_point(&points) else {
        return Err(Error::NoIncumbent("no C0 on the path produced a model".into()));
    };
    let p = &points[best];
    let model = p.model.as_ref().expect("best point has a model");
    dir.write_model(model, None, cfg.target.as_deref())?;
    if let Some(cv) = &p.cv {
        dir.write("metrics.csv", &metrics_csv(Some(cv), None)?)?;
    }
    println!("best C0 = {}", p.c0);
    print!("{}", render_table(model, cfg.target.as_deref()));
    Ok(())
}

fn run_reduce(args: &ReduceArgs) -> Result<()> {
    let data = load_csv(&args.data, &args.label)?;
    let params = SlimParams::new(&data, args.c0, args.cap, args.intercept_cap);
    let instance = supersparse::formulate::build_slim(&data, &params, &[])?;
    let analysis = analyze(&data, &instance)?;
    let model = args.model.as_ref().map(ScoringSystem::load).transpose()?;
    let (eps_model, eps_max) = epsilon_bounds(&instance, analysis.surrogate_optimum, model.as_ref())?;
    let eps = args.epsilon.or(eps_model).unwrap_or(eps_max);
    let report = analysis.report(eps)?;
    let dir = OutputDir::create(&args.out)?;
    data.subset(&report.kept_indices()).save_csv(dir.path("reduced.csv"), &args.label)?;
    dir.write_reduction(&report)?;
    println!(
        "LP optimum {:.6}; ε = {:.6} (zero-model width {:.6}); kept {} of {} ({:.1}% removed)",
        report.surrogate_optimum,
        eps,
        eps_max,
        report.m,
        report.n,
        100.0 * report.removed_fraction
    );
    Ok(())
}

fn run_bounds(args: &BoundsArgs) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "full_count", "occam_full", "sparse_count", "occam_sparse", "coprime_count", "coprime_density"])?;
    println!(
        "{:>6}  {:>14}  {:>10}  {:>14}  {:>12}  {:>8}",
        "Λ", "|L|", "bound", "|H|", "sparse bound", "coprime"
    );
    for &lam in &args.lambda {
        let full = full_count(args.p, lam);
        let sparse = sparse_hypothesis_count(args.p, lam, args.c0)?;
        let b_full = occam_bound(&full, args.delta, args.n)?;
        let b_sparse = occam_bound(&sparse, args.delta, args.n)?;
        let density = if args.p <= 8 { Some(coprime_density(args.p, lam)) } else { None };
        println!(
            "{lam:>6}  {:>14.4e}  {b_full:>10.4}  {:>14.4e}  {b_sparse:>12.4}  {:>8}",
            supersparse::theory::ln_big(&full).exp(),
            supersparse::theory::ln_big(&sparse).exp(),
            density.map(|d| format!("{d:.4}")).unwrap_or_else(|| "-".into())
        );
        w.write_record([
            lam.to_string(),
            full.to_string(),
            b_full.to_string(),
            sparse.to_string(),
            b_sparse.to_string(),
            if args.p <= 8 { coprime_count(args.p, lam).to_string() } else { String::new() },
            density.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    if args.p <= 4 {
        let levels: Vec<String> = args.lambda.iter().map(|&l| format!("{l}:{}", farey_count(args.p, l))).collect();
        println!("Farey points by level: {}", levels.join(" "));
    }
    if let Some(path) = &args.csv {
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        std::fs::write(path, bytes).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn run_render(args: &RenderArgs) -> Result<()> {
    let model = ScoringSystem::load(&args.model)?;
    let text = if args.markdown {
        render_markdown(&model, args.target.as_deref())
    } else {
        render_table(&model, args.target.as_deref())
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => run_train(a),
        Command::Cv(a) => run_cv(a),
        Command::Path(a) => run_path(a),
        Command::Reduce(a) => run_reduce(a),
        Command::Bounds(a) => run_bounds(a),
        Command::Render(a) => run_render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
