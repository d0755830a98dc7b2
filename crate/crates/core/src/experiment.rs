//! Training runs: configuration, cross-validation, regularization paths,
//! metrics and output files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{binarize, class_weights, load_csv, BinarizationSpec, ClassWeights, Dataset, WeightMode};
use crate::error::{Error, Result};
use crate::formulate::{build_slim, ConstraintSpec, FeatureRef, IpInstance, SlimParams};
use crate::milp::{branch_and_bound, SolveOptions, SolveResult, SolveStatus};
use crate::reduce::{analyze, epsilon_bounds, ReductionReport};
use crate::scoring::{count_errors, render_table, Domain, ScoringSystem};

/// One value or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Everything a run needs. Every field has a default, so a config file only
/// lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub label: String,
    pub binarization: Option<BinarizationSpec>,
    /// Λ for every feature coefficient.
    pub coefficient_cap: i64,
    pub intercept_cap: i64,
    /// Per-feature `[lo, hi]` overrides.
    pub coefficient_bounds: BTreeMap<String, (i64, i64)>,
    /// `None` uses [`default_c0_grid`] for paths and 0.01 for single runs.
    pub c0: Option<OneOrMany>,
    pub eps: Option<f64>,
    pub gamma: Option<f64>,
    pub weights: WeightMode,
    pub constraints: Vec<ConstraintSpec>,
    /// Seconds per integer program.
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    pub folds: usize,
    pub seed: u64,
    pub workers: usize,
    /// Solve on the data left after LP-based reduction.
    pub reduce: bool,
    /// Level-set width for reduction; `None` uses the zero-model width.
    pub reduce_epsilon: Option<f64>,
    pub merge_duplicates: bool,
    pub output: Option<PathBuf>,
    /// Headline of rendered tables, e.g. "TUMOR IS MALIGNANT".
    pub target: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            label: "label".into(),
            binarization: None,
            coefficient_cap: 10,
            intercept_cap: 100,
            coefficient_bounds: BTreeMap::new(),
            c0: None,
            eps: None,
            gamma: None,
            weights: WeightMode::Uniform,
            constraints: Vec::new(),
            time_limit: Some(600.0),
            node_limit: None,
            folds: 10,
            seed: 0,
            workers: 1,
            reduce: false,
            reduce_epsilon: None,
            merge_duplicates: true,
            output: None,
            target: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c0) = &self.c0 {
            let values = c0.values();
            if values.is_empty() {
                return Err(Error::param("c0 list is empty"));
            }
            if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(Error::param(format!("c0 values must be positive, got {bad}")));
            }
        }
        if self.coefficient_cap < 0 || self.intercept_cap < 0 {
            return Err(Error::param("coefficient caps must be nonnegative"));
        }
        if self.time_limit.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::param("time limit must be positive"));
        }
        Ok(())
    }

    /// First configured C0, or 0.01.
    pub fn single_c0(&self) -> f64 {
        self.c0.as_ref().map(|c| c.values()[0]).unwrap_or(0.01)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            node_limit: self.node_limit,
            trace: true,
            ..SolveOptions::default()
        }
    }

    /// Loads the dataset and applies the binarization spec.
    pub fn load_dataset(&self) -> Result<Dataset> {
        let path = self.dataset.as_ref().ok_or_else(|| Error::param("no dataset given"))?;
        let raw = load_csv(path, &self.label)?;
        match &self.binarization {
            Some(spec) => Ok(binarize(&raw, spec)?.0),
            None => Ok(raw),
        }
    }

    /// Objective parameters for `dataset` at sparsity cost `c0`.
    pub fn params(&self, dataset: &Dataset, c0: f64) -> Result<SlimParams> {
        let mut p = SlimParams::new(dataset, c0, self.coefficient_cap, self.intercept_cap)
            .with_weights(class_weights(dataset, self.weights)?)
            .with_merged_duplicates(self.merge_duplicates);
        for (name, &(lo, hi)) in &self.coefficient_bounds {
            let j = FeatureRef::Name(name.clone()).resolve(dataset.feature_names())?;
            p.coefficients.set_domain(j, Domain::interval(lo, hi)?)?;
        }
        if let Some(g) = self.gamma {
            p = p.with_gamma(g);
        }
        if let Some(e) = self.eps {
            p = p.with_eps(e);
        }
        Ok(p)
    }
}

/// `{0.01, 0.075, 0.05, 0.025, 0.001, 0.9/(N·P)}`.
pub fn default_c0_grid(n: usize, p: usize) -> Vec<f64> {
    vec![0.01, 0.075, 0.05, 0.025, 0.001, 0.9 / (n.max(1) * p.max(1)) as f64]
}

/// Classification metrics on one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub n: usize,
    pub errors: usize,
    pub errors_pos: usize,
    pub errors_neg: usize,
    pub error: f64,
    /// Class-weighted error: Σ w·[mistake] / Σ w.
    pub weighted_error: f64,
    /// 1 when there are no positives.
    pub tpr: f64,
    /// 0 when there are no negatives.
    pub fpr: f64,
}

pub fn evaluate(model: &ScoringSystem, dataset: &Dataset, weights: ClassWeights) -> Result<Evaluation> {
    if model.dim() != dataset.dim() {
        return Err(Error::Dimension {
            expected: dataset.dim(),
            got: model.dim(),
        });
    }
    let c = count_errors(model.coefficients(), dataset);
    let (np, nn) = (dataset.n_pos(), dataset.n_neg());
    let total_w = weights.w_pos * np as f64 + weights.w_neg * nn as f64;
    let wrong_w = weights.w_pos * c.errors_pos as f64 + weights.w_neg * c.errors_neg as f64;
    Ok(Evaluation {
        n: dataset.n(),
        errors: c.errors,
        errors_pos: c.errors_pos,
        errors_neg: c.errors_neg,
        error: c.errors as f64 / dataset.n().max(1) as f64,
        weighted_error: if total_w > 0.0 { wrong_w / total_w } else { 0.0 },
        tpr: if np == 0 { 1.0 } else { 1.0 - c.errors_pos as f64 / np as f64 },
        fpr: if nn == 0 { 0.0 } else { c.errors_neg as f64 / nn as f64 },
    })
}

/// Result of one training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub c0: f64,
    pub model: ScoringSystem,
    pub solve: SolveResult,
    pub train: Evaluation,
    pub reduction: Option<ReductionReport>,
}

/// Trains one model on `dataset`. Infeasible problems are probed by dropping
/// one constraint family at a time, and the error names the families whose
/// removal restores feasibility.
pub fn train(config: &RunConfig, dataset: &Dataset, c0: f64) -> Result<TrainOutcome> {
    let mut params = config.params(dataset, c0)?;
    let weights = params.weights;
    let mut work = dataset.clone();
    let mut reduction = None;
    if config.reduce {
        if config
            .constraints
            .iter()
            .any(|c| matches!(c, ConstraintSpec::MaxFpr { .. } | ConstraintSpec::MinTpr { .. }))
        {
            warn!("reduction skipped: class-count constraints are not invariant under example removal");
        } else {
            params.eps = Some(params.epsilon(dataset.n()));
            params.loss_normalizer = Some(params.loss_normalizer.unwrap_or(dataset.n() as f64));
            let full = build_slim(dataset, &params, &config.constraints)?;
            let analysis = analyze(dataset, &full)?;
            let eps = match config.reduce_epsilon {
                Some(e) => e,
                None => epsilon_bounds(&full, analysis.surrogate_optimum, None)?.1,
            };
            let report = analysis.report(eps)?;
            info!("reduction at ε = {eps}: kept {} of {}", report.m, report.n);
            work = dataset.subset(&report.kept_indices());
            reduction = Some(report);
        }
    }
    let instance = build_slim(&work, &params, &config.constraints)?;
    let solve = branch_and_bound(&instance, &config.solve_options());
    match solve.status {
        SolveStatus::Infeasible => return Err(Error::Infeasible(probe_infeasibility(config, &work, &params))),
        SolveStatus::NoIncumbent => {
            return Err(Error::NoIncumbent(format!("{} nodes in {:.1}s", solve.nodes, solve.wall_time)))
        }
        _ => {}
    }
    let model = instance.try_decode(&solve)?;
    let train = evaluate(&model, dataset, weights)?;
    Ok(TrainOutcome {
        c0,
        model,
        solve,
        train,
        reduction,
    })
}

fn family_of(spec: &ConstraintSpec) -> &'static str {
    match spec {
        ConstraintSpec::MaxFpr { .. } => "max_fpr",
        ConstraintSpec::MinTpr { .. } => "min_tpr",
        ConstraintSpec::MaxModelSize { .. } => "max_model_size",
        ConstraintSpec::Sign { .. } => "sign",
        ConstraintSpec::IfThen { .. } => "if_then",
        ConstraintSpec::Hierarchy { .. } => "hierarchy",
        ConstraintSpec::PerFeaturePenalty { .. } => "per_feature_penalty",
        ConstraintSpec::PinZero { .. } => "pin_zero",
    }
}

fn probe_infeasibility(config: &RunConfig, dataset: &Dataset, params: &SlimParams) -> String {
    let mut families: Vec<&str> = config.constraints.iter().map(family_of).collect();
    families.sort_unstable();
    families.dedup();
    let opts = SolveOptions {
        time_limit: Some(Duration::from_secs(10)),
        node_limit: Some(2000),
        ..SolveOptions::default()
    };
    let binding: Vec<&str> = families
        .iter()
        .copied()
        .filter(|fam| {
            let kept: Vec<ConstraintSpec> = config.constraints.iter().filter(|c| family_of(c) != *fam).cloned().collect();
            build_slim(dataset, params, &kept)
                .map(|inst| branch_and_bound(&inst, &opts).solution.is_some())
                .unwrap_or(false)
        })
        .collect();
    if families.is_empty() {
        "no feasible model in the coefficient set".into()
    } else if binding.is_empty() {
        format!("no single constraint family explains it (tried {})", families.join(", "))
    } else {
        format!("dropping {} restores feasibility", binding.join(" or "))
    }
}

/// Fold index per example: each class is shuffled with `seed`, then dealt
/// round-robin, so class proportions match across folds.
pub fn stratified_folds(labels: &[i8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > labels.len() {
        return Err(Error::param(format!("need 2 ≤ folds ≤ N = {}, got {k}", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next % k;
            next += 1;
        }
    }
    Ok(fold)
}

/// Per-fold record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub train: Evaluation,
    pub test: Evaluation,
    pub model_size: usize,
    pub status: String,
    pub gap: f64,
    pub wall_time: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (0 for a single value).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    if values.is_empty() {
        return Summary {
            mean: f64::NAN,
            sd: f64::NAN,
            min: f64::NAN,
            max: f64::NAN,
        };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Summary {
        mean,
        sd,
        min: values.iter().cloned().fold(f64::INFINITY, f64::min),
        max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Cross-validation results for one C0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub c0: f64,
    pub folds: Vec<FoldRecord>,
}

impl CvReport {
    fn column(&self, f: impl Fn(&FoldRecord) -> f64) -> Summary {
        summarize(&self.folds.iter().map(f).collect::<Vec<_>>())
    }

    pub fn test_error(&self) -> Summary {
        self.column(|r| r.test.error)
    }

    pub fn test_weighted_error(&self) -> Summary {
        self.column(|r| r.test.weighted_error)
    }

    pub fn train_error(&self) -> Summary {
        self.column(|r| r.train.error)
    }

    pub fn model_size(&self) -> Summary {
        self.column(|r| r.model_size as f64)
    }

    pub fn test_tpr(&self) -> Summary {
        self.column(|r| r.test.tpr)
    }

    pub fn test_fpr(&self) -> Summary {
        self.column(|r| r.test.fpr)
    }
}

fn parallel_map<T: Send, R: Send>(items: Vec<T>, workers: usize, f: impl Fn(T) -> R + Sync) -> Vec<R> {
    let n = items.len();
    if workers <= 1 || n <= 1 {
        return items.into_iter().map(f).collect();
    }
    let slots: Vec<Mutex<Option<T>>> = items.into_iter().map(|t| Mutex::new(Some(t))).collect();
    let results: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers.min(n) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let item = slots[i].lock().expect("poisoned").take().expect("taken twice");
                let r = f(item);
                *results[i].lock().expect("poisoned") = Some(r);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().expect("poisoned").expect("missing result"))
        .collect()
}

/// `config.folds`-fold stratified cross-validation at sparsity cost `c0`.
pub fn cross_validate(config: &RunConfig, dataset: &Dataset, c0: f64) -> Result<CvReport> {
    let fold_of = stratified_folds(dataset.labels(), config.folds, config.seed)?;
    let k = config.folds;
    let weights = class_weights(dataset, config.weights)?;
    let splits: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..dataset.n()).partition(|&i| fold_of[i] == f);
            (f, train, test)
        })
        .collect();
    let records = parallel_map(splits, config.workers, |(f, train_idx, test_idx)| -> Result<FoldRecord> {
        let train_set = dataset.subset(&train_idx);
        let test_set = dataset.subset(&test_idx);
        if train_set.n_pos() == 0 || train_set.n_neg() == 0 {
            return Err(Error::param(format!("fold {f} leaves a single class in its training set")));
        }
        let out = train(config, &train_set, c0)?;
        Ok(FoldRecord {
            fold: f,
            train: out.train,
            test: evaluate(&out.model, &test_set, weights)?,
            model_size: out.model.model_size(),
            status: out.solve.status.as_str().to_string(),
            gap: out.solve.gap,
            wall_time: out.solve.wall_time,
            nodes: out.solve.nodes,
        })
    });
    Ok(CvReport {
        c0,
        folds: records.into_iter().collect::<Result<_>>()?,
    })
}

/// One C0 on a regularization path. Failures are recorded, not raised.
#[derive(Debug, Clone)]
pub struct PathPoint {
    pub c0: f64,
    pub model: Option<ScoringSystem>,
    pub train: Option<Evaluation>,
    pub status: Option<String>,
    pub cv: Option<CvReport>,
    pub error: Option<String>,
}

/// Final model plus cross-validation for each C0 (configured list or
/// [`default_c0_grid`]).
pub fn regularization_path(config: &RunConfig, dataset: &Dataset) -> Result<Vec<PathPoint>> {
    let grid = match &config.c0 {
        Some(c) => c.values(),
        None => default_c0_grid(dataset.n(), dataset.p()),
    };
    if grid.is_empty() {
        return Err(Error::param("c0 list is empty"));
    }
    let mut points = Vec::with_capacity(grid.len());
    for c0 in grid {
        info!("path: C0 = {c0}");
        let mut point = PathPoint {
            c0,
            model: None,
            train: None,
            status: None,
            cv: None,
            error: None,
        };
        match train(config, dataset, c0) {
            Ok(out) => {
                point.status = Some(out.solve.status.as_str().to_string());
                point.train = Some(out.train);
                point.model = Some(out.model);
            }
            Err(e) => point.error = Some(e.to_string()),
        }
        if point.error.is_none() {
            match cross_validate(config, dataset, c0) {
                Ok(cv) => point.cv = Some(cv),
                Err(e) => point.error = Some(e.to_string()),
            }
        }
        points.push(point);
    }
    Ok(points)
}

/// Point with the lowest mean CV test error; ties go to the smaller final
/// model, then the larger C0.
pub fn best_point(points: &[PathPoint]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.cv.is_some() && p.model.is_some())
        .min_by(|(_, a), (_, b)| {
            let ea = a.cv.as_ref().map(|c| c.test_error().mean).unwrap_or(f64::INFINITY);
            let eb = b.cv.as_ref().map(|c| c.test_error().mean).unwrap_or(f64::INFINITY);
            let sa = a.model.as_ref().map(ScoringSystem::model_size).unwrap_or(usize::MAX);
            let sb = b.model.as_ref().map(ScoringSystem::model_size).unwrap_or(usize::MAX);
            ea.total_cmp(&eb).then(sa.cmp(&sb)).then(b.c0.total_cmp(&a.c0))
        })
        .map(|(i, _)| i)
}

#[derive(Serialize)]
struct MetricsRow<'a> {
    c0: f64,
    fold: &'a str,
    train_error: f64,
    train_weighted_error: f64,
    test_error: Option<f64>,
    test_weighted_error: Option<f64>,
    train_tpr: f64,
    train_fpr: f64,
    test_tpr: Option<f64>,
    test_fpr: Option<f64>,
    model_size: f64,
    gap: f64,
    wall_time: f64,
    status: &'a str,
}

/// `metrics.csv`: one row per fold, then mean/sd/min/max rows, then the
/// final model's training metrics if given.
pub fn metrics_csv(cv: Option<&CvReport>, final_run: Option<&TrainOutcome>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(cv) = cv {
        for r in &cv.folds {
            let fold = r.fold.to_string();
            w.serialize(MetricsRow {
                c0: cv.c0,
                fold: &fold,
                train_error: r.train.error,
                train_weighted_error: r.train.weighted_error,
                test_error: Some(r.test.error),
                test_weighted_error: Some(r.test.weighted_error),
                train_tpr: r.train.tpr,
                train_fpr: r.train.fpr,
                test_tpr: Some(r.test.tpr),
                test_fpr: Some(r.test.fpr),
                model_size: r.model_size as f64,
                gap: r.gap,
                wall_time: r.wall_time,
                status: &r.status,
            })?;
        }
        let cols: [fn(&FoldRecord) -> f64; 12] = [
            |r| r.train.error,
            |r| r.train.weighted_error,
            |r| r.test.error,
            |r| r.test.weighted_error,
            |r| r.train.tpr,
            |r| r.train.fpr,
            |r| r.test.tpr,
            |r| r.test.fpr,
            |r| r.model_size as f64,
            |r| r.gap,
            |r| r.wall_time,
            |_| 0.0,
        ];
        let sums: Vec<Summary> = cols.iter().map(|f| summarize(&cv.folds.iter().map(f).collect::<Vec<_>>())).collect();
        for (name, pick) in [
            ("mean", (|s: &Summary| s.mean) as fn(&Summary) -> f64),
            ("sd", |s| s.sd),
            ("min", |s| s.min),
            ("max", |s| s.max),
        ] {
            let v: Vec<f64> = sums.iter().map(pick).collect();
            w.serialize(MetricsRow {
                c0: cv.c0,
                fold: name,
                train_error: v[0],
                train_weighted_error: v[1],
                test_error: Some(v[2]),
                test_weighted_error: Some(v[3]),
                train_tpr: v[4],
                train_fpr: v[5],
                test_tpr: Some(v[6]),
                test_fpr: Some(v[7]),
                model_size: v[8],
                gap: v[9],
                wall_time: v[10],
                status: "",
            })?;
        }
    }
    if let Some(out) = final_run {
        w.serialize(MetricsRow {
            c0: out.c0,
            fold: "final",
            train_error: out.train.error,
            train_weighted_error: out.train.weighted_error,
            test_error: None,
            test_weighted_error: None,
            train_tpr: out.train.tpr,
            train_fpr: out.train.fpr,
            test_tpr: None,
            test_fpr: None,
            model_size: out.model.model_size() as f64,
            gap: out.solve.gap,
            wall_time: out.solve.wall_time,
            status: out.solve.status.as_str(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Lp(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct PathRow<'a> {
    c0: f64,
    model_size: Option<usize>,
    train_error: Option<f64>,
    cv_test_error_mean: Option<f64>,
    cv_test_error_sd: Option<f64>,
    cv_train_error_mean: Option<f64>,
    cv_model_size_min: Option<f64>,
    cv_model_size_max: Option<f64>,
    status: Option<&'a str>,
    error: Option<&'a str>,
}

/// `path.csv`: one row per C0.
pub fn path_csv(points: &[PathPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        let cv = p.cv.as_ref();
        w.serialize(PathRow {
            c0: p.c0,
            model_size: p.model.as_ref().map(ScoringSystem::model_size),
            train_error: p.train.map(|t| t.error),
            cv_test_error_mean: cv.map(|c| c.test_error().mean),
            cv_test_error_sd: cv.map(|c| c.test_error().sd),
            cv_train_error_mean: cv.map(|c| c.train_error().mean),
            cv_model_size_min: cv.map(|c| c.model_size().min),
            cv_model_size_max: cv.map(|c| c.model_size().max),
            status: p.status.as_deref(),
            error: p.error.as_deref(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Lp(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes files into `dir`, creating it first.
pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, contents).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }

    /// `model.json`, `model.txt` and, if traced, `trace.tsv`.
    pub fn write_model(&self, model: &ScoringSystem, solve: Option<&SolveResult>, target: Option<&str>) -> Result<()> {
        model.save(self.path("model.json"))?;
        self.write("model.txt", &render_table(model, target))?;
        if let Some(s) = solve.filter(|s| !s.trace.is_empty()) {
            self.write("trace.tsv", &s.trace_tsv())?;
        }
        Ok(())
    }

    pub fn write_reduction(&self, report: &ReductionReport) -> Result<()> {
        self.write("reduction.json", &report.to_json()?)?;
        Ok(())
    }
}

/// Builds the SLIM instance a config describes, for export or inspection.
pub fn instance_for(config: &RunConfig, dataset: &Dataset, c0: f64) -> Result<IpInstance> {
    build_slim(dataset, &config.params(dataset, c0)?, &config.constraints)
}
