//! Integer scoring systems: evaluation, norms, objective values, coprimality
//! and rendering as add-the-points tables.

use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::data::{ClassWeights, Dataset, INTERCEPT_NAME};
use crate::error::{Error, Result};

/// Finite integer value set of one coefficient: an inclusive interval, or an
/// explicit sorted list when the set has holes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: i64,
    pub hi: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<i64>>,
}

impl Domain {
    pub fn interval(lo: i64, hi: i64) -> Result<Self> {
        if lo > 0 || hi < 0 {
            return Err(Error::param(format!("coefficient interval [{lo}, {hi}] must contain 0")));
        }
        Ok(Self { lo, hi, values: None })
    }

    pub fn symmetric(cap: i64) -> Self {
        let cap = cap.abs();
        Self {
            lo: -cap,
            hi: cap,
            values: None,
        }
    }

    pub fn list(mut values: Vec<i64>) -> Result<Self> {
        values.sort_unstable();
        values.dedup();
        if values.binary_search(&0).is_err() {
            return Err(Error::param("coefficient value list must contain 0"));
        }
        let (lo, hi) = (values[0], values[values.len() - 1]);
        if values.len() as i64 == hi - lo + 1 {
            return Ok(Self { lo, hi, values: None });
        }
        Ok(Self {
            lo,
            hi,
            values: Some(values),
        })
    }

    /// Λ_j: largest absolute value in the set.
    pub fn cap(&self) -> i64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn is_interval(&self) -> bool {
        self.values.is_none()
    }

    pub fn contains(&self, v: i64) -> bool {
        match &self.values {
            Some(vals) => vals.binary_search(&v).is_ok(),
            None => (self.lo..=self.hi).contains(&v),
        }
    }

    pub fn values(&self) -> Vec<i64> {
        match &self.values {
            Some(vals) => vals.clone(),
            None => (self.lo..=self.hi).collect(),
        }
    }

    pub fn size(&self) -> u64 {
        match &self.values {
            Some(vals) => vals.len() as u64,
            None => (self.hi - self.lo + 1) as u64,
        }
    }

    /// Keeps only values with the given sign (and 0).
    pub fn restrict_sign(&self, positive: bool) -> Domain {
        let keep = |v: &i64| if positive { *v >= 0 } else { *v <= 0 };
        match &self.values {
            Some(vals) => Domain::list(vals.iter().copied().filter(keep).collect()).expect("0 retained"),
            None if positive => Domain {
                lo: 0,
                hi: self.hi,
                values: None,
            },
            None => Domain {
                lo: self.lo,
                hi: 0,
                values: None,
            },
        }
    }
}

/// Per-coefficient value sets for `[λ0, λ1, ..., λP]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientSet {
    domains: Vec<Domain>,
}

impl CoefficientSet {
    pub fn new(domains: Vec<Domain>) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::param("coefficient set needs at least the intercept"));
        }
        for (j, d) in domains.iter().enumerate() {
            if !d.contains(0) {
                return Err(Error::param(format!("coefficient {j}: value set must contain 0")));
            }
        }
        Ok(Self { domains })
    }

    /// `{−Λ..Λ}^P` for the features and `{−Λ0..Λ0}` for the intercept.
    pub fn symmetric(p: usize, cap: i64, intercept_cap: i64) -> Self {
        let mut domains = vec![Domain::symmetric(intercept_cap)];
        domains.extend((0..p).map(|_| Domain::symmetric(cap)));
        Self { domains }
    }

    /// Length P + 1.
    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn domain(&self, j: usize) -> &Domain {
        &self.domains[j]
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn set_domain(&mut self, j: usize, domain: Domain) -> Result<()> {
        if !domain.contains(0) {
            return Err(Error::param(format!("coefficient {j}: value set must contain 0")));
        }
        self.domains[j] = domain;
        Ok(())
    }

    pub fn cap(&self, j: usize) -> i64 {
        self.domains[j].cap()
    }

    /// max ℓ1 norm over the set, intercept excluded.
    pub fn max_l1(&self) -> i64 {
        self.domains[1..].iter().map(Domain::cap).sum()
    }

    pub fn contains(&self, coefficients: &[i64]) -> bool {
        coefficients.len() == self.domains.len()
            && coefficients.iter().zip(&self.domains).all(|(&v, d)| d.contains(v))
    }

    /// Number of points in the product set, saturating.
    pub fn cardinality(&self) -> u128 {
        self.domains
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(u128::from(d.size())))
    }

    pub fn bounds(&self) -> Vec<(i64, i64)> {
        self.domains.iter().map(|d| (d.lo, d.hi)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ModelMeta {
    pub c0: Option<f64>,
    pub eps: Option<f64>,
    pub solver_status: Option<String>,
    pub gap: Option<f64>,
    pub coefficient_set_bounds: Option<Vec<(i64, i64)>>,
}

/// Integer linear classifier: predict +1 iff `λᵀx > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringSystem {
    feature_names: Vec<String>,
    coefficients: Vec<i64>,
    pub meta: ModelMeta,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    feature_names: Vec<String>,
    intercept: i64,
    coefficients: Vec<i64>,
    coefficient_set_bounds: Option<Vec<(i64, i64)>>,
    c0: Option<f64>,
    eps: Option<f64>,
    solver_status: Option<String>,
    gap: Option<f64>,
}

impl ScoringSystem {
    /// `feature_names` and `coefficients` both include the intercept at index 0.
    pub fn new(feature_names: Vec<String>, coefficients: Vec<i64>) -> Result<Self> {
        if feature_names.len() != coefficients.len() {
            return Err(Error::Dimension {
                expected: feature_names.len(),
                got: coefficients.len(),
            });
        }
        if coefficients.is_empty() {
            return Err(Error::param("model needs an intercept"));
        }
        Ok(Self {
            feature_names,
            coefficients,
            meta: ModelMeta::default(),
        })
    }

    pub fn for_dataset(dataset: &Dataset, coefficients: Vec<i64>) -> Result<Self> {
        Self::new(dataset.feature_names().to_vec(), coefficients)
    }

    pub fn zero(dataset: &Dataset) -> Self {
        Self {
            feature_names: dataset.feature_names().to_vec(),
            coefficients: vec![0; dataset.dim()],
            meta: ModelMeta::default(),
        }
    }

    pub fn with_meta(mut self, meta: ModelMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn intercept(&self) -> i64 {
        self.coefficients[0]
    }

    /// All coefficients, intercept first.
    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// Number of nonzero non-intercept coefficients.
    pub fn model_size(&self) -> usize {
        norms(self).0 as usize
    }

    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(if score(self, x)? > 0.0 { 1 } else { -1 })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            feature_names: self.feature_names[1..].to_vec(),
            intercept: self.coefficients[0],
            coefficients: self.coefficients[1..].to_vec(),
            coefficient_set_bounds: self.meta.coefficient_set_bounds.clone(),
            c0: self.meta.c0,
            eps: self.meta.eps,
            solver_status: self.meta.solver_status.clone(),
            gap: self.meta.gap,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let mut names = vec![INTERCEPT_NAME.to_string()];
        names.extend(file.feature_names);
        let mut coefs = vec![file.intercept];
        coefs.extend(file.coefficients);
        Ok(Self::new(names, coefs)?.with_meta(ModelMeta {
            c0: file.c0,
            eps: file.eps,
            solver_status: file.solver_status,
            gap: file.gap,
            coefficient_set_bounds: file.coefficient_set_bounds,
        }))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// `λᵀx`. Exact whenever the features are integers (all partial sums stay
/// far below 2^53).
pub fn score(model: &ScoringSystem, x: &[f64]) -> Result<f64> {
    if x.len() != model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: x.len(),
        });
    }
    Ok(dot(&model.coefficients, x))
}

pub(crate) fn dot(coefficients: &[i64], x: &[f64]) -> f64 {
    coefficients
        .iter()
        .zip(x)
        .filter(|(c, _)| **c != 0)
        .map(|(&c, &v)| c as f64 * v)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossCount {
    pub errors: usize,
    pub errors_pos: usize,
    pub errors_neg: usize,
    pub rate: f64,
}

fn check_dims(model: &ScoringSystem, dataset: &Dataset) -> Result<()> {
    if model.dim() != dataset.dim() {
        return Err(Error::Dimension {
            expected: dataset.dim(),
            got: model.dim(),
        });
    }
    Ok(())
}

/// Counts examples with `y λᵀx <= 0`; a zero score is an error.
pub fn zero_one_loss(model: &ScoringSystem, dataset: &Dataset) -> Result<LossCount> {
    check_dims(model, dataset)?;
    Ok(count_errors(&model.coefficients, dataset))
}

pub(crate) fn count_errors(coefficients: &[i64], dataset: &Dataset) -> LossCount {
    let (mut pos, mut neg) = (0, 0);
    for (i, row) in dataset.rows().enumerate() {
        let y = dataset.label(i);
        if f64::from(y) * dot(coefficients, row) <= 0.0 {
            if y > 0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
    }
    LossCount {
        errors: pos + neg,
        errors_pos: pos,
        errors_neg: neg,
        rate: (pos + neg) as f64 / dataset.n() as f64,
    }
}

/// `(W+/N)·errors on I+ + (W−/N)·errors on I−`.
pub fn weighted_loss(model: &ScoringSystem, dataset: &Dataset, weights: ClassWeights) -> Result<f64> {
    let c = zero_one_loss(model, dataset)?;
    Ok(weighted_rate(&c, weights, dataset.n() as f64))
}

pub(crate) fn weighted_rate(c: &LossCount, weights: ClassWeights, normalizer: f64) -> f64 {
    (weights.w_pos * c.errors_pos as f64 + weights.w_neg * c.errors_neg as f64) / normalizer
}

/// `(‖λ‖0, ‖λ‖1)` over the non-intercept coefficients.
pub fn norms(model: &ScoringSystem) -> (u64, u64) {
    coefficient_norms(&model.coefficients)
}

pub(crate) fn coefficient_norms(coefficients: &[i64]) -> (u64, u64) {
    coefficients[1..].iter().fold((0, 0), |(l0, l1), &c| {
        (l0 + u64::from(c != 0), l1 + c.unsigned_abs())
    })
}

/// Unweighted objective: error rate + C0·‖λ‖0 + ε·‖λ‖1.
pub fn objective(model: &ScoringSystem, dataset: &Dataset, c0: f64, eps: f64) -> Result<f64> {
    let spec = Penalties::uniform(dataset.dim(), c0, eps, ClassWeights::UNIT, dataset.n() as f64);
    penalized_objective(model, dataset, &spec)
}

/// Full objective parameters: per-coefficient ℓ0 costs (index 0 unused), ε,
/// class weights and the loss normalizer (usually N).
#[derive(Debug, Clone, PartialEq)]
pub struct Penalties {
    pub c0: Vec<f64>,
    pub eps: f64,
    pub weights: ClassWeights,
    pub normalizer: f64,
}

impl Penalties {
    pub fn uniform(dim: usize, c0: f64, eps: f64, weights: ClassWeights, normalizer: f64) -> Self {
        let mut costs = vec![c0; dim];
        costs[0] = 0.0;
        Self {
            c0: costs,
            eps,
            weights,
            normalizer,
        }
    }

    /// Objective split into its loss, ℓ0 and ε·ℓ1 parts.
    pub fn evaluate(&self, coefficients: &[i64], dataset: &Dataset) -> ObjectiveParts {
        let loss = weighted_rate(&count_errors(coefficients, dataset), self.weights, self.normalizer);
        let mut l0 = 0.0;
        let mut l1 = 0u64;
        for j in 1..coefficients.len() {
            if coefficients[j] != 0 {
                l0 += self.c0[j];
                l1 += coefficients[j].unsigned_abs();
            }
        }
        ObjectiveParts {
            loss,
            l0,
            l1: self.eps * l1 as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParts {
    pub loss: f64,
    pub l0: f64,
    pub l1: f64,
}

impl ObjectiveParts {
    pub fn total(&self) -> f64 {
        self.loss + self.l0 + self.l1
    }

    /// Loss plus ℓ0 cost, the part that is compared exactly.
    pub fn discrete(&self) -> f64 {
        self.loss + self.l0
    }
}

pub fn penalized_objective(model: &ScoringSystem, dataset: &Dataset, penalties: &Penalties) -> Result<f64> {
    check_dims(model, dataset)?;
    Ok(penalties.evaluate(&model.coefficients, dataset).total())
}

/// gcd of |λ0|, ..., |λP|; 0 for the zero model.
pub fn gcd(coefficients: &[i64]) -> u64 {
    coefficients.iter().fold(0u64, |g, c| g.gcd(&c.unsigned_abs()))
}

/// True when the gcd over all coefficients, intercept included, is 1. The zero
/// model is reported coprime (vacuously) with a warning.
pub fn is_coprime(model: &ScoringSystem) -> bool {
    match gcd(&model.coefficients) {
        0 => {
            warn!("coprimality of the zero model is vacuous");
            true
        }
        g => g == 1,
    }
}

struct TableRow<'a> {
    name: &'a str,
    points: i64,
}

fn table_rows(model: &ScoringSystem) -> Vec<TableRow<'_>> {
    let mut rows: Vec<TableRow> = (1..model.dim())
        .filter(|&j| model.coefficients[j] != 0)
        .map(|j| TableRow {
            name: &model.feature_names[j],
            points: model.coefficients[j],
        })
        .collect();
    rows.sort_by(|a, b| {
        b.points
            .abs()
            .cmp(&a.points.abs())
            .then_with(|| a.name.cmp(b.name))
    });
    rows
}

fn headline(model: &ScoringSystem, target: Option<&str>) -> String {
    format!(
        "PREDICT {} IF SCORE > {}",
        target.unwrap_or("Y = +1"),
        -model.intercept()
    )
}

fn points(p: i64) -> String {
    if p.abs() == 1 {
        format!("{p} point")
    } else {
        format!("{p} points")
    }
}

/// Fixed-width add-the-points table. Rows are the nonzero coefficients by
/// decreasing magnitude (ties by name); the intercept becomes the threshold.
pub fn render_table(model: &ScoringSystem, target: Option<&str>) -> String {
    let rows = table_rows(model);
    let head = headline(model, target);
    let mut out = String::new();
    if rows.is_empty() {
        let rule = "=".repeat(head.len());
        let _ = writeln!(out, "{head}\n{rule}\nNO POINTS{}SCORE = 0", " ".repeat(4));
        return out;
    }
    let k = rows.len();
    let num_w = format!("{k}.").len();
    let name_w = rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0);
    let pts: Vec<String> = rows.iter().map(|r| points(r.points)).collect();
    let pts_w = pts.iter().map(String::len).max().unwrap_or(0).max("SCORE".len());
    let footer = format!("ADD POINTS FROM ROWS 1-{k}");
    let name_w = name_w.max(footer.len());
    let body_w = num_w + 1 + name_w + 2 + pts_w + 3 + 7;
    let width = body_w.max(head.len());

    let _ = writeln!(out, "{head}");
    let _ = writeln!(out, "{}", "=".repeat(width));
    for (idx, (row, p)) in rows.iter().zip(&pts).enumerate() {
        let num = format!("{}.", idx + 1);
        let op = if idx == 0 { ' ' } else { '+' };
        let _ = writeln!(
            out,
            "{num:<num_w$} {name:<name_w$}  {p:>pts_w$} | {op} .....",
            name = row.name
        );
    }
    let _ = writeln!(out, "{}", "-".repeat(width));
    let _ = writeln!(
        out,
        "{blank:<num_w$} {footer:<name_w$}  {s:>pts_w$} | = .....",
        blank = "",
        s = "SCORE"
    );
    out
}

/// The same table as GitHub-flavored Markdown.
pub fn render_markdown(model: &ScoringSystem, target: Option<&str>) -> String {
    let rows = table_rows(model);
    let mut out = format!("**{}**\n\n| # | Feature | Points | |\n|---|---|---:|---|\n", headline(model, target));
    for (idx, row) in rows.iter().enumerate() {
        let op = if idx == 0 { "" } else { "+ " };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {op}... |",
            idx + 1,
            row.name.replace('|', "\\|"),
            points(row.points)
        );
    }
    let _ = writeln!(
        out,
        "| | **ADD POINTS FROM ROWS 1-{}** | **SCORE** | = ... |",
        rows.len()
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn apnea_model() -> ScoringSystem {
        let names = [INTERCEPT_NAME, "age>=60", "hypertension", "bmi>=30", "bmi>=40", "female"];
        ScoringSystem::new(names.iter().map(|s| s.to_string()).collect(), vec![-1, 4, 4, 2, 2, -6]).unwrap()
    }

    fn mushroom_model() -> ScoringSystem {
        let names = [
            INTERCEPT_NAME,
            "spore_print_color=green",
            "stalk_surface_above_ring=grooves",
            "population=clustered",
            "gill_size=broad",
            "odor in {none,almond,anise}",
        ];
        ScoringSystem::new(names.iter().map(|s| s.to_string()).collect(), vec![-3, 4, 2, 2, -2, -4]).unwrap()
    }

    #[test]
    fn apnea_patient_score() {
        // male, age >= 60, hypertension, bmi 32
        let m = apnea_model();
        let x = [1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        assert_eq!(score(&m, &x).unwrap(), 9.0);
        assert_eq!(m.predict(&x).unwrap(), 1);
        assert!(score(&m, &x[..3]).is_err());
    }

    #[test]
    fn mushroom_odor_only() {
        let m = mushroom_model();
        let x = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        // points excluding the intercept: -4; total against threshold 3 is -7
        assert_eq!(score(&m, &x).unwrap() - f64::from(m.intercept() as i32), -4.0);
        assert_eq!(m.predict(&x).unwrap(), -1);
    }

    #[test]
    fn zero_model_scores_and_objective() {
        let d = Dataset::new(vec!["a".into()], vec![vec![1.0], vec![0.0], vec![1.0]], vec![1, -1, -1]).unwrap();
        let z = ScoringSystem::zero(&d);
        assert_eq!(score(&z, d.row(0)).unwrap(), 0.0);
        let c = zero_one_loss(&z, &d).unwrap();
        assert_eq!((c.errors, c.rate), (3, 1.0));
        assert_eq!(objective(&z, &d, 0.3, 0.01).unwrap(), 1.0);
        assert_eq!(norms(&z), (0, 0));
    }

    #[test]
    fn ties_are_errors() {
        let d = Dataset::new(
            vec!["a".into()],
            vec![vec![1.0], vec![1.0], vec![2.0], vec![0.0]],
            vec![1, -1, 1, -1],
        )
        .unwrap();
        // score = x - 1: rows 0 and 1 sit at 0
        let m = ScoringSystem::for_dataset(&d, vec![-1, 1]).unwrap();
        assert_eq!(zero_one_loss(&m, &d).unwrap().errors, 2);
    }

    #[test]
    fn weighted_loss_cases() {
        let d = Dataset::new(
            vec!["a".into()],
            vec![vec![1.0], vec![1.0], vec![0.0], vec![0.0], vec![0.0], vec![0.0]],
            vec![1, 1, -1, -1, 1, -1],
        )
        .unwrap();
        let z = ScoringSystem::zero(&d);
        let half = ClassWeights { w_pos: 0.5, w_neg: 0.5 };
        assert_eq!(weighted_loss(&z, &d, half).unwrap(), 0.5 * zero_one_loss(&z, &d).unwrap().rate);
        // λ = 0 with balanced weights: W+·N+/N + W−·N−/N = 2·(N−/N)(N+/N)
        let (np, nn, n) = (3.0, 3.0, 6.0);
        let bal = ClassWeights { w_pos: nn / n, w_neg: np / n };
        let expected = (nn / n) * (np / n) * 2.0;
        assert!((weighted_loss(&z, &d, bal).unwrap() - expected).abs() < 1e-15);
        // predicts +1 everywhere: only negatives wrong
        let all_pos = ScoringSystem::for_dataset(&d, vec![1, 0]).unwrap();
        let no_neg = ClassWeights { w_pos: 1.0, w_neg: 0.0 };
        assert_eq!(weighted_loss(&all_pos, &d, no_neg).unwrap(), 0.0);
    }

    #[test]
    fn norms_cases() {
        assert_eq!(norms(&apnea_model()), (5, 18));
        let m = ScoringSystem::new(vec!["i".into(), "a".into()], vec![3, -7]).unwrap();
        assert_eq!(norms(&m), (1, 7));
    }

    #[test]
    fn objective_matches_hand_evaluation() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![f64::from(i % 2), f64::from((i / 2) % 2)]).collect();
        let y = vec![1, -1, 1, 1, -1, -1, 1, -1, -1, 1];
        let d = Dataset::new(vec!["a".into(), "b".into()], rows.clone(), y.clone()).unwrap();
        let m = ScoringSystem::for_dataset(&d, vec![-1, 2, -3]).unwrap();
        let mut errs = 0;
        for (r, &yi) in rows.iter().zip(&y) {
            let s = -1.0 + 2.0 * r[0] - 3.0 * r[1];
            if f64::from(yi) * s <= 0.0 {
                errs += 1;
            }
        }
        let expected = errs as f64 / 10.0 + 0.05 * 2.0 + 1e-5 * 5.0;
        assert!((objective(&m, &d, 0.05, 1e-5).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn perfect_model_objective_is_c0_times_size() {
        let d = Dataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 1.0, 1.0], vec![0.0, 0.0, 0.0]],
            vec![1, -1],
        )
        .unwrap();
        let m = ScoringSystem::for_dataset(&d, vec![-1, 1, 1, 1]).unwrap();
        assert!((objective(&m, &d, 0.01, 0.0).unwrap() - 0.03).abs() < 1e-15);
    }

    #[test]
    fn coprimality() {
        let mk = |c: Vec<i64>| ScoringSystem::new((0..c.len()).map(|j| format!("f{j}")).collect(), c).unwrap();
        assert!(is_coprime(&mk(vec![-1, 2, 2])));
        assert!(!is_coprime(&mk(vec![2, 4, -6])));
        assert!(is_coprime(&apnea_model()));
        assert!(is_coprime(&mk(vec![0, 0])));
    }

    #[test]
    fn apnea_table() {
        let t = render_table(&apnea_model(), Some("PATIENT HAS OBSTRUCTIVE SLEEP APNEA"));
        assert!(t.starts_with("PREDICT PATIENT HAS OBSTRUCTIVE SLEEP APNEA IF SCORE > 1\n"));
        let rows: Vec<&str> = t.lines().filter(|l| l.contains("point")).collect();
        assert_eq!(rows.len(), 5);
        assert!(rows[0].starts_with("1. female") && rows[0].contains("-6 points"));
        assert!(t.contains("ADD POINTS FROM ROWS 1-5"));
        assert_eq!(t, render_table(&apnea_model(), Some("PATIENT HAS OBSTRUCTIVE SLEEP APNEA")));
    }

    #[test]
    fn mushroom_table_golden() {
        let golden = "\
PREDICT MUSHROOM IS POISONOUS IF SCORE > 3
========================================================
1. odor in {none,almond,anise}       -4 points |   .....
2. spore_print_color=green            4 points | + .....
3. gill_size=broad                   -2 points | + .....
4. population=clustered               2 points | + .....
5. stalk_surface_above_ring=grooves   2 points | + .....
--------------------------------------------------------
   ADD POINTS FROM ROWS 1-5              SCORE | = .....
";
        assert_eq!(render_table(&mushroom_model(), Some("MUSHROOM IS POISONOUS")), golden);
    }

    #[test]
    fn zero_model_table() {
        let d = Dataset::new(vec!["a".into()], vec![vec![1.0]], vec![1]).unwrap();
        let t = render_table(&ScoringSystem::zero(&d), None);
        assert!(t.starts_with("PREDICT Y = +1 IF SCORE > 0"));
        assert!(!t.contains("point"));
    }

    #[test]
    fn markdown_has_rows() {
        let md = render_markdown(&apnea_model(), None);
        assert_eq!(md.lines().filter(|l| l.contains("points")).count(), 5);
    }

    #[test]
    fn json_round_trip() {
        let m = apnea_model().with_meta(ModelMeta {
            c0: Some(0.01),
            eps: Some(1e-4),
            solver_status: Some("optimal".into()),
            gap: Some(0.0),
            coefficient_set_bounds: Some(vec![(-100, 100); 6]),
        });
        let back = ScoringSystem::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn domains() {
        let d = Domain::list(vec![-10, -5, 0, 5, 10]).unwrap();
        assert!(!d.is_interval() && d.contains(5) && !d.contains(3));
        assert_eq!(d.restrict_sign(true).values(), vec![0, 5, 10]);
        assert!(Domain::list(vec![1, 2]).is_err());
        assert!(Domain::list(vec![-1, 0, 1]).unwrap().is_interval());
        let cs = CoefficientSet::symmetric(3, 10, 100);
        assert_eq!(cs.max_l1(), 30);
        assert_eq!(cs.cardinality(), 201 * 21u128.pow(3));
    }
}
