//! Labeled datasets: CSV ingestion, binarization into threshold and category
//! rules, and class weights.
//!
//! A [`Dataset`] always carries an intercept column at index 0 whose entries
//! are identically 1, so a coefficient vector `[λ0, λ1, ..., λP]` can be dotted
//! directly with a row.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INTERCEPT_NAME: &str = "(Intercept)";

const MISSING_TOKENS: [&str; 5] = ["", "NA", "N/A", "?", "nan"];
const MAX_CATEGORIES: usize = 64;

/// A column that could not be parsed as numbers. It stays out of the feature
/// matrix until [`binarize`] turns it into category rules.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalColumn {
    pub name: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    dim: usize,
    x: Vec<f64>,
    y: Vec<i8>,
    feature_names: Vec<String>,
    missing: Vec<usize>,
    categorical: Vec<CategoricalColumn>,
}

impl Dataset {
    /// Builds a dataset from `P` named feature columns; the intercept column is
    /// prepended. Labels must be -1 or +1.
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if rows.len() != labels.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        let p = feature_names.len();
        let mut x = Vec::with_capacity(rows.len() * (p + 1));
        for row in &rows {
            if row.len() != p {
                return Err(Error::Dimension {
                    expected: p,
                    got: row.len(),
                });
            }
            x.push(1.0);
            x.extend_from_slice(row);
        }
        let mut names = Vec::with_capacity(p + 1);
        names.push(INTERCEPT_NAME.to_string());
        names.extend(feature_names);
        Self::from_parts(x, labels, names, vec![0; p + 1], Vec::new())
    }

    fn from_parts(
        x: Vec<f64>,
        y: Vec<i8>,
        feature_names: Vec<String>,
        missing: Vec<usize>,
        categorical: Vec<CategoricalColumn>,
    ) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let dim = feature_names.len();
        debug_assert_eq!(x.len(), n * dim);
        if let Some(bad) = y.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::Label {
                column: "<labels>".into(),
                message: format!("label {bad} is not -1 or +1"),
            });
        }
        let mut seen = HashSet::new();
        for name in feature_names.iter().chain(categorical.iter().map(|c| &c.name)) {
            if !seen.insert(name.as_str()) {
                return Err(Error::param(format!("duplicate feature name `{name}`")));
            }
        }
        Ok(Self {
            n,
            dim,
            x,
            y,
            feature_names,
            missing,
            categorical,
        })
    }

    /// Number of examples N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of features P (excluding the intercept).
    pub fn p(&self) -> usize {
        self.dim - 1
    }

    /// Row length P + 1.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.dim)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.dim + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn label(&self, i: usize) -> i8 {
        self.y[i]
    }

    pub fn labels(&self) -> &[i8] {
        &self.y
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Imputed-value count per column (index 0 is the intercept, always 0).
    pub fn missing_counts(&self) -> &[usize] {
        &self.missing
    }

    pub fn categorical_columns(&self) -> &[CategoricalColumn] {
        &self.categorical
    }

    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.y[i] == 1).collect()
    }

    pub fn negative_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.y[i] == -1).collect()
    }

    pub fn n_pos(&self) -> usize {
        self.y.iter().filter(|&&v| v == 1).count()
    }

    pub fn n_neg(&self) -> usize {
        self.n - self.n_pos()
    }

    /// True when every non-intercept entry is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.rows()
            .all(|r| r[1..].iter().all(|&v| v == 0.0 || v == 1.0))
    }

    /// True when every entry is an integer, so scores of integer models are exact.
    pub fn is_integral(&self) -> bool {
        self.x.iter().all(|v| v.fract() == 0.0)
    }

    /// Examples at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(indices.len() * self.dim);
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        let categorical = self
            .categorical
            .iter()
            .map(|c| CategoricalColumn {
                name: c.name.clone(),
                values: indices.iter().map(|&i| c.values[i].clone()).collect(),
            })
            .collect();
        Dataset {
            n: y.len(),
            dim: self.dim,
            x,
            y,
            feature_names: self.feature_names.clone(),
            missing: self.missing.clone(),
            categorical,
        }
    }

    /// Writes the numeric features and labels (as -1/1) with a header row.
    /// Floats use the shortest round-trip representation, so reloading the
    /// file reproduces the same bits.
    pub fn write_csv<W: Write>(&self, writer: W, label_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names[1..].iter().map(String::as_str).collect();
        header.push(label_column);
        w.write_record(&header)?;
        for i in 0..self.n {
            let mut rec: Vec<String> = self.row(i)[1..].iter().map(|v| v.to_string()).collect();
            rec.push(self.y[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file, label_column)
    }
}

/// Reads a headered CSV file. The label column may use {0, 1} or {-1, +1};
/// 0 maps to -1.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column)
}

pub fn read_csv<R: Read>(reader: R, label_column: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Label {
            column: label_column.into(),
            message: "column not found in header".into(),
        })?;

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::MalformedRow {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != headers.len() {
            return Err(Error::MalformedRow {
                line,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (k, field) in record.iter().enumerate() {
            cells[k].push(field.trim().to_string());
        }
        lines.push(line);
    }
    if lines.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let labels = cells[label_idx]
        .iter()
        .zip(&lines)
        .map(|(v, &line)| parse_label(v).ok_or_else(|| Error::Label {
            column: label_column.into(),
            message: format!("value `{v}` on line {line} is not one of 0, 1, -1, +1"),
        }))
        .collect::<Result<Vec<i8>>>()?;

    let n = labels.len();
    let mut names = vec![INTERCEPT_NAME.to_string()];
    let mut numeric_cols: Vec<Vec<f64>> = Vec::new();
    let mut missing = vec![0];
    let mut categorical = Vec::new();
    for (k, header) in headers.iter().enumerate() {
        if k == label_idx {
            continue;
        }
        let col = &cells[k];
        let is_missing = |s: &str| MISSING_TOKENS.contains(&s);
        let parsed: Option<Vec<Option<f64>>> = col
            .iter()
            .map(|s| {
                if is_missing(s) {
                    Some(None)
                } else {
                    s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
                }
            })
            .collect();
        match parsed {
            Some(values) => {
                let observed: Vec<f64> = values.iter().flatten().copied().collect();
                let n_missing = n - observed.len();
                let mean = if observed.is_empty() {
                    0.0
                } else {
                    observed.iter().sum::<f64>() / observed.len() as f64
                };
                if n_missing > 0 {
                    warn!("column `{header}`: {n_missing} missing values imputed with mean {mean}");
                }
                numeric_cols.push(values.into_iter().map(|v| v.unwrap_or(mean)).collect());
                names.push(header.clone());
                missing.push(n_missing);
            }
            None => categorical.push(CategoricalColumn {
                name: header.clone(),
                values: col.clone(),
            }),
        }
    }

    let dim = names.len();
    let mut x = Vec::with_capacity(n * dim);
    for i in 0..n {
        x.push(1.0);
        for col in &numeric_cols {
            x.push(col[i]);
        }
    }
    Dataset::from_parts(x, labels, names, missing, categorical)
}

fn parse_label(s: &str) -> Option<i8> {
    match s {
        "1" | "+1" | "1.0" | "+1.0" => Some(1),
        "0" | "-1" | "0.0" | "-1.0" => Some(-1),
        _ => None,
    }
}

/// How one original feature is turned into binary rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Directive {
    Passthrough,
    Categories,
    Midpoints,
    Thresholds(Vec<f64>),
}

/// Feature name to directive. Features without an entry pass through, except
/// non-numeric columns, which default to `categories`.
pub type BinarizationSpec = BTreeMap<String, Directive>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RuleKind {
    Passthrough,
    Threshold(f64),
    Category(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    /// Column of the rule in the binarized dataset.
    pub column: usize,
    pub name: String,
    pub kind: RuleKind,
    /// The rule takes the same value on every example.
    pub constant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleGroup {
    pub source: String,
    pub rules: Vec<Rule>,
}

/// Provenance of every column produced by [`binarize`], grouped by the
/// original feature it came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BinaryRuleSet {
    pub groups: Vec<RuleGroup>,
}

impl BinaryRuleSet {
    pub fn rule_count(&self) -> usize {
        self.groups.iter().map(|g| g.rules.len()).sum()
    }

    pub fn constant_columns(&self) -> Vec<usize> {
        self.groups
            .iter()
            .flat_map(|g| g.rules.iter())
            .filter(|r| r.constant)
            .map(|r| r.column)
            .collect()
    }

    pub fn provenance(&self, column: usize) -> Option<(&str, &RuleKind)> {
        self.groups.iter().find_map(|g| {
            g.rules
                .iter()
                .find(|r| r.column == column)
                .map(|r| (g.source.as_str(), &r.kind))
        })
    }

    /// Column indices per source feature, in group order.
    pub fn group_columns(&self) -> Vec<Vec<usize>> {
        self.groups
            .iter()
            .map(|g| g.rules.iter().map(|r| r.column).collect())
            .collect()
    }

    /// One passthrough group per feature, for datasets that are already binary.
    pub fn identity(dataset: &Dataset) -> Self {
        let groups = (1..dataset.dim())
            .map(|j| {
                let name = dataset.feature_names()[j].clone();
                let col = dataset.column(j);
                RuleGroup {
                    source: name.clone(),
                    rules: vec![Rule {
                        column: j,
                        name,
                        kind: RuleKind::Passthrough,
                        constant: is_constant(&col),
                    }],
                }
            })
            .collect();
        Self { groups }
    }
}

fn is_constant(col: &[f64]) -> bool {
    col.windows(2).all(|w| w[0] == w[1])
}

fn fmt_threshold(v: f64) -> String {
    format!("{v}")
}

/// Converts features into binary rule columns according to `spec`.
///
/// Threshold rules are `x >= v`. Thresholds outside the observed range produce
/// constant columns, which are kept and flagged in the rule set.
pub fn binarize(dataset: &Dataset, spec: &BinarizationSpec) -> Result<(Dataset, BinaryRuleSet)> {
    let known: BTreeSet<&str> = dataset.feature_names[1..]
        .iter()
        .map(String::as_str)
        .chain(dataset.categorical.iter().map(|c| c.name.as_str()))
        .collect();
    if let Some(unknown) = spec.keys().find(|k| !known.contains(k.as_str())) {
        return Err(Error::param(format!("binarization directive for unknown feature `{unknown}`")));
    }

    let n = dataset.n();
    let mut names = vec![INTERCEPT_NAME.to_string()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut missing = vec![0];
    let mut groups = Vec::new();

    let push_rule = |group: &mut RuleGroup,
                         names: &mut Vec<String>,
                         columns: &mut Vec<Vec<f64>>,
                         missing: &mut Vec<usize>,
                         name: String,
                         kind: RuleKind,
                         col: Vec<f64>,
                         n_missing: usize| {
        let constant = is_constant(&col);
        group.rules.push(Rule {
            column: names.len(),
            name: name.clone(),
            kind,
            constant,
        });
        names.push(name);
        columns.push(col);
        missing.push(n_missing);
    };

    for j in 1..dataset.dim() {
        let name = &dataset.feature_names[j];
        let col = dataset.column(j);
        let n_missing = dataset.missing[j];
        let directive = spec.get(name).cloned().unwrap_or(Directive::Passthrough);
        let mut group = RuleGroup {
            source: name.clone(),
            rules: Vec::new(),
        };
        match directive {
            Directive::Passthrough => push_rule(
                &mut group,
                &mut names,
                &mut columns,
                &mut missing,
                name.clone(),
                RuleKind::Passthrough,
                col,
                n_missing,
            ),
            Directive::Categories => {
                let mut distinct: Vec<f64> = col.clone();
                distinct.sort_by(|a, b| a.total_cmp(b));
                distinct.dedup();
                if distinct.len() > MAX_CATEGORIES {
                    return Err(Error::param(format!(
                        "feature `{name}` has {} categories (max {MAX_CATEGORIES})",
                        distinct.len()
                    )));
                }
                for v in distinct {
                    let rule: Vec<f64> = col.iter().map(|&x| f64::from(u8::from(x == v))).collect();
                    push_rule(
                        &mut group,
                        &mut names,
                        &mut columns,
                        &mut missing,
                        format!("{name}={}", fmt_threshold(v)),
                        RuleKind::Category(fmt_threshold(v)),
                        rule,
                        n_missing,
                    );
                }
            }
            Directive::Thresholds(_) | Directive::Midpoints => {
                let thresholds = match directive {
                    Directive::Thresholds(mut ts) => {
                        if let Some(bad) = ts.iter().find(|t| !t.is_finite()) {
                            return Err(Error::param(format!("feature `{name}`: threshold {bad} is not finite")));
                        }
                        ts.sort_by(|a, b| a.total_cmp(b));
                        ts.dedup();
                        ts
                    }
                    _ => midpoints(&col),
                };
                let (lo, hi) = col
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                for v in thresholds {
                    if v <= lo || v > hi {
                        warn!("feature `{name}`: threshold {v} outside observed range [{lo}, {hi}]; rule is constant");
                    }
                    let rule: Vec<f64> = col.iter().map(|&x| f64::from(u8::from(x >= v))).collect();
                    push_rule(
                        &mut group,
                        &mut names,
                        &mut columns,
                        &mut missing,
                        format!("{name}>={}", fmt_threshold(v)),
                        RuleKind::Threshold(v),
                        rule,
                        n_missing,
                    );
                }
            }
        }
        groups.push(group);
    }

    for cat in &dataset.categorical {
        let directive = spec.get(&cat.name).cloned().unwrap_or(Directive::Categories);
        if directive != Directive::Categories {
            return Err(Error::param(format!(
                "feature `{}` is not numeric; only the `categories` directive applies",
                cat.name
            )));
        }
        let distinct: BTreeSet<&str> = cat.values.iter().map(String::as_str).collect();
        if distinct.len() > MAX_CATEGORIES {
            return Err(Error::param(format!(
                "feature `{}` has {} categories (max {MAX_CATEGORIES})",
                cat.name,
                distinct.len()
            )));
        }
        let n_missing = cat.values.iter().filter(|v| MISSING_TOKENS.contains(&v.as_str())).count();
        let mut group = RuleGroup {
            source: cat.name.clone(),
            rules: Vec::new(),
        };
        for v in distinct {
            let rule: Vec<f64> = cat.values.iter().map(|x| f64::from(u8::from(x == v))).collect();
            push_rule(
                &mut group,
                &mut names,
                &mut columns,
                &mut missing,
                format!("{}={v}", cat.name),
                RuleKind::Category(v.to_string()),
                rule,
                n_missing,
            );
        }
        groups.push(group);
    }

    let dim = names.len();
    let mut x = Vec::with_capacity(n * dim);
    for i in 0..n {
        x.push(1.0);
        for c in &columns {
            x.push(c[i]);
        }
    }
    let out = Dataset::from_parts(x, dataset.y.clone(), names, missing, Vec::new())?;
    Ok((out, BinaryRuleSet { groups }))
}

/// Thresholds halfway between adjacent distinct values; at most N - 1 of them.
fn midpoints(col: &[f64]) -> Vec<f64> {
    let mut distinct = col.to_vec();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub w_pos: f64,
    pub w_neg: f64,
}

impl ClassWeights {
    /// The unweighted objective: every example counts 1/N.
    pub const UNIT: ClassWeights = ClassWeights { w_pos: 1.0, w_neg: 1.0 };

    pub fn weight(&self, label: i8) -> f64 {
        if label > 0 {
            self.w_pos
        } else {
            self.w_neg
        }
    }

    pub fn is_normalized(&self) -> bool {
        (self.w_pos + self.w_neg - 1.0).abs() <= 1e-12
    }
}

impl Default for ClassWeights {
    fn default() -> Self {
        Self::UNIT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Uniform,
    Balanced,
    MaxSensitivity,
    Custom { w_pos: f64, w_neg: f64 },
}

impl Default for WeightMode {
    fn default() -> Self {
        WeightMode::Uniform
    }
}

pub fn class_weights(dataset: &Dataset, mode: WeightMode) -> Result<ClassWeights> {
    let n = dataset.n() as f64;
    let (n_pos, n_neg) = (dataset.n_pos(), dataset.n_neg());
    let need_both = || {
        if n_pos == 0 || n_neg == 0 {
            Err(Error::param(format!(
                "{mode:?} weights need both classes (N+ = {n_pos}, N- = {n_neg})"
            )))
        } else {
            Ok(())
        }
    };
    match mode {
        WeightMode::Uniform => Ok(ClassWeights::UNIT),
        WeightMode::Balanced => {
            need_both()?;
            Ok(ClassWeights {
                w_pos: n_neg as f64 / n,
                w_neg: n_pos as f64 / n,
            })
        }
        WeightMode::MaxSensitivity => {
            need_both()?;
            let w_pos = n_neg as f64 / (1.0 + n_neg as f64);
            Ok(ClassWeights {
                w_pos,
                w_neg: 1.0 - w_pos,
            })
        }
        WeightMode::Custom { w_pos, w_neg } => {
            if !(w_pos >= 0.0 && w_neg >= 0.0 && w_pos.is_finite() && w_neg.is_finite()) {
                return Err(Error::param("class weights must be finite and nonnegative"));
            }
            Ok(ClassWeights { w_pos, w_neg })
        }
    }
}
