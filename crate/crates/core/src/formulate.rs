//! Integer programs for SLIM and its variants.
//!
//! An [`IpInstance`] is a plain MILP (variables, linear rows, objective) with
//! enough metadata to map between solver assignments and scoring systems.
//! Every variable other than the coefficients is definitionally determined by
//! the coefficients, which [`IpInstance::complete`] exploits.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{BinaryRuleSet, ClassWeights, Dataset};
use crate::error::{Error, Result};
use crate::scoring::{CoefficientSet, Domain, ModelMeta, Penalties, ScoringSystem};

pub const DEFAULT_GAMMA: f64 = 0.1;
pub const DEFAULT_INTERCEPT_CAP: i64 = 100;
pub const DEFAULT_CAP: i64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Integer,
    Binary,
    Continuous,
}

impl VarKind {
    pub fn is_integer(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

/// What a variable means in the model. Indices `j` are coefficient indices
/// (0 is the intercept); `i` are example indices; `g` are rule groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Role {
    Coefficient(usize),
    Selector { coef: usize, value: i64, cost: f64 },
    Loss(usize),
    Penalty(usize),
    L0(usize),
    L1(usize),
    FeatureUse(usize),
    ExtraRules(usize),
    SignAgree(usize),
}

impl Role {
    /// Branching class: coefficients first, then indicators, then losses.
    pub fn branch_class(&self) -> u8 {
        match self {
            Role::Coefficient(_) | Role::Selector { .. } => 0,
            Role::L0(_) | Role::FeatureUse(_) | Role::SignAgree(_) | Role::ExtraRules(_) => 1,
            Role::Loss(_) => 2,
            Role::Penalty(_) | Role::L1(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Which part of the formulation a row belongs to; used to name rows and to
/// probe infeasibility by dropping one family at a time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Loss,
    Penalty,
    L0Link,
    L1Link,
    Selector,
    Variant,
    Operational(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub family: Family,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(k, a)| a * x[k]).sum()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Slim,
    Pilm,
    MofN,
    Tilm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub kind: ModelKind,
    pub gamma: f64,
    pub big_m: Vec<f64>,
    /// ℓ0 cost per coefficient (index 0 unused).
    pub c0: Vec<f64>,
    pub eps: f64,
    pub weights: ClassWeights,
    pub normalizer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpInstance {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<f64>,
    pub meta: InstanceMeta,
    pub feature_names: Vec<String>,
    /// Variable index of each coefficient λ_j.
    pub coef_vars: Vec<usize>,
    /// Allowed values of each coefficient.
    pub domains: Vec<Domain>,
    /// Variable index of each loss indicator ψ_i.
    pub loss_vars: Vec<usize>,
    /// Row index of each loss constraint.
    pub loss_rows: Vec<usize>,
    /// Examples sharing each loss row; singletons unless duplicates were merged.
    #[serde(default)]
    pub loss_groups: Vec<Vec<usize>>,
    /// Rule groups (TILM) as lists of coefficient indices.
    pub groups: Vec<Vec<usize>>,
}

impl IpInstance {
    fn empty(kind: ModelKind, meta: InstanceMeta, feature_names: Vec<String>) -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            meta: InstanceMeta { kind, ..meta },
            feature_names,
            coef_vars: Vec::new(),
            domains: Vec::new(),
            loss_vars: Vec::new(),
            loss_rows: Vec::new(),
            loss_groups: Vec::new(),
            groups: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    fn add_var(&mut self, name: String, kind: VarKind, lo: f64, hi: f64, role: Role, cost: f64) -> usize {
        self.variables.push(Variable { name, kind, lo, hi, role });
        self.objective.push(cost);
        self.variables.len() - 1
    }

    fn add_row(&mut self, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64, family: Family) -> usize {
        self.constraints.push(Constraint {
            name,
            terms,
            sense,
            rhs,
            family,
        });
        self.constraints.len() - 1
    }

    fn find_role(&self, pred: impl Fn(&Role) -> bool) -> Option<usize> {
        self.variables.iter().position(|v| pred(&v.role))
    }

    pub fn alpha_var(&self, j: usize) -> Option<usize> {
        self.find_role(|r| *r == Role::L0(j))
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lo - xv).max(xv - v.hi).max(0.0))
            .fold(0.0, f64::max);
        self.constraints.iter().map(|c| c.violation(x)).fold(bounds, f64::max)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x) <= tol
    }

    /// Score margins `y_i λᵀx_i` read off the loss rows (one per loss group).
    pub fn margins(&self, coefficients: &[i64]) -> Vec<f64> {
        let mut pos = vec![usize::MAX; self.variables.len()];
        for (j, &v) in self.coef_vars.iter().enumerate() {
            pos[v] = j;
        }
        self.loss_rows
            .iter()
            .map(|&r| {
                self.constraints[r]
                    .terms
                    .iter()
                    .filter(|(k, _)| pos[*k] != usize::MAX)
                    .map(|&(k, a)| a * coefficients[pos[k]] as f64)
                    .sum()
            })
            .collect()
    }

    /// Fills every variable from an integer coefficient vector by definition:
    /// ψ_i = 1 iff the margin is below γ, α_j = [λ_j ≠ 0], β_j = |λ_j| and so on.
    /// The result may still violate operational rows; check with
    /// [`IpInstance::is_feasible`].
    pub fn complete(&self, coefficients: &[i64]) -> Vec<f64> {
        assert_eq!(coefficients.len(), self.coef_vars.len());
        let gamma = self.meta.gamma;
        let mut x = vec![0.0; self.variables.len()];
        for (j, &v) in self.coef_vars.iter().enumerate() {
            x[v] = coefficients[j] as f64;
        }
        let margins = self.margins(coefficients);
        for (i, &v) in self.loss_vars.iter().enumerate() {
            x[v] = if margins[i] < gamma - 1e-9 { 1.0 } else { 0.0 };
        }
        for (k, var) in self.variables.iter().enumerate() {
            x[k] = match var.role {
                Role::Coefficient(_) | Role::Loss(_) | Role::Penalty(_) => x[k],
                Role::Selector { coef, value, .. } => f64::from(u8::from(coefficients[coef] == value)),
                Role::L0(j) => f64::from(u8::from(coefficients[j] != 0)),
                Role::L1(j) => coefficients[j].unsigned_abs() as f64,
                Role::FeatureUse(g) => {
                    f64::from(u8::from(self.groups[g].iter().any(|&j| coefficients[j] != 0)))
                }
                Role::ExtraRules(g) => {
                    let used = self.groups[g].iter().filter(|&&j| coefficients[j] != 0).count();
                    used.saturating_sub(1) as f64
                }
                Role::SignAgree(g) => {
                    let any_neg = self.groups[g].iter().any(|&j| coefficients[j] < 0);
                    f64::from(u8::from(!any_neg))
                }
            };
        }
        // penalty variables are defined by their equality rows
        for row in &self.constraints {
            if row.family != Family::Penalty {
                continue;
            }
            let (phi, rest): (Vec<_>, Vec<_>) = row
                .terms
                .iter()
                .partition(|(k, _)| matches!(self.variables[*k].role, Role::Penalty(_)));
            if let [(k, a)] = phi[..] {
                let others: f64 = rest.iter().map(|&(kk, aa)| aa * x[kk]).sum();
                x[k] = (row.rhs - others) / a;
            }
        }
        x
    }

    /// Coefficient vector of an assignment, rounded to the nearest integers.
    pub fn coefficients_of(&self, x: &[f64]) -> Vec<i64> {
        self.coef_vars.iter().map(|&v| x[v].round() as i64).collect()
    }

    pub fn model_from(&self, x: &[f64]) -> Result<ScoringSystem> {
        let model = ScoringSystem::new(self.feature_names.clone(), self.coefficients_of(x))?;
        Ok(model.with_meta(ModelMeta {
            c0: self.meta.c0.get(1).copied(),
            eps: Some(self.meta.eps),
            solver_status: None,
            gap: None,
            coefficient_set_bounds: Some(self.domains.iter().map(|d| (d.lo, d.hi)).collect()),
        }))
    }

    /// Objective ingredients in scoring terms, for instances whose penalty is
    /// a per-coefficient ℓ0 cost plus ε·ℓ1 (SLIM).
    pub fn penalties(&self) -> Penalties {
        Penalties {
            c0: self.meta.c0.clone(),
            eps: self.meta.eps,
            weights: self.meta.weights,
            normalizer: self.meta.normalizer,
        }
    }

    /// CPLEX LP-format text, for cross-checking with external solvers.
    pub fn to_lp_format(&self) -> String {
        let name = |k: usize| format!("x{k}");
        let term = |a: f64, k: usize| format!("{} {a} {}", if a < 0.0 { "-" } else { "+" }, name(k)).replace("- -", "- ");
        let mut out = String::from("\\ SLIM instance\nMinimize\n obj:");
        for (k, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = write!(out, " {}", term(c, k));
            }
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{r}:");
            for &(k, a) in &row.terms {
                let _ = write!(out, " {}", term(a, k));
            }
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", row.rhs);
        }
        out.push_str("Bounds\n");
        for (k, v) in self.variables.iter().enumerate() {
            let _ = writeln!(out, " {} <= {} <= {}", v.lo, name(k), v.hi);
        }
        let ints: Vec<String> = (0..self.variables.len())
            .filter(|&k| self.variables[k].kind.is_integer())
            .map(name)
            .collect();
        if !ints.is_empty() {
            let _ = writeln!(out, "General\n {}", ints.join(" "));
        }
        out.push_str("End\n");
        out
    }
}

/// A feature by 1-based column index or by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureRef {
    Index(usize),
    Name(String),
}

impl FeatureRef {
    pub fn resolve(&self, names: &[String]) -> Result<usize> {
        let j = match self {
            FeatureRef::Index(j) => *j,
            FeatureRef::Name(n) => names
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| Error::param(format!("unknown feature `{n}`")))?,
        };
        if j == 0 || j >= names.len() {
            return Err(Error::param(format!("feature index {j} out of range 1..={}", names.len() - 1)));
        }
        Ok(j)
    }
}

impl From<usize> for FeatureRef {
    fn from(j: usize) -> Self {
        FeatureRef::Index(j)
    }
}

impl From<&str> for FeatureRef {
    fn from(n: &str) -> Self {
        FeatureRef::Name(n.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignReq {
    Positive,
    Negative,
}

/// Operational constraints and preferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConstraintSpec {
    /// Errors on negatives at most ⌊γ·N−⌋.
    MaxFpr { gamma: f64 },
    /// Errors on positives at most ⌊(1 − tpr)·N+⌋.
    MinTpr { tpr: f64 },
    MaxModelSize { theta: usize },
    Sign { feature: FeatureRef, sign: SignReq },
    /// Antecedents may only be used together with the consequent.
    IfThen { antecedents: Vec<FeatureRef>, consequent: FeatureRef },
    /// The leaf may only be used if every listed node is used.
    Hierarchy { leaf: FeatureRef, nodes: Vec<FeatureRef> },
    PerFeaturePenalty { feature: FeatureRef, c0: f64 },
    PinZero { feature: FeatureRef },
}

/// [`ConstraintSpec`] with features resolved to column indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    MaxFpr(f64),
    MinTpr(f64),
    MaxModelSize(usize),
    Sign(usize, SignReq),
    IfThen(Vec<usize>, usize),
    Hierarchy(usize, Vec<usize>),
    PerFeaturePenalty(usize, f64),
    PinZero(usize),
}

pub fn resolve_constraints(specs: &[ConstraintSpec], names: &[String]) -> Result<Vec<Resolved>> {
    let p = names.len() - 1;
    specs
        .iter()
        .map(|s| {
            Ok(match s {
                ConstraintSpec::MaxFpr { gamma } => {
                    if !(*gamma > 0.0 && *gamma < 1.0) {
                        return Err(Error::param(format!("max FPR {gamma} must lie in (0, 1)")));
                    }
                    Resolved::MaxFpr(*gamma)
                }
                ConstraintSpec::MinTpr { tpr } => {
                    if !(*tpr > 0.0 && *tpr <= 1.0) {
                        return Err(Error::param(format!("min TPR {tpr} must lie in (0, 1]")));
                    }
                    Resolved::MinTpr(*tpr)
                }
                ConstraintSpec::MaxModelSize { theta } => {
                    if *theta > p {
                        return Err(Error::param(format!("model size cap {theta} exceeds P = {p}")));
                    }
                    Resolved::MaxModelSize(*theta)
                }
                ConstraintSpec::Sign { feature, sign } => Resolved::Sign(feature.resolve(names)?, *sign),
                ConstraintSpec::IfThen { antecedents, consequent } => Resolved::IfThen(
                    antecedents.iter().map(|f| f.resolve(names)).collect::<Result<_>>()?,
                    consequent.resolve(names)?,
                ),
                ConstraintSpec::Hierarchy { leaf, nodes } => Resolved::Hierarchy(
                    leaf.resolve(names)?,
                    nodes.iter().map(|f| f.resolve(names)).collect::<Result<_>>()?,
                ),
                ConstraintSpec::PerFeaturePenalty { feature, c0 } => {
                    if !(*c0 >= 0.0 && c0.is_finite()) {
                        return Err(Error::param(format!("penalty {c0} must be finite and nonnegative")));
                    }
                    Resolved::PerFeaturePenalty(feature.resolve(names)?, *c0)
                }
                ConstraintSpec::PinZero { feature } => Resolved::PinZero(feature.resolve(names)?),
            })
        })
        .collect()
}

/// Right-hand side ⌊fraction·count⌋, guarded against representation error.
pub fn floor_count(fraction: f64, count: usize) -> usize {
    (fraction * count as f64 + 1e-9).floor().max(0.0) as usize
}

/// M_i = max over L of (γ − y_i λᵀx_i), in closed form per coordinate.
pub fn big_m_loss(dataset: &Dataset, coefficients: &CoefficientSet, gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0) {
        return Err(Error::param("margin γ must be positive"));
    }
    if coefficients.len() != dataset.dim() {
        return Err(Error::Dimension {
            expected: dataset.dim(),
            got: coefficients.len(),
        });
    }
    Ok((0..dataset.n())
        .map(|i| {
            let y = f64::from(dataset.label(i));
            gamma
                + dataset
                    .row(i)
                    .iter()
                    .zip(coefficients.domains())
                    .map(|(&x, d)| {
                        let a = -y * x;
                        (a * d.lo as f64).max(a * d.hi as f64)
                    })
                    .sum::<f64>()
        })
        .collect())
}

/// 0.1, with a warning when any feature is not binary.
pub fn default_gamma(dataset: &Dataset) -> f64 {
    static WARNED: std::sync::Once = std::sync::Once::new();
    if !dataset.is_binary() {
        WARNED.call_once(|| warn!("features are not all binary; the default margin 0.1 assumes binary features"));
    }
    DEFAULT_GAMMA
}

/// Half the largest ε for which ε·‖λ‖1 can never outweigh one error or one
/// nonzero coefficient.
pub fn default_epsilon(c0: f64, n: usize, coefficients: &CoefficientSet) -> f64 {
    let max_l1 = coefficients.max_l1().max(1) as f64;
    0.5 * (1.0 / n as f64).min(c0) / max_l1
}

/// C0 + M/N for a feature with M imputed values.
pub fn missing_data_penalty(c0: f64, m_missing: usize, n: f64) -> f64 {
    c0 + m_missing as f64 / n
}

/// Parameters of the SLIM objective.
#[derive(Debug, Clone, PartialEq)]
pub struct SlimParams {
    pub c0: f64,
    /// `None` picks [`default_epsilon`].
    pub eps: Option<f64>,
    pub gamma: f64,
    pub coefficients: CoefficientSet,
    pub weights: ClassWeights,
    /// Divides the weighted error count; `None` uses N.
    pub loss_normalizer: Option<f64>,
    /// Adjust ℓ0 costs of features with imputed values.
    pub missing_adjustment: bool,
    /// Share one weighted loss row among identical examples.
    pub merge_duplicates: bool,
}

impl SlimParams {
    /// `{−cap..cap}` per feature and `{−intercept_cap..intercept_cap}` for the intercept.
    pub fn new(dataset: &Dataset, c0: f64, cap: i64, intercept_cap: i64) -> Self {
        Self {
            c0,
            eps: None,
            gamma: default_gamma(dataset),
            coefficients: CoefficientSet::symmetric(dataset.p(), cap, intercept_cap),
            weights: ClassWeights::UNIT,
            loss_normalizer: None,
            missing_adjustment: true,
            merge_duplicates: false,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn with_weights(mut self, weights: ClassWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_merged_duplicates(mut self, merge: bool) -> Self {
        self.merge_duplicates = merge;
        self
    }

    pub fn with_normalizer(mut self, normalizer: f64) -> Self {
        self.loss_normalizer = Some(normalizer);
        self
    }

    pub fn epsilon(&self, n: usize) -> f64 {
        self.eps.unwrap_or_else(|| default_epsilon(self.c0, n, &self.coefficients))
    }
}

/// Coefficient set and ℓ0 costs after applying sign, pin and penalty specs.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveObjective {
    pub coefficients: CoefficientSet,
    pub penalties: Penalties,
    pub rows: Vec<Resolved>,
}

/// Applies the domain-shaping constraint specs and missing-data costs; the
/// remaining specs are returned as rows. Shared by the IP builder and the
/// exhaustive oracle.
pub fn effective_objective(dataset: &Dataset, params: &SlimParams, specs: &[ConstraintSpec]) -> Result<EffectiveObjective> {
    if !(params.c0 > 0.0) || !params.c0.is_finite() {
        return Err(Error::param(format!("C0 = {} must be positive", params.c0)));
    }
    if params.coefficients.len() != dataset.dim() {
        return Err(Error::Dimension {
            expected: dataset.dim(),
            got: params.coefficients.len(),
        });
    }
    let n = dataset.n();
    let eps = params.epsilon(n);
    if !(eps >= 0.0) {
        return Err(Error::param("ε must be nonnegative"));
    }
    let resolved = resolve_constraints(specs, dataset.feature_names())?;
    let mut coefs = params.coefficients.clone();
    let normalizer = params.loss_normalizer.unwrap_or(n as f64);
    let mut c0 = vec![params.c0; dataset.dim()];
    c0[0] = 0.0;
    if params.missing_adjustment {
        // measured against the full-data size so reduced problems keep the original costs
        for (j, &m) in dataset.missing_counts().iter().enumerate().skip(1) {
            if m > 0 {
                c0[j] = missing_data_penalty(params.c0, m, normalizer);
            }
        }
    }
    let mut rows = Vec::new();
    for spec in resolved {
        match spec {
            Resolved::Sign(j, sign) => {
                let d = coefs.domain(j).restrict_sign(sign == SignReq::Positive);
                if d.size() == 1 {
                    return Err(Error::Infeasible(format!(
                        "sign constraint on `{}` leaves only 0 in its coefficient set",
                        dataset.feature_names()[j]
                    )));
                }
                coefs.set_domain(j, d)?;
            }
            Resolved::PinZero(j) => coefs.set_domain(j, Domain::interval(0, 0)?)?,
            Resolved::PerFeaturePenalty(j, c) => c0[j] = c,
            other => rows.push(other),
        }
    }
    let min_c = c0[1..].iter().copied().fold(f64::INFINITY, f64::min);
    let bound = (1.0 / n as f64).min(min_c) / coefs.max_l1().max(1) as f64;
    if eps >= bound && params.eps.is_some() {
        warn!("ε = {eps} is not below min(1/N, C0)/max‖λ‖1 = {bound}; optima may not be sparsest or coprime");
    }
    Ok(EffectiveObjective {
        coefficients: coefs,
        penalties: Penalties {
            c0,
            eps,
            weights: params.weights,
            normalizer,
        },
        rows,
    })
}

fn meta_for(kind: ModelKind, gamma: f64, big_m: Vec<f64>, penalties: &Penalties) -> InstanceMeta {
    InstanceMeta {
        kind,
        gamma,
        big_m,
        c0: penalties.c0.clone(),
        eps: penalties.eps,
        weights: penalties.weights,
        normalizer: penalties.normalizer,
    }
}

/// Adds λ variables (with selectors for domains with holes), ψ variables and
/// the Big-M loss rows.
fn add_coefficients_and_loss(inst: &mut IpInstance, dataset: &Dataset, coefs: &CoefficientSet, gamma: f64, merge: bool) -> Result<()> {
    for j in 0..coefs.len() {
        let d = coefs.domain(j).clone();
        let v = inst.add_var(
            format!("lambda_{j}"),
            VarKind::Integer,
            d.lo as f64,
            d.hi as f64,
            Role::Coefficient(j),
            0.0,
        );
        inst.coef_vars.push(v);
        if let Some(values) = &d.values {
            let sel: Vec<usize> = values
                .iter()
                .map(|&val| {
                    inst.add_var(
                        format!("u_{j}_{val}"),
                        VarKind::Binary,
                        0.0,
                        1.0,
                        Role::Selector {
                            coef: j,
                            value: val,
                            cost: 0.0,
                        },
                        0.0,
                    )
                })
                .collect();
            inst.add_row(
                format!("select_one_{j}"),
                sel.iter().map(|&u| (u, 1.0)).collect(),
                Sense::Eq,
                1.0,
                Family::Selector,
            );
            let mut terms = vec![(v, 1.0)];
            terms.extend(sel.iter().zip(values).map(|(&u, &val)| (u, -(val as f64))));
            inst.add_row(format!("select_value_{j}"), terms, Sense::Eq, 0.0, Family::Selector);
        }
        inst.domains.push(d);
    }
    add_loss_rows(inst, dataset, coefs, gamma, merge)
}

fn add_loss_rows(inst: &mut IpInstance, dataset: &Dataset, coefs: &CoefficientSet, gamma: f64, merge: bool) -> Result<()> {
    let big_m = big_m_loss(dataset, coefs, gamma)?;
    let w = inst.meta.weights;
    let norm = inst.meta.normalizer;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    if merge {
        let mut seen: HashMap<(Vec<u64>, i8), usize> = HashMap::new();
        for i in 0..dataset.n() {
            let key = (dataset.row(i).iter().map(|v| v.to_bits()).collect(), dataset.label(i));
            let g = *seen.entry(key).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
    } else {
        groups = (0..dataset.n()).map(|i| vec![i]).collect();
    }
    for members in &groups {
        let i = members[0];
        let y = dataset.label(i);
        let cost = w.weight(y) * members.len() as f64 / norm;
        let psi = inst.add_var(format!("psi_{i}"), VarKind::Binary, 0.0, 1.0, Role::Loss(i), cost);
        inst.loss_vars.push(psi);
        let mut terms = vec![(psi, big_m[i])];
        for (j, &x) in dataset.row(i).iter().enumerate() {
            if x != 0.0 {
                terms.push((inst.coef_vars[j], f64::from(y) * x));
            }
        }
        let r = inst.add_row(format!("loss_{i}"), terms, Sense::Ge, gamma, Family::Loss);
        inst.loss_rows.push(r);
    }
    inst.meta.big_m = groups.iter().map(|g| big_m[g[0]]).collect();
    inst.loss_groups = groups;
    Ok(())
}

/// Σ ψ over the examples of one class, weighting merged rows by their size.
fn class_loss_terms(inst: &IpInstance, dataset: &Dataset, label: i8) -> Vec<(usize, f64)> {
    inst.loss_groups
        .iter()
        .zip(&inst.loss_vars)
        .filter(|(g, _)| dataset.label(g[0]) == label)
        .map(|(g, &v)| (v, g.len() as f64))
        .collect()
}

fn add_operational_rows(inst: &mut IpInstance, dataset: &Dataset, rows: &[Resolved]) -> Result<()> {
    for spec in rows {
        match spec {
            Resolved::MaxFpr(g) => add_max_fpr_row(inst, *g, dataset)?,
            Resolved::MinTpr(t) => {
                let pos = dataset.positive_indices();
                if pos.is_empty() {
                    return Err(Error::param("minimum TPR needs positive examples"));
                }
                let rhs = floor_count(1.0 - t, pos.len());
                inst.add_row(
                    "min_tpr".into(),
                    class_loss_terms(inst, dataset, 1),
                    Sense::Le,
                    rhs as f64,
                    Family::Operational("min_tpr".into()),
                );
            }
            Resolved::MaxModelSize(theta) => {
                let terms = (1..dataset.dim())
                    .filter_map(|j| inst.alpha_var(j).map(|a| (a, 1.0)))
                    .collect();
                inst.add_row(
                    "max_model_size".into(),
                    terms,
                    Sense::Le,
                    *theta as f64,
                    Family::Operational("max_model_size".into()),
                );
            }
            Resolved::IfThen(ants, cons) => {
                let a_cons = inst.alpha_var(*cons).ok_or_else(|| Error::param("if-then needs ℓ0 indicators"))?;
                let mut terms: Vec<(usize, f64)> = ants
                    .iter()
                    .map(|&j| inst.alpha_var(j).map(|a| (a, 1.0)))
                    .collect::<Option<_>>()
                    .ok_or_else(|| Error::param("if-then needs ℓ0 indicators"))?;
                terms.push((a_cons, -(ants.len() as f64)));
                inst.add_row("if_then".into(), terms, Sense::Le, 0.0, Family::Operational("if_then".into()));
            }
            Resolved::Hierarchy(leaf, nodes) => {
                let a_leaf = inst.alpha_var(*leaf).ok_or_else(|| Error::param("hierarchy needs ℓ0 indicators"))?;
                for &node in nodes {
                    let a_node = inst.alpha_var(node).ok_or_else(|| Error::param("hierarchy needs ℓ0 indicators"))?;
                    inst.add_row(
                        format!("hierarchy_{leaf}_{node}"),
                        vec![(a_leaf, 1.0), (a_node, -1.0)],
                        Sense::Le,
                        0.0,
                        Family::Operational("hierarchy".into()),
                    );
                }
            }
            Resolved::Sign(..) | Resolved::PinZero(_) | Resolved::PerFeaturePenalty(..) => {}
        }
    }
    Ok(())
}

fn add_max_fpr_row(inst: &mut IpInstance, gamma_fpr: f64, dataset: &Dataset) -> Result<()> {
    if !(gamma_fpr > 0.0 && gamma_fpr < 1.0) {
        return Err(Error::param(format!("max FPR {gamma_fpr} must lie in (0, 1)")));
    }
    let neg = dataset.negative_indices();
    if neg.is_empty() {
        return Err(Error::param("maximum FPR needs negative examples"));
    }
    let rhs = floor_count(gamma_fpr, neg.len());
    inst.add_row(
        "max_fpr".into(),
        class_loss_terms(inst, dataset, -1),
        Sense::Le,
        rhs as f64,
        Family::Operational("max_fpr".into()),
    );
    Ok(())
}

/// Appends Σ_{i∈I−} ψ_i ≤ ⌊γ_fpr·N−⌋.
pub fn add_max_fpr(mut instance: IpInstance, gamma_fpr: f64, dataset: &Dataset) -> Result<IpInstance> {
    add_max_fpr_row(&mut instance, gamma_fpr, dataset)?;
    Ok(instance)
}

/// The SLIM integer program with loss, penalty, ℓ0 and ℓ1 rows plus any
/// operational constraints.
pub fn build_slim(dataset: &Dataset, params: &SlimParams, constraints: &[ConstraintSpec]) -> Result<IpInstance> {
    let eff = effective_objective(dataset, params, constraints)?;
    let meta = meta_for(ModelKind::Slim, params.gamma, Vec::new(), &eff.penalties);
    let mut inst = IpInstance::empty(ModelKind::Slim, meta, dataset.feature_names().to_vec());
    add_coefficients_and_loss(&mut inst, dataset, &eff.coefficients, params.gamma, params.merge_duplicates)?;

    let eps = eff.penalties.eps;
    for j in 1..dataset.dim() {
        let cap = eff.coefficients.cap(j) as f64;
        let cj = eff.penalties.c0[j];
        let phi = inst.add_var(format!("phi_{j}"), VarKind::Continuous, 0.0, cj + eps * cap, Role::Penalty(j), 0.0);
        let alpha = inst.add_var(format!("alpha_{j}"), VarKind::Binary, 0.0, 1.0, Role::L0(j), cj);
        let beta = inst.add_var(format!("beta_{j}"), VarKind::Continuous, 0.0, cap, Role::L1(j), eps);
        let lam = inst.coef_vars[j];
        inst.add_row(
            format!("penalty_{j}"),
            vec![(phi, 1.0), (alpha, -cj), (beta, -eps)],
            Sense::Eq,
            0.0,
            Family::Penalty,
        );
        let (lo, hi) = (eff.coefficients.domain(j).lo as f64, eff.coefficients.domain(j).hi as f64);
        // λ_j ≤ Λ_j α_j and λ_j ≥ −Λ_j α_j, with the sign-specific extremes
        inst.add_row(format!("l0_upper_{j}"), vec![(lam, 1.0), (alpha, -hi)], Sense::Le, 0.0, Family::L0Link);
        inst.add_row(format!("l0_lower_{j}"), vec![(lam, 1.0), (alpha, -lo)], Sense::Ge, 0.0, Family::L0Link);
        inst.add_row(format!("l1_upper_{j}"), vec![(lam, 1.0), (beta, -1.0)], Sense::Le, 0.0, Family::L1Link);
        inst.add_row(format!("l1_lower_{j}"), vec![(lam, 1.0), (beta, 1.0)], Sense::Ge, 0.0, Family::L1Link);
    }
    add_operational_rows(&mut inst, dataset, &eff.rows)?;
    Ok(inst)
}

/// One tier of a PILM coefficient set: its values and their shared penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretabilitySet {
    pub values: Vec<i64>,
    pub cost: f64,
}

impl InterpretabilitySet {
    pub fn new(values: Vec<i64>, cost: f64) -> Self {
        Self { values, cost }
    }

    /// `±{lo..hi}`.
    pub fn symmetric_range(lo: i64, hi: i64, cost: f64) -> Self {
        let values = (lo..=hi).flat_map(|v| [-v, v]).collect();
        Self { values, cost }
    }
}

/// Tiered coefficient sets: each coefficient picks exactly one value, paying
/// the cost of that value's tier.
pub fn build_pilm(
    dataset: &Dataset,
    sets: &[InterpretabilitySet],
    gamma: f64,
    weights: ClassWeights,
    intercept: Domain,
) -> Result<IpInstance> {
    if sets.is_empty() {
        return Err(Error::param("PILM needs at least one interpretability set"));
    }
    let mut seen = std::collections::HashSet::new();
    for s in sets {
        for &v in &s.values {
            if !seen.insert(v) {
                return Err(Error::param(format!("interpretability sets overlap at value {v}")));
            }
        }
    }
    if sets.windows(2).any(|w| !(w[0].cost < w[1].cost)) {
        return Err(Error::param("interpretability set costs must be strictly increasing"));
    }
    if !seen.contains(&0) {
        return Err(Error::param("interpretability sets must contain 0"));
    }
    let mut all: Vec<i64> = seen.into_iter().collect();
    all.sort_unstable();
    let feature_domain = Domain::list(all)?;
    let mut domains = vec![intercept];
    domains.extend((1..dataset.dim()).map(|_| feature_domain.clone()));
    let coefs = CoefficientSet::new(domains)?;

    let mut c0 = vec![0.0; dataset.dim()];
    let zero_cost = sets.iter().find(|s| s.values.contains(&0)).map(|s| s.cost).unwrap_or(0.0);
    for c in c0.iter_mut().skip(1) {
        *c = sets.iter().map(|s| s.cost).fold(f64::INFINITY, f64::min).max(zero_cost);
    }
    let penalties = Penalties {
        c0,
        eps: 0.0,
        weights,
        normalizer: dataset.n() as f64,
    };
    let meta = meta_for(ModelKind::Pilm, gamma, Vec::new(), &penalties);
    let mut inst = IpInstance::empty(ModelKind::Pilm, meta, dataset.feature_names().to_vec());

    for j in 0..dataset.dim() {
        let d = coefs.domain(j).clone();
        let v = inst.add_var(format!("lambda_{j}"), VarKind::Integer, d.lo as f64, d.hi as f64, Role::Coefficient(j), 0.0);
        inst.coef_vars.push(v);
        inst.domains.push(d);
    }
    add_loss_rows(&mut inst, dataset, &coefs, gamma, false)?;
    let max_cost = sets.iter().map(|s| s.cost).fold(0.0, f64::max);
    for j in 1..dataset.dim() {
        let lam = inst.coef_vars[j];
        let phi = inst.add_var(format!("phi_{j}"), VarKind::Continuous, 0.0, max_cost, Role::Penalty(j), 0.0);
        let mut sel = Vec::new();
        for s in sets {
            for &val in &s.values {
                let u = inst.add_var(
                    format!("u_{j}_{val}"),
                    VarKind::Binary,
                    0.0,
                    1.0,
                    Role::Selector {
                        coef: j,
                        value: val,
                        cost: s.cost,
                    },
                    s.cost,
                );
                sel.push((u, val, s.cost));
            }
        }
        inst.add_row(format!("select_one_{j}"), sel.iter().map(|&(u, _, _)| (u, 1.0)).collect(), Sense::Eq, 1.0, Family::Selector);
        let mut value_terms = vec![(lam, 1.0)];
        value_terms.extend(sel.iter().map(|&(u, val, _)| (u, -(val as f64))));
        inst.add_row(format!("select_value_{j}"), value_terms, Sense::Eq, 0.0, Family::Selector);
        let mut pen_terms = vec![(phi, 1.0)];
        pen_terms.extend(sel.iter().filter(|t| t.2 != 0.0).map(|&(u, _, c)| (u, -c)));
        inst.add_row(format!("penalty_{j}"), pen_terms, Sense::Eq, 0.0, Family::Penalty);
    }
    Ok(inst)
}

/// Objective of a PILM model: loss plus the tier cost of every coefficient.
pub fn pilm_objective(model: &ScoringSystem, dataset: &Dataset, sets: &[InterpretabilitySet], weights: ClassWeights) -> Result<f64> {
    let loss = crate::scoring::weighted_loss(model, dataset, weights)?;
    let mut pen = 0.0;
    for &v in &model.coefficients()[1..] {
        let s = sets
            .iter()
            .find(|s| s.values.contains(&v))
            .ok_or_else(|| Error::param(format!("value {v} is in no interpretability set")))?;
        pen += s.cost;
    }
    Ok(loss + pen)
}

/// Binary rule coefficients and a nonpositive intercept: predict +1 when at
/// least M rules fire.
pub fn build_mofn(dataset: &Dataset, c0: f64, gamma: f64, weights: ClassWeights) -> Result<IpInstance> {
    if !dataset.is_binary() {
        return Err(Error::param("M-of-N models need binary features"));
    }
    if !(c0 > 0.0) {
        return Err(Error::param("C0 must be positive"));
    }
    let p = dataset.p() as i64;
    let mut domains = vec![Domain::interval(-p, 0)?];
    domains.extend((0..p).map(|_| Domain::interval(0, 1).expect("valid")));
    let coefs = CoefficientSet::new(domains)?;
    let mut c0v = vec![c0; dataset.dim()];
    c0v[0] = 0.0;
    let penalties = Penalties {
        c0: c0v,
        eps: 0.0,
        weights,
        normalizer: dataset.n() as f64,
    };
    let meta = meta_for(ModelKind::MofN, gamma, Vec::new(), &penalties);
    let mut inst = IpInstance::empty(ModelKind::MofN, meta, dataset.feature_names().to_vec());
    for j in 0..dataset.dim() {
        let d = coefs.domain(j).clone();
        let kind = if j == 0 { VarKind::Integer } else { VarKind::Binary };
        let cost = if j == 0 { 0.0 } else { c0 };
        let v = inst.add_var(format!("lambda_{j}"), kind, d.lo as f64, d.hi as f64, Role::Coefficient(j), cost);
        inst.coef_vars.push(v);
        inst.domains.push(d);
    }
    add_loss_rows(&mut inst, dataset, &coefs, gamma, false)?;
    for j in 1..dataset.dim() {
        let phi = inst.add_var(format!("phi_{j}"), VarKind::Continuous, 0.0, c0, Role::Penalty(j), 0.0);
        inst.add_row(
            format!("penalty_{j}"),
            vec![(phi, 1.0), (inst.coef_vars[j], -c0)],
            Sense::Eq,
            0.0,
            Family::Penalty,
        );
    }
    Ok(inst)
}

/// "Predict +1 if at least `m` of `rules` hold."
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MofNRules {
    pub m: usize,
    pub rules: Vec<String>,
}

impl MofNRules {
    /// Score is Σ rules + λ0 > 0, so at least 1 − λ0 rules must fire.
    pub fn decode(model: &ScoringSystem) -> Result<Self> {
        let c = model.coefficients();
        if c[0] > 0 || c[1..].iter().any(|&v| v != 0 && v != 1) {
            return Err(Error::param("not an M-of-N coefficient vector"));
        }
        Ok(Self {
            m: (1 - c[0]) as usize,
            rules: (1..c.len())
                .filter(|&j| c[j] == 1)
                .map(|j| model.feature_names()[j].clone())
                .collect(),
        })
    }

    pub fn render(&self, target: Option<&str>) -> String {
        let mut out = format!(
            "PREDICT {} IF AT LEAST {} OF THE FOLLOWING {} RULES ARE SATISFIED\n",
            target.unwrap_or("Y = +1"),
            self.m,
            self.rules.len()
        );
        for (k, r) in self.rules.iter().enumerate() {
            let _ = writeln!(out, "{:>3}. {r}", k + 1);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TilmParams {
    /// Cost per feature used.
    pub c_f: f64,
    /// Cost per additional rule of a used feature.
    pub c_t: f64,
    pub eps: f64,
    pub r_max: usize,
    pub gamma: f64,
    pub cap: i64,
    pub intercept_cap: i64,
    pub weights: ClassWeights,
}

/// Threshold-rule model: penalizes features used and extra rules per feature,
/// caps rules per feature at `r_max`, and forces the rules of one feature to
/// agree in sign.
pub fn build_tilm(dataset: &Dataset, rules: &BinaryRuleSet, params: &TilmParams) -> Result<IpInstance> {
    if params.r_max < 1 {
        return Err(Error::param("R_max must be at least 1"));
    }
    let groups = rules.group_columns();
    if groups.is_empty() || groups.iter().any(Vec::is_empty) {
        return Err(Error::param("TILM needs nonempty rule groups"));
    }
    let mut covered = vec![false; dataset.dim()];
    for &j in groups.iter().flatten() {
        if j == 0 || j >= dataset.dim() || covered[j] {
            return Err(Error::param(format!("rule column {j} is invalid or grouped twice")));
        }
        covered[j] = true;
    }
    if covered[1..].iter().any(|c| !c) {
        return Err(Error::param("every rule column must belong to a group"));
    }
    let coefs = CoefficientSet::symmetric(dataset.p(), params.cap, params.intercept_cap);
    let mut c0 = vec![0.0; dataset.dim()];
    for c in c0.iter_mut().skip(1) {
        *c = params.c_t;
    }
    let penalties = Penalties {
        c0,
        eps: params.eps,
        weights: params.weights,
        normalizer: dataset.n() as f64,
    };
    let meta = meta_for(ModelKind::Tilm, params.gamma, Vec::new(), &penalties);
    let mut inst = IpInstance::empty(ModelKind::Tilm, meta, dataset.feature_names().to_vec());
    inst.groups = groups.clone();
    for j in 0..dataset.dim() {
        let d = coefs.domain(j).clone();
        let v = inst.add_var(format!("lambda_{j}"), VarKind::Integer, d.lo as f64, d.hi as f64, Role::Coefficient(j), 0.0);
        inst.coef_vars.push(v);
        inst.domains.push(d);
    }
    add_loss_rows(&mut inst, dataset, &coefs, params.gamma, false)?;
    let cap = params.cap as f64;
    for (g, cols) in groups.iter().enumerate() {
        let t_j = cols.len() as f64;
        let phi_hi = params.c_f + params.c_t * t_j + params.eps * cap * t_j;
        let phi = inst.add_var(format!("phi_{g}"), VarKind::Continuous, 0.0, phi_hi, Role::Penalty(g + 1), 0.0);
        let nu = inst.add_var(format!("nu_{g}"), VarKind::Binary, 0.0, 1.0, Role::FeatureUse(g), params.c_f);
        let tau = inst.add_var(
            format!("tau_{g}"),
            VarKind::Integer,
            0.0,
            (params.r_max - 1) as f64,
            Role::ExtraRules(g),
            params.c_t,
        );
        let delta = inst.add_var(format!("delta_{g}"), VarKind::Binary, 0.0, 1.0, Role::SignAgree(g), 0.0);
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        for &j in cols {
            let lam = inst.coef_vars[j];
            let alpha = inst.add_var(format!("alpha_{j}"), VarKind::Binary, 0.0, 1.0, Role::L0(j), 0.0);
            let beta = inst.add_var(format!("beta_{j}"), VarKind::Continuous, 0.0, cap, Role::L1(j), params.eps);
            inst.add_row(format!("l0_upper_{j}"), vec![(lam, 1.0), (alpha, -cap)], Sense::Le, 0.0, Family::L0Link);
            inst.add_row(format!("l0_lower_{j}"), vec![(lam, 1.0), (alpha, cap)], Sense::Ge, 0.0, Family::L0Link);
            inst.add_row(format!("l1_upper_{j}"), vec![(lam, 1.0), (beta, -1.0)], Sense::Le, 0.0, Family::L1Link);
            inst.add_row(format!("l1_lower_{j}"), vec![(lam, 1.0), (beta, 1.0)], Sense::Ge, 0.0, Family::L1Link);
            // −Λ(1 − δ) ≤ λ ≤ Λδ
            inst.add_row(format!("sign_upper_{j}"), vec![(lam, 1.0), (delta, -cap)], Sense::Le, 0.0, Family::Variant);
            inst.add_row(format!("sign_lower_{j}"), vec![(lam, 1.0), (delta, -cap)], Sense::Ge, -cap, Family::Variant);
            alphas.push(alpha);
            betas.push(beta);
        }
        let mut use_terms: Vec<(usize, f64)> = alphas.iter().map(|&a| (a, 1.0)).collect();
        use_terms.push((nu, -t_j));
        inst.add_row(format!("feature_use_{g}"), use_terms, Sense::Le, 0.0, Family::Variant);
        let mut extra: Vec<(usize, f64)> = alphas.iter().map(|&a| (a, 1.0)).collect();
        extra.push((tau, -1.0));
        inst.add_row(format!("extra_rules_{g}"), extra, Sense::Le, 1.0, Family::Variant);
        inst.add_row(
            format!("max_rules_{g}"),
            alphas.iter().map(|&a| (a, 1.0)).collect(),
            Sense::Le,
            params.r_max as f64,
            Family::Variant,
        );
        let mut pen = vec![(phi, 1.0), (nu, -params.c_f), (tau, -params.c_t)];
        pen.extend(betas.iter().map(|&b| (b, -params.eps)));
        inst.add_row(format!("penalty_{g}"), pen, Sense::Eq, 0.0, Family::Penalty);
    }
    Ok(inst)
}

/// Row counts per family, for diagnostics.
pub fn family_counts(instance: &IpInstance) -> BTreeMap<Family, usize> {
    let mut out = BTreeMap::new();
    for c in &instance.constraints {
        *out.entry(c.family.clone()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::objective;

    fn tiny() -> Dataset {
        Dataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![1, -1, 1],
        )
        .unwrap()
    }

    #[test]
    fn big_m_matches_enumeration() {
        let d = Dataset::new(vec!["a".into(), "b".into()], vec![vec![1.0, 0.0]], vec![1]).unwrap();
        let cs = CoefficientSet::symmetric(2, 2, 2);
        let m = big_m_loss(&d, &cs, 0.1).unwrap();
        let mut best = f64::NEG_INFINITY;
        for l0 in -2..=2 {
            for l1 in -2..=2 {
                for l2 in -2..=2 {
                    let s = f64::from(l0) + f64::from(l1);
                    let _ = l2;
                    best = best.max(0.1 - s);
                }
            }
        }
        assert!((m[0] - best).abs() < 1e-12);
        assert!((m[0] - 4.1).abs() < 1e-12);

        let d = Dataset::new(vec!["a".into(), "b".into()], vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![1, -1]).unwrap();
        let cs = CoefficientSet::symmetric(2, 10, 100);
        let m = big_m_loss(&d, &cs, 0.1).unwrap();
        assert!((m[0] - 100.1).abs() < 1e-12);
        assert_eq!(m[0], m[1]);
    }

    #[test]
    fn epsilon_examples() {
        let cs = CoefficientSet::symmetric(5, 10, 100);
        assert!((default_epsilon(0.01, 100, &cs) - 1e-4).abs() < 1e-18);
        let cs1 = CoefficientSet::symmetric(1, 1, 100);
        assert_eq!(default_epsilon(1.0, 2, &cs1), 0.25);
        assert_eq!(default_epsilon(0.9, 2, &cs1), 0.25);
    }

    #[test]
    fn missing_penalty_examples() {
        assert_eq!(missing_data_penalty(0.01, 0, 200.0), 0.01);
        assert!(missing_data_penalty(0.01, 200, 200.0) >= 1.0);
        assert!((missing_data_penalty(0.01, 50, 200.0) - 0.26).abs() < 1e-15);
    }

    #[test]
    fn gamma_defaults() {
        assert_eq!(default_gamma(&tiny()), 0.1);
        let real = Dataset::new(vec!["a".into()], vec![vec![0.5]], vec![1]).unwrap();
        assert_eq!(default_gamma(&real), 0.1);
        assert_eq!(SlimParams::new(&real, 0.1, 1, 1).with_gamma(0.5).gamma, 0.5);
    }

    #[test]
    fn slim_counts() {
        let d = tiny();
        let inst = build_slim(&d, &SlimParams::new(&d, 0.1, 3, 3), &[]).unwrap();
        let roles = |f: fn(&Role) -> bool| inst.variables.iter().filter(|v| f(&v.role)).count();
        assert_eq!(roles(|r| matches!(r, Role::Loss(_))), 3);
        assert_eq!(roles(|r| matches!(r, Role::Penalty(_))), 2);
        assert_eq!(roles(|r| matches!(r, Role::L0(_))), 2);
        assert_eq!(roles(|r| matches!(r, Role::L1(_))), 2);
        assert_eq!(inst.constraints.len(), 3 + 2 + 4 + 4);
        let fc = family_counts(&inst);
        assert_eq!(fc[&Family::Loss], 3);
        assert_eq!(fc[&Family::Penalty], 2);
        assert_eq!(fc[&Family::L0Link], 4);
        assert_eq!(fc[&Family::L1Link], 4);
    }

    #[test]
    fn objective_coefficients_follow_weights() {
        let d = tiny();
        let w = ClassWeights { w_pos: 0.3, w_neg: 0.7 };
        let p = SlimParams::new(&d, 0.05, 3, 3).with_weights(w);
        let inst = build_slim(&d, &p, &[]).unwrap();
        for (i, &v) in inst.loss_vars.iter().enumerate() {
            assert!((inst.objective[v] - w.weight(d.label(i)) / 3.0).abs() < 1e-15);
        }
        assert_eq!(inst.objective[inst.alpha_var(1).unwrap()], 0.05);
    }

    fn sleep_names() -> Dataset {
        Dataset::new(
            vec!["hypertension".into(), "heart_attack".into(), "stroke".into(), "age".into(), "bmi".into(), "female".into()],
            vec![vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0], vec![0.0; 6]],
            vec![1, -1],
        )
        .unwrap()
    }

    #[test]
    fn operational_rows() {
        let d = sleep_names();
        let p = SlimParams::new(&d, 0.05, 3, 3);
        let inst = build_slim(&d, &p, &[ConstraintSpec::MaxModelSize { theta: 5 }]).unwrap();
        let row = inst.constraints.last().unwrap();
        assert_eq!((row.sense, row.rhs, row.terms.len()), (Sense::Le, 5.0, 6));

        let spec = ConstraintSpec::IfThen {
            antecedents: vec!["heart_attack".into(), "hypertension".into()],
            consequent: "stroke".into(),
        };
        let inst = build_slim(&d, &p, &[spec]).unwrap();
        let row = inst.constraints.last().unwrap();
        let a = |j| inst.alpha_var(j).unwrap();
        let mut terms = row.terms.clone();
        terms.sort_by_key(|t| t.0);
        let mut expected = vec![(a(2), 1.0), (a(1), 1.0), (a(3), -2.0)];
        expected.sort_by_key(|t| t.0);
        assert_eq!(terms, expected);
        assert_eq!(row.rhs, 0.0);
    }

    #[test]
    fn sign_conflict_detected() {
        let d = tiny();
        let mut p = SlimParams::new(&d, 0.05, 3, 3);
        p.coefficients.set_domain(1, Domain::interval(-3, 0).unwrap()).unwrap();
        let spec = ConstraintSpec::Sign {
            feature: 1.into(),
            sign: SignReq::Positive,
        };
        assert!(matches!(build_slim(&d, &p, &[spec]), Err(Error::Infeasible(_))));
        assert!(build_slim(&d, &p, &[ConstraintSpec::MaxModelSize { theta: 3 }]).is_err());
    }

    #[test]
    fn max_fpr_rhs() {
        let mk = |n_neg: usize| {
            let mut rows = vec![vec![1.0]];
            let mut y = vec![1];
            for _ in 0..n_neg {
                rows.push(vec![0.0]);
                y.push(-1);
            }
            Dataset::new(vec!["a".into()], rows, y).unwrap()
        };
        let d = mk(100);
        let inst = build_slim(&d, &SlimParams::new(&d, 0.01, 1, 1), &[]).unwrap();
        let inst = add_max_fpr(inst, 0.2, &d).unwrap();
        assert_eq!(inst.constraints.last().unwrap().rhs, 20.0);
        let d = mk(2);
        let inst = build_slim(&d, &SlimParams::new(&d, 0.01, 1, 1), &[]).unwrap();
        assert_eq!(add_max_fpr(inst.clone(), 0.999, &d).unwrap().constraints.last().unwrap().rhs, 1.0);
        assert_eq!(add_max_fpr(inst, 0.3, &d).unwrap().constraints.last().unwrap().rhs, 0.0);
        let pos_only = Dataset::new(vec!["a".into()], vec![vec![1.0]], vec![1]).unwrap();
        let inst = build_slim(&pos_only, &SlimParams::new(&pos_only, 0.01, 1, 1), &[]).unwrap();
        assert!(add_max_fpr(inst, 0.2, &pos_only).is_err());
    }

    #[test]
    fn complete_is_feasible_and_matches_objective() {
        let d = tiny();
        let p = SlimParams::new(&d, 0.05, 3, 3);
        let inst = build_slim(&d, &p, &[]).unwrap();
        for coefs in [vec![0, 0, 0], vec![-1, 2, -3], vec![3, 3, 3], vec![1, 0, -2]] {
            let x = inst.complete(&coefs);
            assert!(inst.is_feasible(&x, 1e-9), "{coefs:?}");
            let m = ScoringSystem::for_dataset(&d, coefs).unwrap();
            let want = objective(&m, &d, 0.05, p.epsilon(3)).unwrap();
            assert!((inst.objective_value(&x) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn merged_duplicates_keep_objective() {
        let d = Dataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1, 1, -1, -1, -1],
        )
        .unwrap();
        let p = SlimParams::new(&d, 0.05, 3, 3);
        let spec = [ConstraintSpec::MaxFpr { gamma: 0.5 }];
        let plain = build_slim(&d, &p, &spec).unwrap();
        let merged = build_slim(&d, &p.clone().with_merged_duplicates(true), &spec).unwrap();
        assert_eq!(plain.loss_rows.len(), 5);
        assert_eq!(merged.loss_rows.len(), 3);
        assert_eq!(merged.loss_groups, vec![vec![0, 1], vec![2, 4], vec![3]]);
        for coefs in [vec![0, 0, 0], vec![-1, 2, -3], vec![1, 1, -1], vec![0, 1, -2]] {
            let (a, b) = (plain.complete(&coefs), merged.complete(&coefs));
            assert!((plain.objective_value(&a) - merged.objective_value(&b)).abs() < 1e-12);
            assert_eq!(plain.is_feasible(&a, 1e-9), merged.is_feasible(&b, 1e-9), "{coefs:?}");
        }
    }

    #[test]
    fn pilm_selector_counts() {
        let d = tiny();
        let sets = vec![
            InterpretabilitySet::new(vec![0], 0.0),
            InterpretabilitySet::symmetric_range(1, 10, 0.01),
            InterpretabilitySet::symmetric_range(11, 100, 0.05),
        ];
        let inst = build_pilm(&d, &sets, 0.1, ClassWeights::UNIT, Domain::symmetric(100)).unwrap();
        let per = |j: usize| {
            inst.variables
                .iter()
                .filter(|v| matches!(v.role, Role::Selector { coef, .. } if coef == j))
                .count()
        };
        assert_eq!(per(1), 1 + 20 + 180);
        assert_eq!(per(2), 201);
        let bad = vec![InterpretabilitySet::new(vec![0, 1], 0.0), InterpretabilitySet::new(vec![1], 0.1)];
        assert!(build_pilm(&d, &bad, 0.1, ClassWeights::UNIT, Domain::symmetric(1)).is_err());
        let nonmono = vec![InterpretabilitySet::new(vec![0], 0.1), InterpretabilitySet::new(vec![1], 0.1)];
        assert!(build_pilm(&d, &nonmono, 0.1, ClassWeights::UNIT, Domain::symmetric(1)).is_err());
        let coefs = [0, 12, -3];
        let x = inst.complete(&coefs);
        assert!(inst.is_feasible(&x, 1e-9));
        let m = ScoringSystem::for_dataset(&d, coefs.to_vec()).unwrap();
        let want = pilm_objective(&m, &d, &sets, ClassWeights::UNIT).unwrap();
        assert!((inst.objective_value(&x) - want).abs() < 1e-12);
    }

    #[test]
    fn mofn_decode() {
        let d = tiny();
        let inst = build_mofn(&d, 0.01, 0.1, ClassWeights::UNIT).unwrap();
        assert_eq!(inst.domains[0], Domain::interval(-2, 0).unwrap());
        let zero = ScoringSystem::for_dataset(&d, vec![0, 0, 0]).unwrap();
        assert_eq!(MofNRules::decode(&zero).unwrap(), MofNRules { m: 1, rules: vec![] });
        let m = ScoringSystem::for_dataset(&d, vec![-1, 1, 1]).unwrap();
        let r = MofNRules::decode(&m).unwrap();
        assert_eq!((r.m, r.rules.len()), (2, 2));
        assert!(r.render(None).contains("AT LEAST 2 OF THE FOLLOWING 2 RULES"));
        let real = Dataset::new(vec!["a".into()], vec![vec![2.0]], vec![1]).unwrap();
        assert!(build_mofn(&real, 0.01, 0.1, ClassWeights::UNIT).is_err());
    }

    fn tilm_fixture() -> (Dataset, BinaryRuleSet, IpInstance) {
        let raw = Dataset::new(
            vec!["v".into()],
            vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![-1, 1, -1, 1],
        )
        .unwrap();
        let spec = BTreeMap::from([("v".to_string(), crate::data::Directive::Midpoints)]);
        let (d, rules) = crate::data::binarize(&raw, &spec).unwrap();
        let params = TilmParams {
            c_f: 0.1,
            c_t: 0.05,
            eps: 1e-4,
            r_max: 3,
            gamma: 0.1,
            cap: 5,
            intercept_cap: 5,
            weights: ClassWeights::UNIT,
        };
        let inst = build_tilm(&d, &rules, &params).unwrap();
        (d, rules, inst)
    }

    #[test]
    fn tilm_counts_feature_and_rules() {
        let (_, _, inst) = tilm_fixture();
        let get = |x: &[f64], role: Role| x[inst.variables.iter().position(|v| v.role == role).unwrap()];
        let x = inst.complete(&[0, 2, 1, 0]);
        assert!(inst.is_feasible(&x, 1e-9));
        assert_eq!(get(&x, Role::FeatureUse(0)), 1.0);
        assert_eq!(get(&x, Role::ExtraRules(0)), 1.0);
        let x = inst.complete(&[0, 0, 0, 0]);
        assert!(inst.is_feasible(&x, 1e-9));
        assert_eq!(get(&x, Role::FeatureUse(0)), 0.0);
        assert_eq!(get(&x, Role::ExtraRules(0)), 0.0);
        let x = inst.complete(&[0, 2, -1, 0]);
        assert!(!inst.is_feasible(&x, 1e-9));
    }

    #[test]
    fn lp_export_mentions_rows() {
        let d = tiny();
        let inst = build_slim(&d, &SlimParams::new(&d, 0.05, 2, 2), &[]).unwrap();
        let lp = inst.to_lp_format();
        assert!(lp.starts_with("\\ SLIM instance\nMinimize"));
        assert_eq!(lp.matches("\n c").count(), inst.constraints.len());
        assert!(lp.contains("General"));
    }
}
