//! Data reduction with the LP relaxation as surrogate.
//!
//! An example is removed when every LP solution within `epsilon` of the LP
//! optimum assigns it the same sign as the LP optimum does. Removal is
//! decided by solving one extra LP per example with a constraint forcing the
//! opposite sign.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::formulate::{IpInstance, Sense};
use crate::milp::lp::{LpProblem, LpRow, LpStatus, Simplex};
use crate::scoring::ScoringSystem;

/// Scores with magnitude at most this are ties and never fix a sign.
pub const SIGN_TOL: f64 = 1e-9;
/// Slack on the removal test `variant > optimum + epsilon`.
pub const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Kept,
    Removed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleVerdict {
    pub index: usize,
    /// Sign of the LP optimum's score; ties map to −1.
    pub baseline_sign: i8,
    pub baseline_score: f64,
    /// Optimal value of the sign-flipped LP; `None` when it was infeasible or failed.
    pub variant_objective: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    #[serde(with = "infinite_as_null")]
    pub epsilon: f64,
    pub surrogate_optimum: f64,
    pub n: usize,
    pub m: usize,
    pub removed_fraction: f64,
    pub examples: Vec<ExampleVerdict>,
}

impl ReductionReport {
    pub fn kept_indices(&self) -> Vec<usize> {
        self.examples.iter().filter(|e| e.verdict == Verdict::Kept).map(|e| e.index).collect()
    }

    pub fn removed_indices(&self) -> Vec<usize> {
        self.examples.iter().filter(|e| e.verdict == Verdict::Removed).map(|e| e.index).collect()
    }

    /// Removed examples whose fixed sign disagrees with their label: the
    /// constant number of errors every level-set model makes on them.
    pub fn fixed_errors(&self, dataset: &Dataset) -> usize {
        self.examples
            .iter()
            .filter(|e| e.verdict == Verdict::Removed && e.baseline_sign != dataset.label(e.index))
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Everything the reduction needs that does not depend on `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateAnalysis {
    pub surrogate_optimum: f64,
    pub baseline_scores: Vec<f64>,
    pub variant_objectives: Vec<Option<f64>>,
}

impl SurrogateAnalysis {
    pub fn n(&self) -> usize {
        self.baseline_scores.len()
    }

    pub fn report(&self, epsilon: f64) -> Result<ReductionReport> {
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::param(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        let threshold = self.surrogate_optimum + epsilon + LEVEL_TOL;
        let examples: Vec<ExampleVerdict> = self
            .baseline_scores
            .iter()
            .zip(&self.variant_objectives)
            .enumerate()
            .map(|(index, (&score, &variant))| {
                let removable = score.abs() > SIGN_TOL;
                let verdict = match variant {
                    Some(v) if removable && v > threshold => Verdict::Removed,
                    _ => Verdict::Kept,
                };
                ExampleVerdict {
                    index,
                    baseline_sign: baseline_sign(score),
                    baseline_score: score,
                    variant_objective: variant,
                    verdict,
                }
            })
            .collect();
        let n = examples.len();
        let m = examples.iter().filter(|e| e.verdict == Verdict::Kept).count();
        Ok(ReductionReport {
            epsilon,
            surrogate_optimum: self.surrogate_optimum,
            n,
            m,
            removed_fraction: if n == 0 { 0.0 } else { (n - m) as f64 / n as f64 },
            examples,
        })
    }
}

fn baseline_sign(score: f64) -> i8 {
    if score > SIGN_TOL {
        1
    } else {
        -1
    }
}

fn score_terms(instance: &IpInstance, dataset: &Dataset, i: usize) -> Vec<(usize, f64)> {
    instance
        .coef_vars
        .iter()
        .zip(dataset.row(i))
        .filter(|(_, &v)| v != 0.0)
        .map(|(&var, &v)| (var, v))
        .collect()
}

/// Row forcing example `i` to the side opposite `baseline_sign`.
///
/// A positive baseline is flipped by `score ≤ 0`, which is exactly a −1
/// prediction under the tie rule. A negative baseline is flipped by
/// `score ≥ γ`, the margin the loss rows use to certify a +1 prediction.
pub fn flip_constraint(instance: &IpInstance, dataset: &Dataset, i: usize, baseline_sign: i8) -> LpRow {
    let terms = score_terms(instance, dataset, i);
    if baseline_sign > 0 {
        LpRow { terms, sense: Sense::Le, rhs: 0.0 }
    } else {
        LpRow {
            terms,
            sense: Sense::Ge,
            rhs: instance.meta.gamma,
        }
    }
}

/// Solves the surrogate and all `N` sign-flipped variants.
pub fn analyze(dataset: &Dataset, instance: &IpInstance) -> Result<SurrogateAnalysis> {
    if instance.coef_vars.len() != dataset.dim() {
        return Err(Error::Dimension {
            expected: instance.coef_vars.len(),
            got: dataset.dim(),
        });
    }
    let mut root = Simplex::new(&LpProblem::relaxation(instance));
    match root.solve() {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible("LP relaxation of the surrogate is infeasible".into())),
        other => return Err(Error::Lp(format!("surrogate LP ended with status {other:?}"))),
    }
    let optimum = root.objective();
    let x = root.values().to_vec();
    let baseline_scores: Vec<f64> = (0..dataset.n())
        .map(|i| score_terms(instance, dataset, i).iter().map(|&(j, v)| v * x[j]).sum())
        .collect();
    let variant_objectives = baseline_scores
        .iter()
        .enumerate()
        .map(|(i, &score)| {
            if score.abs() <= SIGN_TOL {
                return None;
            }
            let row = flip_constraint(instance, dataset, i, baseline_sign(score));
            let mut lp = root.clone();
            lp.add_row(&row.terms, row.sense, row.rhs);
            match lp.solve() {
                LpStatus::Optimal => Some(lp.objective()),
                status => {
                    debug!("variant LP for example {i} ended with {status:?}; keeping it");
                    None
                }
            }
        })
        .collect();
    Ok(SurrogateAnalysis {
        surrogate_optimum: optimum,
        baseline_scores,
        variant_objectives,
    })
}

/// Reduces `dataset` at level-set width `epsilon`. Kept examples retain their
/// order and labels.
pub fn reduce(dataset: &Dataset, instance: &IpInstance, epsilon: f64) -> Result<(Dataset, ReductionReport)> {
    let report = analyze(dataset, instance)?.report(epsilon)?;
    Ok((dataset.subset(&report.kept_indices()), report))
}

/// Level-set widths: `(epsilon for the given model, epsilon of the zero model)`.
/// Either is clamped at 0.
pub fn epsilon_bounds(instance: &IpInstance, surrogate_optimum: f64, model: Option<&ScoringSystem>) -> Result<(Option<f64>, f64)> {
    let width = |coefficients: &[i64]| -> f64 {
        let z = instance.objective_value(&instance.complete(coefficients));
        let eps = z - surrogate_optimum;
        if eps < -1e-7 {
            warn!("model objective {z} is below the surrogate optimum {surrogate_optimum}");
        }
        eps.max(0.0)
    };
    let zeros = vec![0i64; instance.coef_vars.len()];
    let eps_max = width(&zeros);
    let eps_model = match model {
        Some(m) => {
            if m.dim() != zeros.len() {
                return Err(Error::Dimension {
                    expected: zeros.len(),
                    got: m.dim(),
                });
            }
            Some(width(m.coefficients()))
        }
        None => None,
    };
    Ok((eps_model, eps_max))
}

/// Geometric grid of `points` widths from `lo` to `hi` (linear if `lo` is 0).
pub fn epsilon_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![hi],
        _ if lo > 0.0 && hi > lo => {
            let r = (hi / lo).powf(1.0 / (points - 1) as f64);
            (0..points).map(|k| if k + 1 == points { hi } else { lo * r.powi(k as i32) }).collect()
        }
        _ => (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect(),
    }
}
