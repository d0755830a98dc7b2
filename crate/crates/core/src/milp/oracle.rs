//! Brute-force minimization over every coefficient vector, for verification.
//!
//! The oracle never looks at an [`IpInstance`](crate::formulate::IpInstance):
//! it scores each candidate model on the data and checks the operational
//! constraints by their definitions.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::formulate::{effective_objective, floor_count, ConstraintSpec, Resolved, SlimParams};
use crate::scoring::{count_errors, CoefficientSet, Domain, ObjectiveParts, Penalties};

pub const DEFAULT_BUDGET: u128 = 10_000_000;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub objective: f64,
    pub parts: ObjectiveParts,
    /// Every minimizer, in enumeration order.
    pub argmin: Vec<Vec<i64>>,
    pub evaluated: u128,
}

/// Calls `f` on every point of the product of `domains` (odometer order, last
/// coordinate fastest) and collects the minimizers of the returned value.
/// `None` marks an infeasible point.
pub fn enumerate_min<F>(domains: &[Domain], budget: u128, mut f: F) -> Result<Option<(f64, Vec<Vec<i64>>, u128)>>
where
    F: FnMut(&[i64]) -> Option<f64>,
{
    let lists: Vec<Vec<i64>> = domains.iter().map(Domain::values).collect();
    let count = lists.iter().fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128));
    if count > budget {
        return Err(Error::SearchSpaceTooLarge { count, budget });
    }
    let mut idx = vec![0usize; lists.len()];
    let mut point: Vec<i64> = lists.iter().map(|l| l[0]).collect();
    let mut best = f64::INFINITY;
    let mut argmin: Vec<Vec<i64>> = Vec::new();
    let mut evaluated = 0u128;
    loop {
        evaluated += 1;
        if let Some(v) = f(&point) {
            if v < best - TIE_TOL {
                best = v;
                argmin.clear();
                argmin.push(point.clone());
            } else if v <= best + TIE_TOL {
                argmin.push(point.clone());
            }
        }
        let mut k = lists.len();
        loop {
            if k == 0 {
                return Ok(if argmin.is_empty() { None } else { Some((best, argmin, evaluated)) });
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                point[k] = lists[k][idx[k]];
                break;
            }
            idx[k] = 0;
            point[k] = lists[k][0];
        }
    }
}

/// True when `coefficients` satisfies every operational constraint.
pub fn satisfies(coefficients: &[i64], dataset: &Dataset, rows: &[Resolved]) -> bool {
    let nz = |j: usize| coefficients[j] != 0;
    let counts = || count_errors(coefficients, dataset);
    rows.iter().all(|r| match r {
        Resolved::MaxFpr(g) => counts().errors_neg <= floor_count(*g, dataset.n_neg()),
        Resolved::MinTpr(t) => counts().errors_pos <= floor_count(1.0 - t, dataset.n_pos()),
        Resolved::MaxModelSize(theta) => (1..coefficients.len()).filter(|&j| nz(j)).count() <= *theta,
        Resolved::Sign(j, s) => match s {
            crate::formulate::SignReq::Positive => coefficients[*j] >= 0,
            crate::formulate::SignReq::Negative => coefficients[*j] <= 0,
        },
        Resolved::IfThen(ants, cons) => ants.iter().all(|&a| !nz(a)) || nz(*cons),
        Resolved::Hierarchy(leaf, nodes) => !nz(*leaf) || nodes.iter().all(|&n| nz(n)),
        Resolved::PinZero(j) => !nz(*j),
        Resolved::PerFeaturePenalty(..) => true,
    })
}

/// Minimizes `penalties` over `coefficients` subject to `rows`.
pub fn minimize(
    dataset: &Dataset,
    coefficients: &CoefficientSet,
    penalties: &Penalties,
    rows: &[Resolved],
    budget: u128,
) -> Result<Option<OracleResult>> {
    let found = enumerate_min(coefficients.domains(), budget, |c| {
        satisfies(c, dataset, rows).then(|| penalties.evaluate(c, dataset).total())
    })?;
    Ok(found.map(|(objective, argmin, evaluated)| OracleResult {
        objective,
        parts: penalties.evaluate(&argmin[0], dataset),
        argmin,
        evaluated,
    }))
}

/// Minimizes the SLIM objective by enumeration. `Ok(None)` means no point of
/// the coefficient set satisfies the constraints.
pub fn exhaustive_oracle(dataset: &Dataset, params: &SlimParams, constraints: &[ConstraintSpec]) -> Result<Option<OracleResult>> {
    exhaustive_oracle_with_budget(dataset, params, constraints, DEFAULT_BUDGET)
}

pub fn exhaustive_oracle_with_budget(
    dataset: &Dataset,
    params: &SlimParams,
    constraints: &[ConstraintSpec],
    budget: u128,
) -> Result<Option<OracleResult>> {
    let eff = effective_objective(dataset, params, constraints)?;
    minimize(dataset, &eff.coefficients, &eff.penalties, &eff.rows, budget)
}
