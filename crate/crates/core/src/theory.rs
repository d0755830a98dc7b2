//! Resolution bounds, rounding, generalization bounds and lattice counts.
//!
//! Logarithms are natural. Counts are arbitrary precision.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Margins of a real-valued baseline classifier on a set of examples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginProfile {
    rho: Vec<f64>,
    margins: Vec<f64>,
    magnitudes: Vec<f64>,
    /// Example indices by increasing margin (ties by index).
    order: Vec<usize>,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl MarginProfile {
    pub fn new<R: AsRef<[f64]>>(rho: &[f64], rows: &[R]) -> Result<Self> {
        let norm = l2(rho);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::param("baseline coefficients must be finite and nonzero"));
        }
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut margins = Vec::with_capacity(rows.len());
        let mut magnitudes = Vec::with_capacity(rows.len());
        for r in rows {
            let x = r.as_ref();
            if x.len() != rho.len() {
                return Err(Error::Dimension {
                    expected: rho.len(),
                    got: x.len(),
                });
            }
            let dot: f64 = rho.iter().zip(x).map(|(a, b)| a * b).sum();
            margins.push(dot.abs() / norm);
            magnitudes.push(l2(x));
        }
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| margins[a].total_cmp(&margins[b]).then(a.cmp(&b)));
        Ok(Self {
            rho: rho.to_vec(),
            margins,
            magnitudes,
            order,
        })
    }

    /// Profile on a dataset. With `include_intercept`, `rho` has one entry per
    /// column including the intercept; otherwise the intercept column is dropped.
    pub fn from_dataset(dataset: &Dataset, rho: &[f64], include_intercept: bool) -> Result<Self> {
        let skip = usize::from(!include_intercept);
        let rows: Vec<&[f64]> = (0..dataset.n()).map(|i| &dataset.row(i)[skip..]).collect();
        Self::new(rho, &rows)
    }

    pub fn dim(&self) -> usize {
        self.rho.len()
    }

    pub fn len(&self) -> usize {
        self.margins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.margins.is_empty()
    }

    pub fn margins(&self) -> &[f64] {
        &self.margins
    }

    pub fn gamma_min(&self) -> f64 {
        self.margins[self.order[0]]
    }

    pub fn x_max(&self) -> f64 {
        self.magnitudes.iter().cloned().fold(0.0, f64::max)
    }

    /// k-th smallest margin (1-based).
    pub fn gamma_k(&self, k: usize) -> Option<f64> {
        (1..=self.len()).contains(&k).then(|| self.margins[self.order[k - 1]])
    }

    /// Largest magnitude after excluding the k−1 smallest-margin examples.
    pub fn x_k(&self, k: usize) -> Option<f64> {
        (1..=self.len())
            .contains(&k)
            .then(|| self.order[k - 1..].iter().map(|&i| self.magnitudes[i]).fold(0.0, f64::max))
    }

    /// Indices of the k−1 smallest-margin examples.
    pub fn excluded(&self, k: usize) -> &[usize] {
        &self.order[..k.saturating_sub(1).min(self.len())]
    }
}

/// `X_max·√P / (2·γ_min)`; any integer cap strictly above it preserves the
/// baseline's training error after rounding.
pub fn min_resolution(profile: &MarginProfile) -> Result<f64> {
    min_resolution_k(profile, 1)
}

/// The k-th margin variant: rounding may cost at most k−1 extra errors.
pub fn min_resolution_k(profile: &MarginProfile, k: usize) -> Result<f64> {
    let (Some(gamma), Some(x)) = (profile.gamma_k(k), profile.x_k(k)) else {
        return Err(Error::param(format!("k must be in 1..={}, got {k}", profile.len())));
    };
    if gamma <= 0.0 {
        return Err(Error::DegenerateMargin(format!(
            "{} example(s) lie on the baseline hyperplane",
            profile.margins.iter().filter(|&&m| m == 0.0).count()
        )));
    }
    Ok(x * (profile.dim() as f64).sqrt() / (2.0 * gamma))
}

/// Smallest integer strictly greater than `bound`.
pub fn smallest_cap_above(bound: f64) -> i64 {
    bound.floor() as i64 + 1
}

/// Nearest integer, halves toward zero.
fn round_half_toward_zero(v: f64) -> i64 {
    let r = v.abs();
    let f = r.floor();
    let mag = if r - f > 0.5 { f + 1.0 } else { f };
    (mag as i64) * if v < 0.0 { -1 } else { 1 }
}

/// `λ_j = round(Λ·ρ_j/‖ρ‖₂)`, so `|λ_j| ≤ Λ`.
pub fn round_at_resolution(rho: &[f64], lambda_cap: i64) -> Result<Vec<i64>> {
    let norm = l2(rho);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::param("cannot round a zero or non-finite direction"));
    }
    if lambda_cap < 1 {
        return Err(Error::param(format!("resolution must be at least 1, got {lambda_cap}")));
    }
    let cap = lambda_cap as f64;
    Ok(rho.iter().map(|&r| round_half_toward_zero(cap * r / norm)).collect())
}

/// Natural log of a big integer.
pub fn ln_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 64 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (v >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `√((ln|H| − ln δ) / 2N)`.
pub fn occam_bound(hypothesis_count: &BigUint, delta: f64, n: usize) -> Result<f64> {
    if hypothesis_count.is_zero() {
        return Err(Error::param("hypothesis count must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta must lie in (0, 1), got {delta}")));
    }
    if n == 0 {
        return Err(Error::param("sample size must be positive"));
    }
    Ok(((ln_big(hypothesis_count) - delta.ln()) / (2.0 * n as f64)).sqrt())
}

/// `(2Λ+1)^P`.
pub fn full_count(p: usize, lambda_cap: u64) -> BigUint {
    BigUint::from(2 * lambda_cap + 1).pow(p as u32)
}

/// Largest model size an optimal model can have at sparsity cost `c0`.
pub fn max_support(c0: f64) -> Result<u64> {
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::param(format!("C0 must be positive, got {c0}")));
    }
    Ok((1.0 / c0 + 1e-9).floor() as u64)
}

/// `Σ_{k ≤ min(P, ⌊1/C0⌋)} C(P,k)·(2Λ)^k`: coefficient vectors in
/// `{−Λ..Λ}^P` with at most `⌊1/C0⌋` nonzeros. The intercept is excluded.
pub fn sparse_hypothesis_count(p: usize, lambda_cap: u64, c0: f64) -> Result<BigUint> {
    let k_max = (max_support(c0)? as usize).min(p);
    let two_lambda = BigUint::from(2 * lambda_cap);
    Ok((0..=k_max)
        .map(|k| binomial(BigUint::from(p), BigUint::from(k)) * two_lambda.pow(k as u32))
        .sum())
}

/// [`sparse_hypothesis_count`] times the number of intercept values.
pub fn sparse_hypothesis_count_with_intercept(p: usize, lambda_cap: u64, c0: f64, intercept_values: u64) -> Result<BigUint> {
    Ok(sparse_hypothesis_count(p, lambda_cap, c0)? * BigUint::from(intercept_values))
}

fn mobius_table(n: u64) -> Vec<i8> {
    let n = n as usize;
    let mut mu = vec![1i8; n + 1];
    let mut composite = vec![false; n + 1];
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        for j in (i..=n).step_by(i) {
            composite[j] |= j > i;
            mu[j] = -mu[j];
        }
        if let Some(sq) = i.checked_mul(i) {
            for j in (sq..=n).step_by(sq) {
                mu[j] = 0;
            }
        }
    }
    mu
}

/// Vectors in `{−Λ..Λ}^P` whose entries have gcd 1.
pub fn coprime_count(p: usize, lambda_cap: u64) -> BigUint {
    if p == 0 || lambda_cap == 0 {
        return BigUint::zero();
    }
    let mu = mobius_table(lambda_cap);
    let mut total = BigInt::zero();
    for d in 1..=lambda_cap {
        let m = mu[d as usize];
        if m == 0 {
            continue;
        }
        let nonzero_multiples = BigInt::from(2 * (lambda_cap / d) + 1).pow(p as u32) - BigInt::one();
        if m > 0 {
            total += nonzero_multiples;
        } else {
            total -= nonzero_multiples;
        }
    }
    debug_assert!(!total.is_negative());
    total.to_biguint().unwrap_or_default()
}

/// Fraction of `{−Λ..Λ}^P` that is coprime.
pub fn coprime_density(p: usize, lambda_cap: u64) -> f64 {
    let num = coprime_count(p, lambda_cap);
    let den = full_count(p, lambda_cap);
    (ln_big(&num) - ln_big(&den)).exp()
}

fn prime_factors(mut q: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= q {
        let mut a = 0;
        while q % f == 0 {
            q /= f;
            a += 1;
        }
        if a > 0 {
            out.push((f, a));
        }
        f += 1;
    }
    if q > 1 {
        out.push((q, 1));
    }
    out
}

/// Jordan's totient `J_P(q)`: tuples in `{0..q−1}^P` coprime with `q` jointly.
pub fn jordan_totient(p: usize, q: u64) -> BigUint {
    prime_factors(q)
        .into_iter()
        .map(|(f, a)| {
            let fp = BigUint::from(f).pow(p as u32);
            let lower = fp.pow(a - 1);
            &lower * &fp - lower
        })
        .product()
}

/// Farey points of level Λ in `[0,1)^P`: distinct `λ/q` with `1 ≤ q ≤ Λ`.
pub fn farey_count(p: usize, level: u64) -> BigUint {
    (1..=level).map(|q| jordan_totient(p, q)).sum()
}
