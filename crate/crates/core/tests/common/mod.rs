//! Shared generators, independent brute-force oracles and invariant checks.
//!
//! Nothing here calls the library's own oracle when computing a reference
//! value: minima are enumerated directly from the data rows.

#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::test_runner::{Config, RngSeed};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use supersparse::data::{binarize, class_weights, read_csv, BinarizationSpec, ClassWeights, Dataset, Directive, WeightMode};
use supersparse::experiment::{evaluate, train, OutputDir, RunConfig};
use supersparse::formulate::{big_m_loss, build_slim, ConstraintSpec, SlimParams};
use supersparse::milp::{branch_and_bound, exhaustive_oracle, LpProblem, SolveOptions, SolveStatus};
use supersparse::reduce::{analyze, epsilon_bounds, flip_constraint, reduce};
use supersparse::scoring::{norms, objective, render_table, score, zero_one_loss, CoefficientSet, ScoringSystem};
use supersparse::theory::{
    coprime_count, farey_count, full_count, min_resolution_k, occam_bound, round_at_resolution, smallest_cap_above,
    sparse_hypothesis_count, MarginProfile,
};
use supersparse::Error;

pub type Check = Result<(), String>;

pub fn proptest_config(cases: u32, seed: u64) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn lib<T>(r: supersparse::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

/// Integer features in `lo..=hi`, random labels with both classes present.
pub fn integer_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize, lo: i64, hi: i64) -> Dataset {
    let rows = (0..n).map(|_| (0..p).map(|_| rng.gen_range(lo..=hi) as f64).collect()).collect();
    let mut labels: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    if n >= 2 {
        labels[0] = 1;
        labels[1] = -1;
    }
    Dataset::new(names(p), rows, labels).expect("valid dataset")
}

/// Real features, labels from a noisy random hyperplane.
pub fn real_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    let w: Vec<f64> = (0..=p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..p).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let s = w[0] + x.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.5..0.5);
        labels.push(if s > 0.0 { 1 } else { -1 });
        rows.push(x);
    }
    Dataset::new(names(p), rows, labels).expect("valid dataset")
}

/// Every vector with `|v_j| ≤ caps[j]`.
pub fn lattice(caps: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &c in caps {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-c..=c).map(move |z| {
                    let mut w = v.clone();
                    w.push(z);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn raw_score(coefs: &[i64], x: &[f64]) -> f64 {
    coefs.iter().zip(x).map(|(&c, &v)| c as f64 * v).sum()
}

/// (errors on positives, errors on negatives); a zero score is an error.
pub fn class_errors(coefs: &[i64], data: &Dataset) -> (usize, usize) {
    let (mut pos, mut neg) = (0, 0);
    for i in 0..data.n() {
        let s = raw_score(coefs, data.row(i));
        let y = data.label(i);
        if f64::from(y) * s <= 0.0 {
            if y > 0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
    }
    (pos, neg)
}

pub fn errors(coefs: &[i64], data: &Dataset) -> usize {
    let (a, b) = class_errors(coefs, data);
    a + b
}

pub fn l0(coefs: &[i64]) -> usize {
    coefs[1..].iter().filter(|&&c| c != 0).count()
}

pub fn l1(coefs: &[i64]) -> u64 {
    coefs[1..].iter().map(|c| c.unsigned_abs()).sum()
}

pub fn predicts_positive(coefs: &[i64], x: &[f64]) -> bool {
    raw_score(coefs, x) > 0.0
}

/// Objective with an explicit normalizer, built from counts.
pub fn slim_value(errors: usize, normalizer: f64, coefs: &[i64], c0: f64, eps: f64) -> f64 {
    errors as f64 / normalizer + c0 * l0(coefs) as f64 + eps * l1(coefs) as f64
}

pub struct Brute {
    pub value: f64,
    pub argmin: Vec<Vec<i64>>,
}

/// Minimizes `f` over `candidates`; values within 1e-12 of the minimum tie.
pub fn brute_min(candidates: &[Vec<i64>], mut f: impl FnMut(&[i64]) -> Option<f64>) -> Option<Brute> {
    let scored: Vec<(f64, &Vec<i64>)> = candidates.iter().filter_map(|c| f(c).map(|v| (v, c))).collect();
    let value = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    if !value.is_finite() {
        return None;
    }
    let argmin = scored.iter().filter(|s| s.0 <= value + 1e-12).map(|s| s.1.clone()).collect();
    Some(Brute { value, argmin })
}

pub fn gcd_all(v: &[i64]) -> u64 {
    fn g(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            g(b, a % b)
        }
    }
    v.iter().fold(0, |acc, &x| g(acc, x.unsigned_abs()))
}

pub fn model(data: &Dataset, coefs: Vec<i64>) -> ScoringSystem {
    ScoringSystem::for_dataset(data, coefs).expect("dimension matches")
}

/// Log-uniform in [1e-3, 1].
pub fn random_c0(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.gen_range(-3.0..=0.0))
}

// ---------------------------------------------------------------- data

pub fn data_csv_roundtrip(seed: u64) -> Check {
    let mut r = rng(seed);
    let (n, p) = (r.gen_range(1..30), r.gen_range(1..6));
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| match r.gen_range(0..4) {
                    0 => r.gen_range(-3i32..=3) as f64,
                    1 => r.gen::<f64>() * 1e-7,
                    2 => -r.gen::<f64>() * 1e9,
                    _ => r.gen_range(-10.0..10.0),
                })
                .collect()
        })
        .collect();
    let labels: Vec<i8> = (0..n).map(|_| if r.gen_bool(0.4) { 1 } else { -1 }).collect();
    let data = lib(Dataset::new(names(p), rows, labels))?;
    let mut buf = Vec::new();
    lib(data.write_csv(&mut buf, "y"))?;
    let back = lib(read_csv(buf.as_slice(), "y"))?;
    ensure!(back.n() == data.n() && back.dim() == data.dim(), "shape changed");
    ensure!(back.labels() == data.labels(), "labels changed");
    ensure!(back.feature_names() == data.feature_names(), "names changed");
    for i in 0..data.n() {
        let same = data.row(i).iter().zip(back.row(i)).all(|(a, b)| a.to_bits() == b.to_bits());
        ensure!(same, "row {i} differs: {:?} vs {:?}", data.row(i), back.row(i));
    }
    Ok(())
}

pub fn data_binarize_monotone(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.gen_range(2..40);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![r.gen_range(-5.0..5.0)]).collect();
    let labels: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    let data = lib(Dataset::new(vec!["x".into()], rows, labels))?;
    let mut t = [r.gen_range(-6.0..6.0), r.gen_range(-6.0..6.0)];
    t.sort_by(f64::total_cmp);
    if t[0] == t[1] {
        return Ok(());
    }
    let spec: BinarizationSpec = [("x".to_string(), Directive::Thresholds(t.to_vec()))].into_iter().collect();
    let (bin, rules) = lib(binarize(&data, &spec))?;
    let col_of = |v: f64| {
        rules.groups[0]
            .rules
            .iter()
            .find(|rule| matches!(rule.kind, supersparse::data::RuleKind::Threshold(x) if x == v))
            .map(|rule| rule.column)
    };
    let (Some(a), Some(b)) = (col_of(t[0]), col_of(t[1])) else {
        return Err("threshold columns missing".into());
    };
    for i in 0..bin.n() {
        let x = data.value(i, 1);
        ensure!(bin.value(i, a) >= bin.value(i, b), "x={x}: rule({}) < rule({})", t[0], t[1]);
        ensure!(bin.value(i, a) == f64::from(u8::from(x >= t[0])), "rule x>={} wrong at x={x}", t[0]);
    }
    Ok(())
}

pub fn data_balanced_weights(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.gen_range(2..200);
    let data = integer_dataset(&mut r, n, 1, 0, 1);
    let w = lib(class_weights(&data, WeightMode::Balanced))?;
    let lhs = w.w_pos * data.n_pos() as f64;
    let rhs = w.w_neg * data.n_neg() as f64;
    ensure!((lhs - rhs).abs() <= 1e-12, "W+N+ = {lhs}, W-N- = {rhs}");
    Ok(())
}

// ---------------------------------------------------------------- scoring

pub fn scoring_scale_invariance(seed: u64) -> Check {
    let mut r = rng(seed);
    let data = integer_dataset(&mut r, 25, 4, -3, 3);
    let coefs: Vec<i64> = (0..data.dim()).map(|_| r.gen_range(-5..=5)).collect();
    let k = r.gen_range(1..=7);
    let base = lib(zero_one_loss(&model(&data, coefs.clone()), &data))?;
    let scaled = lib(zero_one_loss(&model(&data, coefs.iter().map(|c| c * k).collect()), &data))?;
    ensure!(base == scaled, "loss changed under scaling by {k}");
    ensure!(base.errors == errors(&coefs, &data), "library error count disagrees with direct count");
    Ok(())
}

pub fn scoring_zero_objective(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.gen_range(1..50);
    let data = real_dataset(&mut r, n, 3);
    let (c0, eps) = (r.gen::<f64>(), r.gen::<f64>());
    let v = lib(objective(&ScoringSystem::zero(&data), &data, c0, eps))?;
    ensure!(v == 1.0, "objective of the zero model is {v}");
    Ok(())
}

pub fn scoring_norm_permutation(seed: u64) -> Check {
    let mut r = rng(seed);
    let data = integer_dataset(&mut r, 20, 5, -2, 2);
    let coefs: Vec<i64> = (0..data.dim()).map(|_| r.gen_range(-4..=4)).collect();
    let mut perm: Vec<usize> = (1..data.dim()).collect();
    perm.shuffle(&mut r);
    let order: Vec<usize> = std::iter::once(0).chain(perm.iter().copied()).collect();
    let m1 = model(&data, coefs.clone());
    let names: Vec<String> = order.iter().map(|&j| data.feature_names()[j].clone()).collect();
    let m2 = lib(ScoringSystem::new(names.clone(), order.iter().map(|&j| coefs[j]).collect()))?;
    ensure!(norms(&m1) == norms(&m2), "norms changed under permutation");
    let rows: Vec<Vec<f64>> = (0..data.n()).map(|i| order[1..].iter().map(|&j| data.value(i, j)).collect()).collect();
    let permuted = lib(Dataset::new(names[1..].to_vec(), rows, data.labels().to_vec()))?;
    ensure!(
        lib(zero_one_loss(&m1, &data))? == lib(zero_one_loss(&m2, &permuted))?,
        "loss changed under consistent permutation"
    );
    Ok(())
}

pub fn scoring_render_deterministic(seed: u64) -> Check {
    let mut r = rng(seed);
    let p = r.gen_range(1..8);
    let names: Vec<String> = (0..p).map(|j| format!("feature_{j}_{}", "x".repeat(r.gen_range(0..20)))).collect();
    let coefs: Vec<i64> = (0..=p).map(|_| r.gen_range(-12..=12)).collect();
    let m = lib(ScoringSystem::new(
        std::iter::once("(Intercept)".to_string()).chain(names).collect(),
        coefs,
    ))?;
    let a = render_table(&m, Some("OUTCOME"));
    let b = render_table(&m.clone(), Some("OUTCOME"));
    let c = render_table(&lib(ScoringSystem::from_json(&lib(m.to_json())?))?, Some("OUTCOME"));
    ensure!(a == b && b == c, "rendering is not deterministic");
    Ok(())
}

// ---------------------------------------------------------------- formulate

pub fn formulate_self_consistent(seed: u64) -> Check {
    let mut r = rng(seed);
    let (n, p) = (r.gen_range(2..15), r.gen_range(1..4));
    let mut data = integer_dataset(&mut r, n, p, -1, 2);
    let merge = seed % 2 == 0;
    if merge {
        let idx: Vec<usize> = (0..n).chain(0..n / 2).collect();
        data = data.subset(&idx);
    }
    let cap = r.gen_range(1..=3);
    let c0 = random_c0(&mut r);
    let params = SlimParams::new(&data, c0, cap, cap).with_merged_duplicates(merge);
    let inst = lib(build_slim(&data, &params, &[]))?;
    let eps = params.epsilon(data.n());
    for _ in 0..20 {
        let coefs: Vec<i64> = (0..data.dim()).map(|_| r.gen_range(-cap..=cap)).collect();
        let x = inst.complete(&coefs);
        ensure!(
            inst.is_feasible(&x, 1e-7),
            "definitional assignment of {coefs:?} violates the instance by {}",
            inst.max_violation(&x)
        );
        let want = slim_value(errors(&coefs, &data), data.n() as f64, &coefs, c0, eps);
        let got = inst.objective_value(&x);
        ensure!((got - want).abs() <= 1e-9, "instance objective {got} vs direct {want} at {coefs:?}");
        let via_scoring = lib(objective(&model(&data, coefs.clone()), &data, c0, eps))?;
        ensure!((via_scoring - want).abs() <= 1e-9, "scoring objective {via_scoring} vs direct {want}");
    }
    Ok(())
}

pub fn formulate_big_m_brute(seed: u64) -> Check {
    let mut r = rng(seed);
    let p = r.gen_range(1..=3);
    let cap = r.gen_range(1..=3);
    let rows: Vec<Vec<f64>> = (0..100).map(|_| (0..p).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
    let labels: Vec<i8> = (0..100).map(|_| if r.gen_bool(0.5) { 1 } else { -1 }).collect();
    let data = lib(Dataset::new(names(p), rows, labels))?;
    let gamma = r.gen_range(0.05..1.0);
    let m = lib(big_m_loss(&data, &CoefficientSet::symmetric(p, cap, cap), gamma))?;
    let all = lattice(&vec![cap; p + 1]);
    for i in 0..data.n() {
        let y = f64::from(data.label(i));
        let brute = all.iter().map(|c| gamma - y * raw_score(c, data.row(i))).fold(f64::NEG_INFINITY, f64::max);
        ensure!((brute - m[i]).abs() <= 1e-9, "row {i}: closed form {} vs enumeration {brute}", m[i]);
    }
    Ok(())
}

pub fn formulate_max_fpr_feasible(seed: u64) -> Check {
    let mut r = rng(seed);
    let (n, p) = (r.gen_range(4..16), r.gen_range(1..=2));
    let data = integer_dataset(&mut r, n, p, 0, 1);
    let gamma_fpr = r.gen_range(0.0..0.6);
    let params = SlimParams::new(&data, 0.01, 2, 2);
    let inst = lib(build_slim(&data, &params, &[ConstraintSpec::MaxFpr { gamma: gamma_fpr }]))?;
    let allowed = (gamma_fpr * data.n_neg() as f64 + 1e-9).floor() as usize;
    for coefs in lattice(&vec![2; data.dim()]) {
        let (_, fp) = class_errors(&coefs, &data);
        let feasible = inst.is_feasible(&inst.complete(&coefs), 1e-7);
        ensure!(!feasible || fp <= allowed, "{coefs:?} feasible with {fp} false positives > {allowed}");
        ensure!(feasible || fp > allowed, "{coefs:?} infeasible although {fp} ≤ {allowed}");
    }
    Ok(())
}

// ---------------------------------------------------------------- milp

/// A tiny SLIM problem in the shape used by the oracle comparisons.
pub struct Tiny {
    pub data: Dataset,
    pub c0: f64,
    pub cap: i64,
    pub params: SlimParams,
}

impl Tiny {
    pub fn new(seed: u64, n_max: usize, p_max: usize, cap: i64, lo: i64, hi: i64) -> Self {
        let mut r = rng(seed);
        let n = r.gen_range(4..=n_max);
        let p = r.gen_range(1..=p_max);
        let data = integer_dataset(&mut r, n, p, lo, hi);
        let c0 = random_c0(&mut r);
        let params = SlimParams::new(&data, c0, cap, cap);
        Tiny { data, c0, cap, params }
    }

    pub fn eps(&self) -> f64 {
        self.params.epsilon(self.data.n())
    }

    pub fn lattice(&self) -> Vec<Vec<i64>> {
        lattice(&vec![self.cap; self.data.dim()])
    }

    pub fn value(&self, coefs: &[i64]) -> f64 {
        slim_value(errors(coefs, &self.data), self.data.n() as f64, coefs, self.c0, self.eps())
    }

    pub fn brute(&self) -> Brute {
        brute_min(&self.lattice(), |c| Some(self.value(c))).expect("nonempty lattice")
    }
}

/// Branch and bound against the exhaustive oracle and the test enumerator.
pub fn milp_oracle_match(seed: u64) -> Check {
    let t = Tiny::new(seed, 20, 4, 3, -2, 2);
    let oracle = lib(exhaustive_oracle(&t.data, &t.params, &[]))?.ok_or("oracle found no model")?;
    let brute = t.brute();
    ensure!((oracle.objective - brute.value).abs() <= 1e-12, "library oracle {} vs enumeration {}", oracle.objective, brute.value);
    let lib_set: BTreeSet<&Vec<i64>> = oracle.argmin.iter().collect();
    let ref_set: BTreeSet<&Vec<i64>> = brute.argmin.iter().collect();
    ensure!(lib_set == ref_set, "oracle argmin sets differ");

    let inst = lib(build_slim(&t.data, &t.params, &[]))?;
    let res = branch_and_bound(&inst, &SolveOptions::default());
    ensure!(res.status == SolveStatus::Optimal, "status {:?}", res.status);
    let coefs = res.coefficients(&inst).ok_or("no solution")?;
    let best = &brute.argmin[0];
    ensure!(
        errors(&coefs, &t.data) == errors(best, &t.data) && l0(&coefs) == l0(best),
        "B&B (errors {}, size {}) vs oracle (errors {}, size {})",
        errors(&coefs, &t.data),
        l0(&coefs),
        errors(best, &t.data),
        l0(best)
    );
    let eps_gap = t.eps() * (l1(&coefs) as f64 - l1(best) as f64);
    ensure!(eps_gap.abs() <= 1e-12, "ε part differs by {eps_gap}");
    let reported = res.objective.ok_or("no objective")?;
    ensure!((reported - brute.value).abs() <= 1e-9, "reported objective {reported} vs {}", brute.value);
    Ok(())
}

/// Root and random sub-box relaxations never exceed the integer optimum of the box.
pub fn milp_relaxation_sound(seed: u64) -> Check {
    let t = Tiny::new(seed, 12, 3, 2, -1, 1);
    let inst = lib(build_slim(&t.data, &t.params, &[]))?;
    let mut r = rng(seed ^ 0x5eed);
    for round in 0..4 {
        let boxes: Vec<(i64, i64)> = (0..t.data.dim())
            .map(|_| {
                if round == 0 {
                    (-t.cap, t.cap)
                } else {
                    let a = r.gen_range(-t.cap..=t.cap);
                    let b = r.gen_range(-t.cap..=t.cap);
                    (a.min(b), a.max(b))
                }
            })
            .collect();
        let mut lp = LpProblem::relaxation(&inst);
        for (j, &(a, b)) in boxes.iter().enumerate() {
            lp.lo[inst.coef_vars[j]] = a as f64;
            lp.hi[inst.coef_vars[j]] = b as f64;
        }
        let sol = supersparse::milp::simplex_solve(&lp);
        let inside: Vec<Vec<i64>> = t
            .lattice()
            .into_iter()
            .filter(|c| c.iter().zip(&boxes).all(|(v, &(a, b))| a <= *v && *v <= b))
            .collect();
        let best = brute_min(&inside, |c| Some(t.value(c))).expect("box is nonempty");
        ensure!(
            sol.objective <= best.value + 1e-9,
            "box {boxes:?}: LP bound {} above integer optimum {}",
            sol.objective,
            best.value
        );
    }
    Ok(())
}

pub fn milp_monotone_histories(seed: u64) -> Check {
    let t = Tiny::new(seed, 16, 3, 3, -2, 2);
    let inst = lib(build_slim(&t.data, &t.params, &[]))?;
    let res = branch_and_bound(&inst, &SolveOptions::default());
    for w in res.incumbent_history.windows(2) {
        ensure!(w[1].1 <= w[0].1, "incumbent rose from {} to {}", w[0].1, w[1].1);
    }
    for w in res.bound_history.windows(2) {
        ensure!(w[1] >= w[0] - 1e-12, "lower bound fell from {} to {}", w[0], w[1]);
    }
    Ok(())
}

pub fn milp_determinism(seed: u64) -> Check {
    let t = Tiny::new(seed, 20, 4, 3, -2, 2);
    let inst = lib(build_slim(&t.data, &t.params, &[]))?;
    let opts = SolveOptions::default().with_node_limit(40).with_trace();
    let a = branch_and_bound(&inst, &opts);
    let b = branch_and_bound(&inst, &opts);
    ensure!(
        a.status == b.status
            && a.solution == b.solution
            && a.objective == b.objective
            && a.lower_bound == b.lower_bound
            && a.nodes == b.nodes
            && a.lp_iterations == b.lp_iterations
            && a.incumbent_history == b.incumbent_history
            && a.bound_history == b.bound_history
            && a.trace == b.trace,
        "two identical runs differ"
    );
    Ok(())
}

/// Dropping a used feature and re-optimizing the rest never lowers the loss by
/// more than the ℓ0 (and ε) cost saved.
pub fn milp_feature_worth(seed: u64) -> Check {
    let t = Tiny::new(seed, 15, 3, 2, -1, 2);
    let all = t.lattice();
    let opt = &t.brute().argmin[0];
    let n = t.data.n() as f64;
    let loss = |c: &[i64]| errors(c, &t.data) as f64 / n;
    for j in 1..opt.len() {
        if opt[j] == 0 {
            continue;
        }
        let without: Vec<Vec<i64>> = all.iter().filter(|c| c[j] == 0).cloned().collect();
        let alt = &brute_min(&without, |c| Some(t.value(c))).expect("nonempty").argmin[0];
        let increase = loss(alt) - loss(opt);
        let saved = t.c0 * (l0(opt) as f64 - l0(alt) as f64) + t.eps() * (l1(opt) as f64 - l1(alt) as f64);
        ensure!(increase >= saved - 1e-12, "feature {j}: loss rises {increase} but penalty saves {saved}");
    }
    Ok(())
}

// ---------------------------------------------------------------- reduce

pub struct ReductionCase {
    pub tiny: Tiny,
    pub eps: f64,
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    pub baseline: Vec<i8>,
    pub fixed_errors: usize,
}

/// Reduces a tiny instance at the width certified by its exhaustive optimum.
pub fn reduction_case(seed: u64) -> Result<ReductionCase, String> {
    let mut r = rng(seed);
    let cap = r.gen_range(1..=2);
    let tiny = Tiny::new(seed, 20, 3, cap, 0, 1);
    let inst = lib(build_slim(&tiny.data, &tiny.params, &[]))?;
    let opt = tiny.brute().argmin[0].clone();
    let analysis = lib(analyze(&tiny.data, &inst))?;
    let (eps, _) = lib(epsilon_bounds(&inst, analysis.surrogate_optimum, Some(&model(&tiny.data, opt))))?;
    let eps = eps.ok_or("no width for the optimum")?;
    let (_, report) = lib(reduce(&tiny.data, &inst, eps))?;
    Ok(ReductionCase {
        eps,
        kept: report.kept_indices(),
        removed: report.removed_indices(),
        baseline: report.examples.iter().map(|e| e.baseline_sign).collect(),
        fixed_errors: report.fixed_errors(&tiny.data),
        tiny,
    })
}

/// Minimum over D_N equals minimum over D_M (normalizer N) plus the fixed
/// errors of the removed examples, and every D_N optimum is a D_M optimum.
pub fn reduce_equivalence(seed: u64) -> Check {
    let case = reduction_case(seed)?;
    let t = &case.tiny;
    let n = t.data.n() as f64;
    let full = t.brute();
    let reduced_value = |c: &[i64]| {
        let e = case.kept.iter().filter(|&&i| f64::from(t.data.label(i)) * raw_score(c, t.data.row(i)) <= 0.0).count();
        slim_value(e, n, c, t.c0, t.eps())
    };
    let reduced = brute_min(&t.lattice(), |c| Some(reduced_value(c))).expect("nonempty");
    let offset = case.fixed_errors as f64 / n;
    ensure!(
        (full.value - (reduced.value + offset)).abs() <= 1e-12,
        "min Z(D_N) = {} but min Z(D_M) + C/N = {} (removed {:?})",
        full.value,
        reduced.value + offset,
        case.removed
    );
    let reduced_set: BTreeSet<&Vec<i64>> = reduced.argmin.iter().collect();
    for f in &full.argmin {
        ensure!(reduced_set.contains(f), "D_N optimum {f:?} is not optimal on D_M (removed {:?})", case.removed);
    }
    Ok(())
}

pub fn reduce_sign_safety(seed: u64) -> Check {
    let case = reduction_case(seed)?;
    let t = &case.tiny;
    for f in &t.brute().argmin {
        for &i in &case.removed {
            let sign = if predicts_positive(f, t.data.row(i)) { 1 } else { -1 };
            ensure!(sign == case.baseline[i], "optimum {f:?} labels removed example {i} as {sign}");
        }
    }
    Ok(())
}

pub fn reduce_monotone(seed: u64) -> Check {
    let t = Tiny::new(seed, 20, 3, 2, 0, 1);
    let inst = lib(build_slim(&t.data, &t.params, &[]))?;
    let analysis = lib(analyze(&t.data, &inst))?;
    let (_, eps_max) = lib(epsilon_bounds(&inst, analysis.surrogate_optimum, None))?;
    let grid = supersparse::reduce::epsilon_grid(0.0, eps_max, 10);
    let mut last = f64::INFINITY;
    for eps in grid {
        let f = lib(analysis.report(eps))?.removed_fraction;
        ensure!(f <= last, "removed fraction rose to {f} at ε = {eps}");
        last = f;
    }
    Ok(())
}

/// Variant LPs solved from scratch agree with the warm-started ones.
pub fn reduce_cold_start_agrees(seed: u64) -> Check {
    let t = Tiny::new(seed, 12, 2, 2, 0, 1);
    let inst = lib(build_slim(&t.data, &t.params, &[]))?;
    let analysis = lib(analyze(&t.data, &inst))?;
    for i in 0..t.data.n() {
        let sign = if analysis.baseline_scores[i] > 1e-9 { 1 } else { -1 };
        let mut lp = LpProblem::relaxation(&inst);
        let row = flip_constraint(&inst, &t.data, i, sign);
        lp.add_row(row.terms, row.sense, row.rhs);
        let cold = supersparse::milp::simplex_solve(&lp);
        let warm = analysis.variant_objectives[i];
        match (cold.status, warm) {
            (supersparse::milp::LpStatus::Optimal, Some(w)) => {
                ensure!((cold.objective - w).abs() <= 1e-7, "example {i}: cold {} vs warm {w}", cold.objective)
            }
            (supersparse::milp::LpStatus::Optimal, None) => return Err(format!("example {i}: warm start lost a solution")),
            (_, Some(w)) => return Err(format!("example {i}: only warm start solved ({w})")),
            _ => {}
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- theory

pub fn theory_rounding_error(seed: u64) -> Check {
    let mut r = rng(seed);
    let rho: Vec<f64> = (0..r.gen_range(1..8)).map(|_| r.gen_range(-10.0..10.0)).collect();
    let norm = rho.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-9 {
        return Ok(());
    }
    let cap = r.gen_range(1..100);
    let lam = lib(round_at_resolution(&rho, cap))?;
    for (a, b) in rho.iter().zip(&lam) {
        let err = (a / norm - *b as f64 / cap as f64).abs();
        ensure!(err <= 0.5 / cap as f64 + 1e-12, "coordinate error {err} at Λ = {cap}");
    }
    Ok(())
}

/// Rounds a random baseline at the smallest admissible resolution and returns
/// (errors after rounding, baseline errors).
pub fn rounding_trial(seed: u64, k: usize) -> Result<(usize, usize), String> {
    let mut r = rng(seed);
    let (n, p) = (r.gen_range(k.max(2)..=50), r.gen_range(1..=5));
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| std::iter::once(1.0).chain((0..p).map(|_| r.gen_range(-4.0..4.0))).collect())
        .collect();
    let rho: Vec<f64> = (0..=p).map(|_| r.gen_range(-2.0..2.0)).collect();
    let labels: Vec<i8> = (0..n).map(|_| if r.gen_bool(0.5) { 1 } else { -1 }).collect();
    let profile = lib(MarginProfile::new(&rho, &rows))?;
    let cap = smallest_cap_above(lib(min_resolution_k(&profile, k))?);
    let lam = lib(round_at_resolution(&rho, cap))?;
    let errs = |f: &dyn Fn(&[f64]) -> f64| {
        rows.iter().zip(&labels).filter(|(x, &y)| f64::from(y) * f(x) <= 0.0).count()
    };
    let dot_rho = |x: &[f64]| rho.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let dot_lam = |x: &[f64]| lam.iter().zip(x).map(|(&a, b)| a as f64 * b).sum::<f64>();
    Ok((errs(&dot_lam), errs(&dot_rho)))
}

pub fn theory_rounding_preserves_loss(seed: u64) -> Check {
    let (rounded, baseline) = rounding_trial(seed, 1)?;
    ensure!(rounded <= baseline, "rounding raised errors from {baseline} to {rounded}");
    Ok(())
}

pub fn theory_kth_margin(seed: u64, k: usize) -> Check {
    let (rounded, baseline) = rounding_trial(seed, k)?;
    ensure!(rounded <= baseline + k - 1, "k = {k}: errors {baseline} -> {rounded}");
    Ok(())
}

pub fn theory_sparse_bound_improves(seed: u64) -> Check {
    let mut r = rng(seed);
    let p = r.gen_range(2..12);
    let support = r.gen_range(1..p);
    // any C0 with ⌊1/C0⌋ = support
    let c0 = 1.0 / (support as f64 + r.gen_range(0.01..0.99));
    let lam = r.gen_range(1..30);
    let (delta, n) = (r.gen_range(0.001..0.5), r.gen_range(10..10_000));
    let sparse = lib(occam_bound(&lib(sparse_hypothesis_count(p, lam, c0))?, delta, n))?;
    let full = lib(occam_bound(&full_count(p, lam), delta, n))?;
    ensure!(sparse <= full, "P={p} Λ={lam} C0={c0}: sparse bound {sparse} > full {full}");
    Ok(())
}

/// Classic Farey sequence length by listing reduced fractions in [0, 1].
pub fn farey_length(level: u64) -> usize {
    let mut set = BTreeSet::new();
    for b in 1..=level {
        for a in 0..=b {
            let g = gcd_all(&[a as i64, b as i64]);
            set.insert((a / g, b / g));
        }
    }
    set.len()
}

pub fn theory_farey(level: u64) -> Check {
    let want = farey_length(level) - 1;
    let got = farey_count(1, level);
    ensure!(got == want.into(), "level {level}: farey_count {got} vs |F|-1 = {want}");
    Ok(())
}

pub fn theory_counts(p: usize, lam: u64) -> Check {
    let cube = lattice(&vec![lam as i64; p]);
    let coprime = cube.iter().filter(|v| gcd_all(v) == 1).count();
    ensure!(coprime_count(p, lam) == coprime.into(), "coprime P={p} Λ={lam}: {} vs {coprime}", coprime_count(p, lam));
    for c0 in [1.0, 0.6, 0.5, 0.34, 0.25, 0.2, 0.01] {
        let support = (1.0f64 / c0 + 1e-9).floor() as usize;
        let want = cube.iter().filter(|v| v.iter().filter(|&&z| z != 0).count() <= support).count();
        let got = lib(sparse_hypothesis_count(p, lam, c0))?;
        ensure!(got == want.into(), "sparse P={p} Λ={lam} C0={c0}: {got} vs {want}");
    }
    Ok(())
}

// ---------------------------------------------------------------- experiment

pub fn experiment_metric_identity(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.gen_range(2..60);
    let data = integer_dataset(&mut r, n, 3, -2, 2);
    let coefs: Vec<i64> = (0..data.dim()).map(|_| r.gen_range(-3..=3)).collect();
    let ev = lib(evaluate(&model(&data, coefs.clone()), &data, ClassWeights::UNIT))?;
    let lhs = data.n_pos() as f64 * (1.0 - ev.tpr) + data.n_neg() as f64 * ev.fpr;
    ensure!((lhs - ev.errors as f64).abs() <= 1e-9, "N+(1-TPR) + N-FPR = {lhs}, errors {}", ev.errors);
    ensure!(ev.errors_pos + ev.errors_neg == ev.errors, "class errors do not add up");
    ensure!((ev.errors_pos, ev.errors_neg) == class_errors(&coefs, &data), "class errors disagree with direct count");
    Ok(())
}

pub fn experiment_persisted_predictions(seed: u64) -> Check {
    let mut r = rng(seed);
    let data = real_dataset(&mut r, 40, 4);
    let coefs: Vec<i64> = (0..data.dim()).map(|_| r.gen_range(-9..=9)).collect();
    let m = model(&data, coefs);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = lib(OutputDir::create(dir.path()))?;
    lib(out.write_model(&m, None, None))?;
    let back = lib(ScoringSystem::load(out.path("model.json")))?;
    for i in 0..data.n() {
        let (a, b) = (lib(score(&m, data.row(i)))?, lib(score(&back, data.row(i)))?);
        ensure!(a.to_bits() == b.to_bits(), "example {i}: score {a} vs {b} after reload");
        ensure!(lib(m.predict(data.row(i)))? == lib(back.predict(data.row(i)))?, "prediction changed");
    }
    Ok(())
}

pub fn experiment_fpr_cap(seed: u64) -> Check {
    let mut r = rng(seed);
    let data = integer_dataset(&mut r, 30, 3, 0, 1);
    let gamma = r.gen_range(0.0..0.4);
    let cfg = RunConfig {
        weights: WeightMode::MaxSensitivity,
        constraints: vec![ConstraintSpec::MaxFpr { gamma }],
        coefficient_cap: 3,
        intercept_cap: 5,
        time_limit: Some(5.0),
        node_limit: Some(2000),
        ..RunConfig::default()
    };
    match train(&cfg, &data, 0.01) {
        Ok(out) => {
            ensure!(out.train.fpr <= gamma + 1e-12, "training FPR {} above cap {gamma}", out.train.fpr);
            Ok(())
        }
        Err(Error::NoIncumbent(_)) | Err(Error::Infeasible(_)) => Ok(()),
        Err(e) => Err(e.to_string()),
    }
}
