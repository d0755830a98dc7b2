//! Dense bounded-variable simplex.
//!
//! Every row `a·x ⋈ b` gets a slack `s` with `a·x + s = b`, so the basis
//! always has full rank and the slack basis is a valid start. All variables
//! carry finite boxes (infinite bounds are replaced by a large artificial box),
//! which makes any basis dual feasible once each nonbasic variable sits at the
//! bound matching the sign of its reduced cost. The solver is therefore a dual
//! simplex throughout: cold starts, bound changes and appended rows all keep
//! dual feasibility and only need primal repair.

use serde::{Deserialize, Serialize};

use crate::formulate::{IpInstance, Sense};

const FEAS_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-9;
const ARTIFICIAL_BOUND: f64 = 1e9;
const RESIDUAL_TOL: f64 = 1e-7;
const DEGENERATE_STREAK: usize = 100;
const CHECK_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min cᵀx` subject to rows and `lo ≤ x ≤ hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn new(cost: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self {
            cost,
            lo,
            hi,
            rows: Vec::new(),
        }
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(LpRow { terms, sense, rhs });
    }

    /// Continuous relaxation of an integer program.
    pub fn relaxation(instance: &IpInstance) -> Self {
        let mut lp = Self::new(
            instance.objective.clone(),
            instance.variables.iter().map(|v| v.lo).collect(),
            instance.variables.iter().map(|v| v.hi).collect(),
        );
        for c in &instance.constraints {
            lp.add_row(c.terms.clone(), c.sense, c.rhs);
        }
        lp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Basic column per row; columns `>= x.len()` are row slacks.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

/// Solves from scratch.
pub fn simplex_solve(problem: &LpProblem) -> LpSolution {
    let mut s = Simplex::new(problem);
    s.solve();
    s.solution()
}

/// A simplex tableau that can be re-solved after bound changes or new rows.
#[derive(Debug, Clone)]
pub struct Simplex {
    n: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    artificial: Vec<bool>,
    tab: Vec<Vec<f64>>,
    basis: Vec<usize>,
    head: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    x: Vec<f64>,
    d: Vec<f64>,
    status: LpStatus,
    iterations: usize,
    since_check: usize,
}

fn box_bound(v: f64, upper: bool) -> (f64, bool) {
    if v.is_finite() {
        (v, false)
    } else if upper {
        (ARTIFICIAL_BOUND, true)
    } else {
        (-ARTIFICIAL_BOUND, true)
    }
}

impl Simplex {
    pub fn new(problem: &LpProblem) -> Self {
        let n = problem.cost.len();
        let mut s = Simplex {
            n,
            a: Vec::new(),
            b: Vec::new(),
            cost: problem.cost.clone(),
            lo: Vec::with_capacity(n),
            hi: Vec::with_capacity(n),
            artificial: Vec::with_capacity(n),
            tab: Vec::new(),
            basis: Vec::new(),
            head: vec![None; n],
            at_upper: vec![false; n],
            x: vec![0.0; n],
            d: problem.cost.clone(),
            status: LpStatus::IterationLimit,
            iterations: 0,
            since_check: 0,
        };
        for j in 0..n {
            let (l, al) = box_bound(problem.lo[j], false);
            let (h, ah) = box_bound(problem.hi[j], true);
            s.lo.push(l);
            s.hi.push(h);
            s.artificial.push(al || ah);
            s.at_upper[j] = s.d[j] < 0.0;
            s.x[j] = if s.at_upper[j] { h } else { l };
        }
        for row in &problem.rows {
            s.add_row(&row.terms, row.sense, row.rhs);
        }
        s
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn status(&self) -> LpStatus {
        self.status
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    /// Structural variable values.
    pub fn values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    pub fn solution(&self) -> LpSolution {
        LpSolution {
            status: self.status,
            x: self.values().to_vec(),
            objective: self.objective(),
            basis: self.basis.clone(),
            iterations: self.iterations,
        }
    }

    fn ncols(&self) -> usize {
        self.cost.len()
    }

    fn activity_range(&self, terms: &[(usize, f64)]) -> (f64, f64) {
        terms.iter().fold((0.0, 0.0), |(mn, mx), &(k, a)| {
            let (p, q) = (a * self.lo[k], a * self.hi[k]);
            (mn + p.min(q), mx + p.max(q))
        })
    }

    /// Appends `terms ⋈ rhs` over structural variables. The new slack enters
    /// the basis, so the current basis stays dual feasible.
    pub fn add_row(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64) {
        let col = self.ncols();
        let mut dense = vec![0.0; self.n];
        for &(k, a) in terms {
            dense[k] += a;
        }
        let (min_act, max_act) = self.activity_range(terms);
        let (slo, shi) = match sense {
            Sense::Le => (0.0, (rhs - min_act).max(0.0) + 1.0),
            Sense::Ge => ((rhs - max_act).min(0.0) - 1.0, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        for row in &mut self.tab {
            row.push(0.0);
        }
        self.cost.push(0.0);
        self.lo.push(slo);
        self.hi.push(shi);
        self.artificial.push(false);
        self.at_upper.push(false);
        self.d.push(0.0);
        self.head.push(Some(self.b.len()));

        let mut new_row = vec![0.0; col + 1];
        new_row[..self.n].copy_from_slice(&dense);
        new_row[col] = 1.0;
        for (i, &bc) in self.basis.iter().enumerate() {
            let f = new_row[bc];
            if f != 0.0 {
                for (v, t) in new_row.iter_mut().zip(&self.tab[i]) {
                    *v -= f * t;
                }
                new_row[bc] = 0.0;
            }
        }
        let act: f64 = dense.iter().zip(&self.x).map(|(a, x)| a * x).sum();
        self.x.push(rhs - act);
        self.tab.push(new_row);
        self.basis.push(col);
        self.a.push(dense);
        self.b.push(rhs);
    }

    /// Changes the box of a structural variable.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        let (lo, al) = box_bound(lo, false);
        let (hi, ah) = box_bound(hi, true);
        self.artificial[j] = al || ah;
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.head[j].is_none() {
            let upper = if self.d[j] > DUAL_TOL {
                false
            } else if self.d[j] < -DUAL_TOL {
                true
            } else {
                self.at_upper[j]
            };
            self.move_nonbasic(j, if upper { hi } else { lo });
            self.at_upper[j] = upper;
        }
    }

    fn move_nonbasic(&mut self, j: usize, value: f64) {
        let delta = value - self.x[j];
        if delta != 0.0 {
            for (i, &bc) in self.basis.iter().enumerate() {
                let t = self.tab[i][j];
                if t != 0.0 {
                    self.x[bc] -= t * delta;
                }
            }
            self.x[j] = value;
        }
    }

    fn infeasibility(&self, col: usize) -> f64 {
        let v = self.x[col];
        let tol = FEAS_TOL * (1.0 + self.lo[col].abs().max(self.hi[col].abs()).min(1e6));
        if v < self.lo[col] - tol {
            self.lo[col] - v
        } else if v > self.hi[col] + tol {
            v - self.hi[col]
        } else {
            0.0
        }
    }

    pub fn solve(&mut self) -> LpStatus {
        let limit = 50 * (self.ncols() + self.num_rows()) + 1000;
        let mut refactored = 0;
        let mut degenerate = 0usize;
        let mut count = 0usize;
        loop {
            if count > limit {
                self.status = LpStatus::IterationLimit;
                return self.status;
            }
            if self.since_check >= CHECK_EVERY {
                self.since_check = 0;
                if self.residual() > RESIDUAL_TOL * 1e-2 {
                    self.refactor();
                }
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let Some(r) = self.choose_leaving(bland) else {
                if self.residual() > RESIDUAL_TOL && refactored < 3 {
                    refactored += 1;
                    self.refactor();
                    continue;
                }
                self.status = if (0..self.n).any(|j| {
                    self.artificial[j] && (self.x[j].abs() >= ARTIFICIAL_BOUND * (1.0 - 1e-9))
                }) {
                    LpStatus::Unbounded
                } else {
                    LpStatus::Optimal
                };
                self.clean_values();
                return self.status;
            };
            let Some(j) = self.choose_entering(r, bland) else {
                if refactored < 3 {
                    refactored += 1;
                    self.refactor();
                    continue;
                }
                self.status = LpStatus::Infeasible;
                return self.status;
            };
            let step = self.d[j] / self.tab[r][j];
            if step.abs() <= DUAL_TOL {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, j);
            count += 1;
            self.iterations += 1;
            self.since_check += 1;
        }
    }

    fn choose_leaving(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (r, &bc) in self.basis.iter().enumerate() {
            let v = self.infeasibility(bc);
            if v <= 0.0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((br, bv)) => {
                    if bland {
                        bc < self.basis[br]
                    } else {
                        v > bv
                    }
                }
            };
            if better {
                best = Some((r, v));
            }
        }
        best.map(|(r, _)| r)
    }

    fn choose_entering(&mut self, r: usize, bland: bool) -> Option<usize> {
        let q = self.basis[r];
        let increase = self.x[q] < self.lo[q];
        let row = &self.tab[r];
        let eligible = |j: usize| -> Option<f64> {
            if self.head[j].is_some() || self.lo[j] == self.hi[j] {
                return None;
            }
            let alpha = row[j];
            if alpha.abs() <= PIVOT_TOL {
                return None;
            }
            // x_q moves by −alpha·Δx_j
            let ok = if self.at_upper[j] {
                (alpha > 0.0) == increase
            } else {
                (alpha < 0.0) == increase
            };
            ok.then_some(alpha)
        };
        let ncols = self.ncols();
        let mut theta_max = f64::INFINITY;
        for j in 0..ncols {
            if let Some(alpha) = eligible(j) {
                let dj = if self.at_upper[j] { (-self.d[j]).max(0.0) } else { self.d[j].max(0.0) };
                theta_max = theta_max.min((dj + DUAL_TOL) / alpha.abs());
            }
        }
        if !theta_max.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..ncols {
            if let Some(alpha) = eligible(j) {
                let dj = if self.at_upper[j] { (-self.d[j]).max(0.0) } else { self.d[j].max(0.0) };
                let ratio = dj / alpha.abs();
                if ratio > theta_max {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((_, ba, br)) => {
                        if bland {
                            ratio < br - 1e-15
                        } else {
                            alpha.abs() > ba
                        }
                    }
                };
                if better {
                    best = Some((j, alpha.abs(), ratio));
                }
            }
        }
        let (j, _, _) = best?;
        // Harris: clamp a slightly wrong-signed reduced cost to zero
        if (self.at_upper[j] && self.d[j] > 0.0) || (!self.at_upper[j] && self.d[j] < 0.0) {
            self.d[j] = 0.0;
        }
        Some(j)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let q = self.basis[r];
        let target = if self.x[q] < self.lo[q] { self.lo[q] } else { self.hi[q] };
        let alpha = self.tab[r][j];
        let delta = (self.x[q] - target) / alpha;
        for (i, &bc) in self.basis.iter().enumerate() {
            let t = self.tab[i][j];
            if t != 0.0 {
                self.x[bc] -= t * delta;
            }
        }
        self.x[j] += delta;
        self.x[q] = target;

        let inv = 1.0 / alpha;
        for v in self.tab[r].iter_mut() {
            *v *= inv;
        }
        self.tab[r][j] = 1.0;
        let pivot_row = std::mem::take(&mut self.tab[r]);
        for (i, row) in self.tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[j] = 0.0;
            }
        }
        let dj = self.d[j];
        if dj != 0.0 {
            for (v, p) in self.d.iter_mut().zip(&pivot_row) {
                *v -= dj * p;
            }
        }
        self.d[j] = 0.0;
        self.tab[r] = pivot_row;

        self.basis[r] = j;
        self.head[j] = Some(r);
        self.head[q] = None;
        self.at_upper[q] = target == self.hi[q] && self.lo[q] != self.hi[q];
    }

    /// Largest violation of `A x + s = b`.
    fn residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, row) in self.a.iter().enumerate() {
            let act: f64 = row.iter().zip(&self.x).map(|(a, x)| a * x).sum();
            let scale = 1.0 + self.b[r].abs();
            worst = worst.max((act + self.x[self.n + r] - self.b[r]).abs() / scale);
        }
        worst
    }

    /// Rebuilds the tableau, basic values and reduced costs from the original
    /// rows and the current basis. Falls back to the slack basis if the basis
    /// has become numerically singular.
    fn refactor(&mut self) {
        let m = self.num_rows();
        let ncols = self.ncols();
        let mut mat: Vec<Vec<f64>> = (0..m)
            .map(|r| {
                let mut row = vec![0.0; ncols + 1];
                row[..self.n].copy_from_slice(&self.a[r]);
                row[self.n + r] = 1.0;
                row[ncols] = self.b[r];
                row
            })
            .collect();
        for j in 0..ncols {
            if self.head[j].is_none() {
                for row in mat.iter_mut() {
                    row[ncols] -= row[j] * self.x[j];
                }
            }
        }
        let cols: Vec<usize> = self.basis.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        let mut ok = true;
        for &c in &cols {
            let mut best = None;
            let mut best_v = 1e-11;
            for (r, row) in mat.iter().enumerate() {
                if !assigned[r] && row[c].abs() > best_v {
                    best_v = row[c].abs();
                    best = Some(r);
                }
            }
            let Some(p) = best else {
                ok = false;
                break;
            };
            assigned[p] = true;
            new_basis[p] = c;
            let inv = 1.0 / mat[p][c];
            for v in mat[p].iter_mut() {
                *v *= inv;
            }
            let prow = mat[p].clone();
            for (r, row) in mat.iter_mut().enumerate() {
                if r != p {
                    let f = row[c];
                    if f != 0.0 {
                        for (v, pv) in row.iter_mut().zip(&prow) {
                            *v -= f * pv;
                        }
                        row[c] = 0.0;
                    }
                }
            }
        }
        if !ok {
            self.reset_to_slack_basis();
            return;
        }
        for r in 0..m {
            let c = new_basis[r];
            self.head[c] = Some(r);
            self.x[c] = mat[r][ncols];
            mat[r].truncate(ncols);
        }
        self.basis = new_basis;
        self.tab = mat;
        self.recompute_duals();
    }

    fn reset_to_slack_basis(&mut self) {
        let m = self.num_rows();
        let ncols = self.ncols();
        self.head = vec![None; ncols];
        self.tab = (0..m)
            .map(|r| {
                let mut row = vec![0.0; ncols];
                row[..self.n].copy_from_slice(&self.a[r]);
                row[self.n + r] = 1.0;
                row
            })
            .collect();
        self.basis = (0..m).map(|r| self.n + r).collect();
        for (r, &c) in self.basis.iter().enumerate() {
            self.head[c] = Some(r);
        }
        self.d = self.cost.clone();
        for j in 0..self.n {
            self.at_upper[j] = self.d[j] < 0.0;
            self.x[j] = if self.at_upper[j] { self.hi[j] } else { self.lo[j] };
        }
        for r in 0..m {
            let act: f64 = self.a[r].iter().zip(&self.x).map(|(a, x)| a * x).sum();
            self.x[self.n + r] = self.b[r] - act;
        }
    }

    /// Recomputes reduced costs and moves nonbasic variables to the bound
    /// their sign calls for.
    fn recompute_duals(&mut self) {
        let ncols = self.ncols();
        let mut d = self.cost.clone();
        for (r, &bc) in self.basis.iter().enumerate() {
            let cb = self.cost[bc];
            if cb != 0.0 {
                for (v, t) in d.iter_mut().zip(&self.tab[r]) {
                    *v -= cb * t;
                }
            }
        }
        for &bc in &self.basis {
            d[bc] = 0.0;
        }
        self.d = d;
        for j in 0..ncols {
            if self.head[j].is_some() {
                continue;
            }
            let want_upper = if self.d[j] < -DUAL_TOL {
                true
            } else if self.d[j] > DUAL_TOL {
                false
            } else {
                self.at_upper[j]
            };
            let target = if want_upper { self.hi[j] } else { self.lo[j] };
            self.at_upper[j] = want_upper;
            if self.x[j] != target {
                self.move_nonbasic(j, target);
            }
        }
    }

    /// Snaps nonbasic values exactly onto their bounds.
    fn clean_values(&mut self) {
        for j in 0..self.ncols() {
            if self.head[j].is_none() {
                self.x[j] = if self.at_upper[j] { self.hi[j] } else { self.lo[j] };
            }
        }
    }
}
