//! Best-first branch-and-bound over LP relaxations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use log::debug;
use serde::{Deserialize, Serialize};

use super::lp::{LpProblem, LpStatus, Simplex};
use crate::formulate::{IpInstance, Sense};

const INT_TOL: f64 = 1e-6;
const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub gap_tolerance: f64,
    /// Dive depth-first every this many nodes.
    pub plunge_every: usize,
    pub local_search: bool,
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit: None,
            node_limit: None,
            gap_tolerance: 1e-9,
            plunge_every: 50,
            local_search: true,
            trace: false,
        }
    }
}

impl SolveOptions {
    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = Some(Duration::from_secs_f64(seconds));
        self
    }

    pub fn with_node_limit(mut self, nodes: usize) -> Self {
        self.node_limit = Some(nodes);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    FeasibleBudgetExhausted,
    Infeasible,
    NoIncumbent,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleBudgetExhausted => "feasible-budget-exhausted",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NoIncumbent => "no-incumbent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub node: usize,
    pub depth: usize,
    pub bound: f64,
    pub incumbent: f64,
    pub decision: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Full assignment of the best solution found.
    pub solution: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub lower_bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub wall_time: f64,
    pub lp_iterations: usize,
    /// Objective each time the incumbent improved, with the node count.
    pub incumbent_history: Vec<(usize, f64)>,
    /// Global lower bound after each node.
    pub bound_history: Vec<f64>,
    pub trace: Vec<TraceRecord>,
}

impl SolveResult {
    pub fn coefficients(&self, instance: &IpInstance) -> Option<Vec<i64>> {
        self.solution.as_ref().map(|x| instance.coefficients_of(x))
    }

    /// Tab-separated trace with a header row.
    pub fn trace_tsv(&self) -> String {
        let mut out = String::from("node\tdepth\tbound\tincumbent\tdecision\n");
        for t in &self.trace {
            out.push_str(&format!("{}\t{}\t{:.12}\t{:.12}\t{}\n", t.node, t.depth, t.bound, t.incumbent, t.decision));
        }
        out
    }
}

struct Link {
    var: usize,
    lo: f64,
    hi: f64,
    parent: Option<Rc<Link>>,
}

struct Node {
    bound: f64,
    id: usize,
    depth: usize,
    branch: Option<Rc<Link>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: the smallest bound (then the newest node) is the greatest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| self.id.cmp(&other.id))
    }
}

struct Incumbent {
    x: Vec<f64>,
    coefs: Vec<i64>,
    value: f64,
}

struct Engine<'a> {
    inst: &'a IpInstance,
    opts: &'a SolveOptions,
    root_lo: Vec<f64>,
    root_hi: Vec<f64>,
    is_int: Vec<bool>,
    incumbent: Option<Incumbent>,
    history: Vec<(usize, f64)>,
    nodes: usize,
    trace: Vec<TraceRecord>,
}

impl<'a> Engine<'a> {
    fn inc_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |i| i.value)
    }

    fn prune_threshold(&self) -> f64 {
        let v = self.inc_value();
        v - self.opts.gap_tolerance * v.abs().max(1e-10)
    }

    fn record(&mut self, depth: usize, bound: f64, decision: String) {
        if self.opts.trace {
            self.trace.push(TraceRecord {
                node: self.nodes,
                depth,
                bound,
                incumbent: self.inc_value(),
                decision,
            });
        }
    }

    /// Evaluates an integer coefficient vector; returns its assignment and
    /// objective when feasible.
    fn evaluate(&self, coefs: &[i64]) -> Option<(Vec<f64>, f64)> {
        let x = self.inst.complete(coefs);
        if !self.inst.is_feasible(&x, FEAS_TOL) {
            return None;
        }
        let v = self.inst.objective_value(&x);
        Some((x, v))
    }

    fn offer(&mut self, coefs: Vec<i64>) -> bool {
        let Some((x, v)) = self.evaluate(&coefs) else {
            return false;
        };
        if v < self.inc_value() - 1e-12 {
            self.incumbent = Some(Incumbent { x, coefs, value: v });
            self.history.push((self.nodes, v));
            debug!("incumbent {v:.10} at node {}", self.nodes);
            if self.opts.local_search {
                self.local_search();
            }
            true
        } else {
            false
        }
    }

    fn nearest_in_domain(&self, j: usize, v: f64) -> i64 {
        let d = &self.inst.domains[j];
        let r = v.round().clamp(d.lo as f64, d.hi as f64) as i64;
        if d.contains(r) {
            return r;
        }
        d.values()
            .into_iter()
            .min_by(|a, b| ((*a as f64 - v).abs()).total_cmp(&(*b as f64 - v).abs()))
            .unwrap_or(0)
    }

    fn round_lp(&self, x: &[f64]) -> Vec<i64> {
        self.inst
            .coef_vars
            .iter()
            .enumerate()
            .map(|(j, &v)| self.nearest_in_domain(j, x[v]))
            .collect()
    }

    /// 1-opt moves plus single-coefficient changes with the intercept refit.
    fn local_search(&mut self) {
        let Some(inc) = &self.incumbent else { return };
        let mut best = inc.coefs.clone();
        let mut best_v = inc.value;
        let domains: Vec<Vec<i64>> = self.inst.domains.iter().map(|d| d.values()).collect();
        let intercept_rows = self.intercept_terms();
        for _sweep in 0..25 {
            let mut improved = false;
            for j in 0..best.len() {
                let mut cand_best: Option<(Vec<i64>, Vec<f64>, f64)> = None;
                for &val in &domains[j] {
                    if val == best[j] {
                        continue;
                    }
                    let mut cand = best.clone();
                    cand[j] = val;
                    let mut tries = vec![cand.clone()];
                    if j != 0 {
                        if let Some(rows) = &intercept_rows {
                            if let Some(b0) = self.refit_intercept(&cand, rows, &domains[0]) {
                                if b0 != cand[0] {
                                    let mut c2 = cand.clone();
                                    c2[0] = b0;
                                    tries.push(c2);
                                }
                            }
                        }
                    }
                    for c in tries {
                        if let Some((x, v)) = self.evaluate(&c) {
                            let cur = cand_best.as_ref().map_or(best_v, |t| t.2);
                            if v < cur - 1e-12 {
                                cand_best = Some((c, x, v));
                            }
                        }
                    }
                }
                if let Some((c, x, v)) = cand_best {
                    best = c.clone();
                    best_v = v;
                    self.incumbent = Some(Incumbent { x, coefs: c, value: v });
                    self.history.push((self.nodes, v));
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }

    /// Coefficient of the intercept in each loss row, when every loss row has
    /// a ±1 intercept term.
    fn intercept_terms(&self) -> Option<Vec<f64>> {
        let v0 = *self.inst.coef_vars.first()?;
        self.inst
            .loss_rows
            .iter()
            .map(|&r| {
                self.inst.constraints[r]
                    .terms
                    .iter()
                    .find(|(k, _)| *k == v0)
                    .map(|&(_, a)| a)
                    .filter(|a| a.abs() == 1.0)
            })
            .collect()
    }

    /// Intercept value that maximizes the weight of correctly classified
    /// examples given the other coefficients; ties prefer small magnitude.
    fn refit_intercept(&self, coefs: &[i64], a0: &[f64], values: &[i64]) -> Option<i64> {
        let mut c = coefs.to_vec();
        c[0] = 0;
        let partial = self.inst.margins(&c);
        let gamma = self.inst.meta.gamma;
        let k = values.len();
        let mut diff = vec![0.0; k + 1];
        for (i, &r) in partial.iter().enumerate() {
            let w = self.inst.objective[self.inst.loss_vars[i]];
            // correct iff r + a·λ0 ≥ γ − 1e-9
            let need = gamma - 1e-9 - r;
            let (lo_idx, hi_idx) = if a0[i] > 0.0 {
                (values.partition_point(|&v| (v as f64) < need), k)
            } else {
                (0, values.partition_point(|&v| (v as f64) <= -need))
            };
            if lo_idx < hi_idx {
                diff[lo_idx] += w;
                diff[hi_idx] -= w;
            }
        }
        let mut acc = 0.0;
        let mut best: Option<(usize, f64)> = None;
        for idx in 0..k {
            acc += diff[idx];
            let better = match best {
                None => true,
                Some((bi, bv)) => acc > bv + 1e-15 || (acc > bv - 1e-15 && values[idx].abs() < values[bi].abs()),
            };
            if better {
                best = Some((idx, acc));
            }
        }
        best.map(|(i, _)| values[i])
    }

    /// Activity-based bound tightening on integer variables. Returns false if
    /// some row cannot be satisfied.
    fn propagate(&self, lo: &mut [f64], hi: &mut [f64]) -> bool {
        for _pass in 0..4 {
            let mut changed = false;
            for row in &self.inst.constraints {
                let (mut mn, mut mx) = (0.0, 0.0);
                for &(k, a) in &row.terms {
                    let (p, q) = (a * lo[k], a * hi[k]);
                    mn += p.min(q);
                    mx += p.max(q);
                }
                let tol = 1e-9 * (1.0 + row.rhs.abs());
                let le = matches!(row.sense, Sense::Le | Sense::Eq);
                let ge = matches!(row.sense, Sense::Ge | Sense::Eq);
                if (le && mn > row.rhs + tol) || (ge && mx < row.rhs - tol) {
                    return false;
                }
                for &(k, a) in &row.terms {
                    if !self.is_int[k] || lo[k] == hi[k] {
                        continue;
                    }
                    let (p, q) = (a * lo[k], a * hi[k]);
                    let (own_min, own_max) = (p.min(q), p.max(q));
                    if le {
                        // a·x_k ≤ rhs − (mn − own_min)
                        let cap = row.rhs - (mn - own_min);
                        if a > 0.0 {
                            let nh = (cap / a + INT_TOL).floor();
                            if nh < hi[k] {
                                hi[k] = nh;
                                changed = true;
                            }
                        } else {
                            let nl = (cap / a - INT_TOL).ceil();
                            if nl > lo[k] {
                                lo[k] = nl;
                                changed = true;
                            }
                        }
                    }
                    if ge {
                        let floor_v = row.rhs - (mx - own_max);
                        if a > 0.0 {
                            let nl = (floor_v / a - INT_TOL).ceil();
                            if nl > lo[k] {
                                lo[k] = nl;
                                changed = true;
                            }
                        } else {
                            let nh = (floor_v / a + INT_TOL).floor();
                            if nh < hi[k] {
                                hi[k] = nh;
                                changed = true;
                            }
                        }
                    }
                    if lo[k] > hi[k] {
                        return false;
                    }
                    // keep the running activity consistent with the new box
                    let (p2, q2) = (a * lo[k], a * hi[k]);
                    mn += p2.min(q2) - own_min;
                    mx += p2.max(q2) - own_max;
                }
            }
            if !changed {
                break;
            }
        }
        true
    }

    fn node_bounds(&self, branch: &Option<Rc<Link>>) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.root_lo.clone();
        let mut hi = self.root_hi.clone();
        let mut cur = branch.clone();
        while let Some(link) = cur {
            lo[link.var] = lo[link.var].max(link.lo);
            hi[link.var] = hi[link.var].min(link.hi);
            cur = link.parent.clone();
        }
        (lo, hi)
    }

    fn choose_branch(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(u8, f64, f64, usize)> = None;
        for (k, var) in self.inst.variables.iter().enumerate() {
            if !self.is_int[k] {
                continue;
            }
            let f = x[k] - x[k].floor();
            if f < INT_TOL || f > 1.0 - INT_TOL {
                continue;
            }
            let class = var.role.branch_class();
            let closeness = (f - 0.5).abs();
            let cost = self.inst.objective[k].abs();
            let key = (class, closeness, -cost, k);
            let better = match best {
                None => true,
                Some(b) => {
                    (key.0, key.1, key.2, key.3)
                        .partial_cmp(&(b.0, b.1, b.2, b.3))
                        .map_or(false, |o| o == Ordering::Less)
                }
            };
            if better {
                best = Some(key);
            }
        }
        best.map(|b| b.3)
    }
}

/// Solves an integer program exactly (up to the gap tolerance) or until the
/// budget runs out.
pub fn branch_and_bound(instance: &IpInstance, opts: &SolveOptions) -> SolveResult {
    let start = Instant::now();
    let root_lo: Vec<f64> = instance.variables.iter().map(|v| v.lo).collect();
    let root_hi: Vec<f64> = instance.variables.iter().map(|v| v.hi).collect();
    let is_int: Vec<bool> = instance.variables.iter().map(|v| v.kind.is_integer()).collect();
    let mut eng = Engine {
        inst: instance,
        opts,
        root_lo: root_lo.clone(),
        root_hi: root_hi.clone(),
        is_int,
        incumbent: None,
        history: Vec::new(),
        nodes: 0,
        trace: Vec::new(),
    };
    let root_problem = LpProblem::relaxation(instance);
    let mut lp = Simplex::new(&root_problem);
    let mut lp_lo = root_lo.clone();
    let mut lp_hi = root_hi.clone();
    let mut lp_iterations = 0;

    eng.offer(vec![0; instance.coef_vars.len()]);

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: 0,
        depth: 0,
        branch: None,
    });
    let mut next_id = 1;
    let mut global_lb = f64::NEG_INFINITY;
    let mut bound_history = Vec::new();
    let mut dive: Option<Node> = None;
    let mut exhausted = false;

    loop {
        global_lb = global_lb.max(open_min(&heap, &dive).min(eng.inc_value()));
        bound_history.push(global_lb);
        let from_dive = dive.is_some();
        let node = match dive.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if node.bound >= eng.prune_threshold() {
            continue;
        }
        if opts.node_limit.is_some_and(|l| eng.nodes >= l) || opts.time_limit.is_some_and(|t| start.elapsed() >= t) {
            heap.push(node);
            exhausted = true;
            break;
        }
        eng.nodes += 1;
        let depth = node.depth;
        let (mut lo, mut hi) = eng.node_bounds(&node.branch);
        if !eng.propagate(&mut lo, &mut hi) {
            eng.record(depth, node.bound, "infeasible-propagation".into());
            continue;
        }
        for k in 0..lo.len() {
            if lo[k] != lp_lo[k] || hi[k] != lp_hi[k] {
                lp.set_bounds(k, lo[k], hi[k]);
                lp_lo[k] = lo[k];
                lp_hi[k] = hi[k];
            }
        }
        let before = lp.solution().iterations;
        let mut status = lp.solve();
        if status == LpStatus::IterationLimit {
            let mut fresh = Simplex::new(&root_problem);
            for k in 0..lo.len() {
                fresh.set_bounds(k, lo[k], hi[k]);
            }
            status = fresh.solve();
            lp = fresh;
        }
        lp_iterations += lp.solution().iterations.saturating_sub(before);
        let bound;
        let x: Vec<f64>;
        match status {
            LpStatus::Optimal => {
                bound = lp.objective().max(node.bound);
                x = lp.values().to_vec();
            }
            LpStatus::Infeasible => {
                eng.record(depth, node.bound, "infeasible-lp".into());
                continue;
            }
            _ => {
                // no usable bound: branch on the middle of some free integer variable
                bound = node.bound;
                x = (0..lo.len()).map(|k| 0.5 * (lo[k] + hi[k])).collect();
            }
        }
        if depth == 0 {
            global_lb = bound;
        }
        if bound >= eng.prune_threshold() {
            eng.record(depth, bound, "prune-bound".into());
            continue;
        }
        let rounded = eng.round_lp(&x);
        eng.offer(rounded);

        let Some(k) = eng.choose_branch(&x) else {
            let coefs = instance.coefficients_of(&x);
            if !eng.offer(coefs) && status == LpStatus::Optimal && instance.is_feasible(&x, FEAS_TOL) {
                let v = instance.objective_value(&x);
                if v < eng.inc_value() - 1e-12 {
                    let coefs = instance.coefficients_of(&x);
                    eng.incumbent = Some(Incumbent { x: x.clone(), coefs, value: v });
                    eng.history.push((eng.nodes, v));
                }
            }
            eng.record(depth, bound, "integral".into());
            continue;
        };
        if bound >= eng.prune_threshold() {
            eng.record(depth, bound, "prune-bound".into());
            continue;
        }
        let v = x[k];
        let down = Node {
            bound,
            id: next_id,
            depth: depth + 1,
            branch: Some(Rc::new(Link {
                var: k,
                lo: lo[k],
                hi: v.floor(),
                parent: node.branch.clone(),
            })),
        };
        let up = Node {
            bound,
            id: next_id + 1,
            depth: depth + 1,
            branch: Some(Rc::new(Link {
                var: k,
                lo: v.ceil(),
                hi: hi[k],
                parent: node.branch.clone(),
            })),
        };
        next_id += 2;
        eng.record(depth, bound, format!("branch {}={v:.6}", instance.variables[k].name));
        let diving = from_dive
            || eng.incumbent.is_none()
            || (opts.plunge_every > 0 && eng.nodes % opts.plunge_every == 0);
        let prefer_up = v - v.floor() >= 0.5;
        let (first, second) = if prefer_up { (up, down) } else { (down, up) };
        if diving {
            heap.push(second);
            dive = Some(first);
        } else {
            heap.push(first);
            heap.push(second);
        }
    }

    let inc = eng.inc_value();
    let lower_bound = if exhausted {
        global_lb.max(open_min(&heap, &dive).min(inc)).min(inc)
    } else if eng.incumbent.is_some() {
        inc
    } else {
        f64::INFINITY
    };
    let (status, gap) = match (&eng.incumbent, exhausted) {
        (Some(_), false) => (SolveStatus::Optimal, 0.0),
        (Some(_), true) => {
            let gap = ((inc - lower_bound) / inc.abs().max(1e-10)).max(0.0);
            if gap <= opts.gap_tolerance {
                (SolveStatus::Optimal, gap)
            } else {
                (SolveStatus::FeasibleBudgetExhausted, gap)
            }
        }
        (None, false) => (SolveStatus::Infeasible, f64::INFINITY),
        (None, true) => (SolveStatus::NoIncumbent, f64::INFINITY),
    };
    let incumbent = eng.incumbent.take();
    SolveResult {
        status,
        objective: incumbent.as_ref().map(|i| i.value),
        solution: incumbent.map(|i| i.x),
        lower_bound,
        gap,
        nodes: eng.nodes,
        wall_time: start.elapsed().as_secs_f64(),
        lp_iterations,
        incumbent_history: eng.history,
        bound_history,
        trace: eng.trace,
    }
}

fn open_min(heap: &BinaryHeap<Node>, dive: &Option<Node>) -> f64 {
    heap.peek()
        .map(|n| n.bound)
        .into_iter()
        .chain(dive.iter().map(|n| n.bound))
        .fold(f64::INFINITY, f64::min)
}
