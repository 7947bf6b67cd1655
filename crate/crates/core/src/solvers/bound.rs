//! Upper bounds from the linear relaxation of a single-constraint
//! multiple-choice knapsack.
//!
//! With one coupling constraint the relaxation is solved exactly by taking
//! the lightest item of every class and then adding the edges of each class's
//! upper convex hull in order of decreasing slope, the last one fractionally.

use super::lp::Relaxation;
use super::{Item, Problem};
use crate::strategy::CONSTRAINT_COUNT;
use std::cmp::Ordering;

/// Relaxation bound over the aggregate weights `ϖ` with capacity `capacity`.
/// Returns 0 when even the lightest items do not fit.
pub fn upper_bound_relaxed(classes: &[Vec<Item>], capacity: f64) -> f64 {
    let table = Suffix::build(classes.iter().map(|c| c.iter().map(|it| (it.weight, it.value)).collect()));
    table.eval(capacity, 0.0).unwrap_or(0.0)
}

// Base point and hull edges (Δw > 0, Δv > 0) in order of decreasing slope.
fn hull(points: &mut [(f64, f64)]) -> ((f64, f64), Vec<(f64, f64)>) {
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut stack: Vec<(f64, f64)> = vec![points[0]];
    for &p in &points[1..] {
        if p.1 <= stack.last().unwrap().1 || p.0 == stack.last().unwrap().0 {
            continue;
        }
        while stack.len() >= 2 {
            let (a, b) = (stack[stack.len() - 2], stack[stack.len() - 1]);
            if (b.1 - a.1) * (p.0 - b.0) <= (p.1 - b.1) * (b.0 - a.0) {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(p);
    }
    let edges = stack.windows(2).map(|w| (w[1].0 - w[0].0, w[1].1 - w[0].1)).collect();
    (stack[0], edges)
}

/// Relaxation data for a fixed set of classes under one constraint.
#[derive(Debug, Clone, Default)]
pub(crate) struct Suffix {
    base_w: f64,
    base_v: f64,
    cum_w: Vec<f64>,
    cum_v: Vec<f64>,
    slope: Vec<f64>,
}

impl Suffix {
    fn build(classes: impl Iterator<Item = Vec<(f64, f64)>>) -> Self {
        let mut s = Suffix::default();
        let mut edges = Vec::new();
        for mut pts in classes {
            let (base, e) = hull(&mut pts);
            s.base_w += base.0;
            s.base_v += base.1;
            edges.extend(e);
        }
        edges.sort_by(|a, b| (b.1 * a.0).partial_cmp(&(a.1 * b.0)).unwrap_or(Ordering::Equal));
        let (mut w, mut v) = (0.0, 0.0);
        for (dw, dv) in edges {
            w += dw;
            v += dv;
            s.cum_w.push(w);
            s.cum_v.push(v);
            s.slope.push(dv / dw);
        }
        s
    }

    /// Relaxation optimum for capacity `cap`; `None` if the lightest items
    /// exceed it by more than `tol`.
    pub(crate) fn eval(&self, cap: f64, tol: f64) -> Option<f64> {
        if self.base_w > cap + tol {
            return None;
        }
        let r = (cap - self.base_w).max(0.0);
        let n = self.cum_w.partition_point(|&w| w <= r);
        let (w_full, v_full) = if n == 0 { (0.0, 0.0) } else { (self.cum_w[n - 1], self.cum_v[n - 1]) };
        let frac = if n < self.slope.len() { (r - w_full) * self.slope[n] } else { 0.0 };
        Some(self.base_v + v_full + frac)
    }
}

/// Lagrangian bound `Σ_j max_k (v_jk − λ·a_jk) + λ·(C − used)` with fixed
/// multipliers; any `λ ≥ 0` gives a valid bound, and the duals of the full
/// linear relaxation make it as tight as that relaxation at the root.
#[derive(Debug, Clone)]
pub(crate) struct Lagrangian {
    lambda: [f64; CONSTRAINT_COUNT],
    // [first free viewpoint]
    suffix: Vec<f64>,
}

impl Lagrangian {
    pub(crate) fn new(problem: &Problem, lambda: [f64; CONSTRAINT_COUNT]) -> Self {
        let lambda = lambda.map(|l| l.max(0.0));
        let mut suffix = vec![0.0; problem.count() + 1];
        for j in (0..problem.count()).rev() {
            let best = problem.classes[j]
                .iter()
                .map(|it| it.value - (0..CONSTRAINT_COUNT).map(|d| lambda[d] * it.cons[d]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            suffix[j] = suffix[j + 1] + best;
        }
        Lagrangian { lambda, suffix }
    }

    /// Multipliers from the linear relaxation of the whole problem.
    pub(crate) fn from_relaxation(problem: &Problem) -> Option<Self> {
        Some(Lagrangian::new(problem, relaxation_multipliers(problem)?))
    }

    /// Multipliers from the relaxation of viewpoints `depth..` with the
    /// budgets left after `used`.
    pub(crate) fn for_subtree(problem: &Problem, depth: usize, used: &[f64; CONSTRAINT_COUNT]) -> Option<Self> {
        let mut capacity = problem.capacity;
        for d in 0..CONSTRAINT_COUNT {
            capacity[d] = (capacity[d] - used[d]).max(0.0);
        }
        let sub = Problem { classes: problem.classes[depth..].to_vec(), capacity };
        Some(Lagrangian::new(problem, relaxation_multipliers(&sub)?))
    }

    pub(crate) fn bound(&self, depth: usize, capacity: &[f64; CONSTRAINT_COUNT], used: &[f64; CONSTRAINT_COUNT]) -> f64 {
        let mut b = self.suffix[depth];
        for d in 0..CONSTRAINT_COUNT {
            b += self.lambda[d] * (capacity[d] - used[d]);
        }
        b
    }
}

fn relaxation_multipliers(problem: &Problem) -> Option<[f64; CONSTRAINT_COUNT]> {
    let cost = problem.classes.iter().flatten().map(|it| -it.value).collect();
    let relax = Relaxation::new(problem, cost);
    let sol = relax.lp.solve().ok()?;
    let mut lambda = [0.0; CONSTRAINT_COUNT];
    for (&(d, scale), y) in relax.rows.iter().zip(&sol.le_duals) {
        lambda[d] = -y * scale;
    }
    Some(lambda)
}

/// Bounds for every suffix of viewpoints under each budget row and under the
/// aggregate weight, tightened by a Lagrangian bound when available.
#[derive(Debug, Clone)]
pub(crate) struct SuffixBounds {
    // [dimension][first free viewpoint]
    tables: Vec<Vec<Suffix>>,
    tol: [f64; CONSTRAINT_COUNT + 1],
    lagrangian: Option<Lagrangian>,
}

impl SuffixBounds {
    pub(crate) fn new(problem: &Problem) -> Self {
        let j = problem.count();
        let mut tables = Vec::with_capacity(CONSTRAINT_COUNT + 1);
        for d in 0..=CONSTRAINT_COUNT {
            let key = |it: &Item| if d == CONSTRAINT_COUNT { it.weight } else { it.cons[d] };
            let per_depth = (0..=j)
                .map(|s| Suffix::build(problem.classes[s..].iter().map(|c| c.iter().map(|it| (key(it), it.value)).collect())))
                .collect();
            tables.push(per_depth);
        }
        let mut tol = [0.0; CONSTRAINT_COUNT + 1];
        for d in 0..CONSTRAINT_COUNT {
            tol[d] = 1e-9 * problem.capacity[d].abs();
        }
        tol[CONSTRAINT_COUNT] = 1e-9 * problem.aggregate_capacity().abs();
        SuffixBounds { tables, tol, lagrangian: Lagrangian::from_relaxation(problem) }
    }

    /// Upper bound on the value obtainable from viewpoints `depth..` given
    /// the resources already used; `None` if no completion can fit.
    pub(crate) fn bound(&self, depth: usize, capacity: &[f64; CONSTRAINT_COUNT], used: &[f64; CONSTRAINT_COUNT]) -> Option<f64> {
        let mut best = f64::INFINITY;
        let mut agg_rem = 0.0;
        for d in 0..CONSTRAINT_COUNT {
            let rem = capacity[d] - used[d];
            agg_rem += rem;
            best = best.min(self.tables[d][depth].eval(rem, self.tol[d])?);
        }
        best = best.min(self.tables[CONSTRAINT_COUNT][depth].eval(agg_rem, self.tol[CONSTRAINT_COUNT])?);
        if let Some(l) = &self.lagrangian {
            best = best.min(l.bound(depth, capacity, used));
        }
        Some(best)
    }
}
