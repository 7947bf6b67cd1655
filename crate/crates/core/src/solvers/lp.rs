//! Dense two-phase simplex with Bland's rule, sized for the relaxations in
//! the penalty method (a few hundred columns, a few dozen rows).

use super::Problem;
use crate::error::{invalid, Error, Result};
use crate::strategy::CONSTRAINT_COUNT;

const EPS: f64 = 1e-10;

/// `min cᵀx` subject to `A_le x ≤ b_le`, `A_eq x = b_eq`, `x ≥ 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub le: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Change of the optimum per unit increase of each `≤` right-hand side
    /// (non-positive).
    pub le_duals: Vec<f64>,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>) -> Self {
        LinearProgram { cost, ..Default::default() }
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.le.push((row, rhs));
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq.push((row, rhs));
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.cost.len();
        for (row, _) in self.le.iter().chain(&self.eq) {
            if row.len() != n {
                return Err(invalid("lp", format!("row has {} coefficients, expected {n}", row.len())));
            }
        }
        Tableau::new(self).solve()
    }
}

/// Linear relaxation of a strategy-selection problem with variables laid out
/// class after class. Budget rows are scaled by their capacity; rows that no
/// choice can violate are left out.
pub(crate) struct Relaxation {
    pub lp: LinearProgram,
    /// Budget index and scale factor of every `≤` row.
    pub rows: Vec<(usize, f64)>,
}

impl Relaxation {
    pub fn new(problem: &Problem, cost: Vec<f64>) -> Self {
        let n = cost.len();
        let mut lp = LinearProgram::new(cost);
        let mut rows = Vec::new();
        for d in 0..CONSTRAINT_COUNT {
            let cap = problem.capacity[d];
            let scale = if cap > 0.0 { 1.0 / cap } else { 1.0 };
            let most: f64 = problem.classes.iter().map(|c| c.iter().map(|it| it.cons[d]).fold(0.0, f64::max)).sum();
            if most <= cap {
                continue;
            }
            lp.add_le(problem.classes.iter().flatten().map(|it| it.cons[d] * scale).collect(), cap * scale);
            rows.push((d, scale));
        }
        let mut offset = 0;
        for class in &problem.classes {
            let mut row = vec![0.0; n];
            row[offset..offset + class.len()].fill(1.0);
            lp.add_eq(row, 1.0);
            offset += class.len();
        }
        Relaxation { lp, rows }
    }

    /// Splits a flat solution back into classes, clamped to `[0, 1]`.
    pub fn unflatten(problem: &Problem, flat: &[f64]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(problem.count());
        let mut offset = 0;
        for class in &problem.classes {
            out.push(flat[offset..offset + class.len()].iter().map(|v| v.clamp(0.0, 1.0)).collect());
            offset += class.len();
        }
        out
    }
}

struct Tableau {
    // m constraint rows followed by the objective row; last column is the rhs
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n: usize,
    // first artificial column
    art: usize,
    cost: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.cost.len();
        let m_le = lp.le.len();
        let m = m_le + lp.eq.len();
        let rows: Vec<(&Vec<f64>, f64, Option<usize>)> = lp
            .le
            .iter()
            .enumerate()
            .map(|(i, (r, b))| (r, *b, Some(i)))
            .chain(lp.eq.iter().map(|(r, b)| (r, *b, None)))
            .collect();
        // artificial for every equality and every ≤ row with negative rhs
        let needs_art: Vec<bool> = rows.iter().map(|(_, b, s)| s.is_none() || *b < 0.0).collect();
        let n_art = needs_art.iter().filter(|&&a| a).count();
        let art = n + m_le;
        let width = art + n_art + 1;
        let mut t = vec![vec![0.0; width]; m + 1];
        let mut basis = vec![0; m];
        let mut next_art = art;
        for (i, (row, b, slack)) in rows.iter().enumerate() {
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            for (c, &a) in row.iter().enumerate() {
                t[i][c] = sign * a;
            }
            if let Some(s) = slack {
                t[i][n + s] = sign;
            }
            t[i][width - 1] = sign * b;
            if needs_art[i] {
                t[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            } else {
                basis[i] = n + slack.unwrap();
            }
        }
        Tableau { t, basis, n, art, cost: lp.cost.clone(), pivots: 0 }
    }

    fn width(&self) -> usize {
        self.t[0].len()
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    // reduced-cost row for cost vector `c` over all columns
    fn set_objective(&mut self, c: &[f64]) {
        let w = self.width();
        let m = self.m();
        let mut obj = vec![0.0; w];
        obj[..c.len()].copy_from_slice(c);
        for i in 0..m {
            let cb = obj_coef(c, self.basis[i]);
            if cb != 0.0 {
                for col in 0..w {
                    obj[col] -= cb * self.t[i][col];
                }
            }
        }
        self.t[m] = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let w = self.width();
        let p = self.t[r][c];
        for col in 0..w {
            self.t[r][col] /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for col in 0..w {
                    row[col] -= f * pivot_row[col];
                }
            }
        }
        self.basis[r] = c;
    }

    // Bland: lowest-index improving column, lowest-index basic variable on ties.
    fn iterate(&mut self, allowed: usize) -> Result<()> {
        let m = self.m();
        let rhs = self.width() - 1;
        loop {
            let Some(c) = (0..allowed).find(|&c| self.t[m][c] < -EPS) else { return Ok(()) };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..m {
                let a = self.t[i][c];
                if a > EPS {
                    let ratio = self.t[i][rhs] / a;
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => ratio < r - EPS || (ratio <= r + EPS && self.basis[i] < b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = best else {
                return Err(Error::Infeasible("linear program is unbounded".into()));
            };
            self.pivot(r, c);
        }
    }

    fn solve(mut self) -> Result<LpSolution> {
        let m = self.m();
        let w = self.width();
        let rhs = w - 1;
        if self.art < rhs {
            let phase1: Vec<f64> = (0..rhs).map(|c| if c >= self.art { 1.0 } else { 0.0 }).collect();
            self.set_objective(&phase1);
            self.iterate(rhs)?;
            if -self.t[m][rhs] > 1e-8 * (1.0 + self.t.iter().take(m).map(|r| r[rhs].abs()).fold(0.0, f64::max)) {
                return Err(Error::Infeasible("linear program has no feasible point".into()));
            }
            // drive remaining artificials out of the basis where possible
            for i in 0..m {
                if self.basis[i] >= self.art {
                    if let Some(c) = (0..self.art).find(|&c| self.t[i][c].abs() > EPS) {
                        self.pivot(i, c);
                    }
                }
            }
        }
        let cost = std::mem::take(&mut self.cost);
        self.set_objective(&cost);
        // artificials may not re-enter
        self.iterate(self.art)?;
        let mut x = vec![0.0; self.n];
        for i in 0..m {
            if self.basis[i] < self.n {
                x[self.basis[i]] = self.t[i][rhs];
            }
        }
        let objective = x.iter().zip(&cost).map(|(a, b)| a * b).sum();
        // the reduced cost of a slack is minus the dual of its row
        let le_duals = (0..self.art - self.n).map(|s| -self.t[m][self.n + s]).collect();
        Ok(LpSolution { x, objective, le_duals, pivots: self.pivots })
    }
}

fn obj_coef(c: &[f64], col: usize) -> f64 {
    c.get(col).copied().unwrap_or(0.0)
}
