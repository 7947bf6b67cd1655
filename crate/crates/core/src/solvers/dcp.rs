//! Difference-of-convex penalty method.
//!
//! The binary problem is relaxed to `x ∈ [0,1]` with the concave penalty
//! `φ Σ x(1−x)` added to `−Σ p_j R_jk x_jk`. Each step linearizes the
//! penalty at the current iterate and solves the resulting linear program.
//! The penalty starts at zero, then grows geometrically until the iterate
//! is binary.

use super::heuristic::{lower_bound, repair_and_improve};
use super::lp::{LinearProgram, Relaxation};
use super::{Problem, Solution};
use crate::error::{invalid, Error, Result};
use crate::strategy::StrategyTable;
use std::time::Instant;

/// Iterates closer to binary than this count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
const SUPPORT_TOL: f64 = 1e-9;
const ROUNDING_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct DcpOptions {
    /// Penalty the schedule is built around; `None` uses
    /// `2 · max p_j R_jk · J + 1`.
    pub penalty: Option<f64>,
    /// Stop a penalty level once the penalized objective drops by no more
    /// than this.
    pub epsilon: f64,
    /// Linearizations per penalty level.
    pub max_iters: usize,
    /// Penalty levels below the base penalty; after the unpenalized
    /// relaxation the schedule starts at `φ / 2^warmup`.
    pub warmup: u32,
    /// Doublings allowed beyond the base penalty.
    pub max_doublings: u32,
}

impl Default for DcpOptions {
    fn default() -> Self {
        DcpOptions { penalty: None, epsilon: 1e-5, max_iters: 200, warmup: 24, max_doublings: 10 }
    }
}

/// Penalized objective values of one penalty level, starting with the value
/// at the level's first iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct DcpLevel {
    pub penalty: f64,
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcpResult {
    pub solution: Solution,
    pub trace: Vec<DcpLevel>,
    /// Whether the continuous iterate became binary.
    pub integral: bool,
    /// Final continuous iterate, viewpoint-major over usable strategies.
    pub x: Vec<Vec<f64>>,
}

pub fn default_penalty(table: &StrategyTable) -> f64 {
    let p = Problem::new(table);
    let vmax = p.classes.iter().flatten().map(|it| it.value).fold(0.0, f64::max);
    2.0 * vmax * p.count() as f64 + 1.0
}

fn penalized(problem: &Problem, x: &[Vec<f64>], phi: f64) -> f64 {
    let mut f = 0.0;
    for (class, xs) in problem.classes.iter().zip(x) {
        for (it, &v) in class.iter().zip(xs) {
            f += -it.value * v + phi * v * (1.0 - v);
        }
    }
    f
}

fn nonintegrality(x: &[Vec<f64>]) -> f64 {
    x.iter().flatten().map(|v| v * (1.0 - v)).sum()
}

// Roundings of `x`: every combination of the strategies each viewpoint
// holds with positive weight, heaviest first, when there are at most
// `ROUNDING_LIMIT`; otherwise only the per-viewpoint argmax.
fn roundings(problem: &Problem, x: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let support: Vec<Vec<usize>> = problem
        .classes
        .iter()
        .zip(x)
        .map(|(class, xs)| {
            let mut idx: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] > SUPPORT_TOL).collect();
            if idx.is_empty() {
                idx = (0..xs.len()).collect();
            }
            // stable: ties keep the lower strategy
            idx.sort_by(|&a, &b| xs[b].total_cmp(&xs[a]));
            idx.into_iter().map(|i| class[i].strategy).collect()
        })
        .collect();
    let combos = support.iter().try_fold(1usize, |n, s| n.checked_mul(s.len()).filter(|&n| n <= ROUNDING_LIMIT));
    let Some(combos) = combos else {
        return vec![support.iter().map(|s| s[0]).collect()];
    };
    (0..combos)
        .map(|mut c| {
            support
                .iter()
                .map(|s| {
                    let k = s[c % s.len()];
                    c /= s.len();
                    k
                })
                .collect()
        })
        .collect()
}

fn linearized(problem: &Problem, x: &[Vec<f64>], phi: f64) -> LinearProgram {
    let cost = problem
        .classes
        .iter()
        .zip(x)
        .flat_map(|(class, xs)| class.iter().zip(xs).map(move |(it, &v)| -it.value + phi * (1.0 - 2.0 * v)))
        .collect();
    Relaxation::new(problem, cost).lp
}

/// Runs the penalty schedule from the greedy heuristic's assignment and
/// returns the best binary assignment met on the way: every iterate is
/// rounded, repaired and greedily improved.
pub fn solve_dcp(table: &StrategyTable, opts: &DcpOptions) -> Result<DcpResult> {
    let start = Instant::now();
    if !(opts.epsilon > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    let base = opts.penalty.unwrap_or_else(|| default_penalty(table));
    if !(base > 0.0 && base.is_finite()) {
        return Err(invalid("penalty", "must be positive and finite"));
    }
    let problem = Problem::new(table);
    let init = lower_bound(&problem, &[]).ok_or_else(|| Error::Infeasible("no feasible starting assignment".into()))?;

    let value_of = |c: &[usize]| table.objective(c);
    let mut best = (value_of(&init), init.clone());
    let consider = |x: &[Vec<f64>], best: &mut (f64, Vec<usize>)| {
        for r in roundings(&problem, x) {
            if let Some(c) = repair_and_improve(&problem, &r) {
                let v = value_of(&c);
                if v > best.0 {
                    *best = (v, c);
                }
            }
        }
    };

    let mut x: Vec<Vec<f64>> = problem
        .classes
        .iter()
        .zip(&init)
        .map(|(class, &k)| class.iter().map(|it| if it.strategy == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut trace = Vec::new();
    let mut lps = 0usize;
    let mut integral = false;
    // the plain relaxation first, then a geometric penalty ramp
    let schedule = std::iter::once(0.0)
        .chain((0..=opts.warmup + opts.max_doublings).map(|l| base * 2f64.powi(l as i32 - opts.warmup as i32)));
    for phi in schedule {
        let mut f = penalized(&problem, &x, phi);
        let mut objective = vec![f];
        for _ in 0..opts.max_iters {
            let sol = linearized(&problem, &x, phi).solve()?;
            lps += 1;
            let next = Relaxation::unflatten(&problem, &sol.x);
            let f_next = penalized(&problem, &next, phi);
            consider(&next, &mut best);
            let drop = f - f_next;
            if drop < 0.0 {
                // only rounding noise can raise it; keep the better point
                break;
            }
            x = next;
            f = f_next;
            objective.push(f);
            // without penalty the linearization does not depend on x
            if drop <= opts.epsilon || phi == 0.0 {
                break;
            }
        }
        trace.push(DcpLevel { penalty: phi, objective });
        if nonintegrality(&x) <= INTEGRALITY_TOL {
            integral = true;
            break;
        }
    }

    let assignment = table.evaluate(&best.1);
    debug_assert!(assignment.feasible);
    Ok(DcpResult {
        solution: Solution { assignment, optimal: false, nodes: lps, iterations: lps, elapsed: start.elapsed() },
        trace,
        integral,
        x,
    })
}
