//! Solvers for the strategy-selection knapsack: pick one strategy per
//! viewpoint so that the popularity-weighted reliability is maximal under
//! three cache, three energy and one backhaul budget.

pub mod baseline;
pub mod bfbb;
pub mod bound;
pub mod brute;
pub mod dcp;
pub mod heuristic;
pub mod instances;
pub mod lp;

use crate::strategy::{Assignment, StrategyTable, CONSTRAINT_COUNT};
use std::time::Duration;

pub use baseline::{baseline, greedy_baseline, BaselineKind};
pub use bfbb::solve_bfbb;
pub use bound::upper_bound_relaxed;
pub use brute::solve_bruteforce;
pub use dcp::{solve_dcp, DcpOptions};
pub use heuristic::heuristic_lower_bound;

/// A strategy of one viewpoint reduced to value and resource use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub strategy: usize,
    /// `p_j R_jk`.
    pub value: f64,
    pub cons: [f64; CONSTRAINT_COUNT],
    /// Sum of all seven consumptions.
    pub weight: f64,
}

impl Item {
    /// Value per unit of aggregate weight; weightless items rank first.
    pub fn ratio(&self) -> f64 {
        if self.weight > 0.0 {
            self.value / self.weight
        } else {
            f64::INFINITY
        }
    }
}

/// Solver view of a strategy table: usable items per viewpoint, ascending by
/// strategy index.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub classes: Vec<Vec<Item>>,
    pub capacity: [f64; CONSTRAINT_COUNT],
}

impl Problem {
    pub fn new(table: &StrategyTable) -> Self {
        let classes = (0..table.count())
            .map(|j| {
                table
                    .allowed_strategies(j)
                    .map(|k| {
                        let cons = table.consumption(j, k);
                        Item { strategy: k, value: table.value(j, k), cons, weight: cons.iter().sum() }
                    })
                    .collect()
            })
            .collect();
        Problem { classes, capacity: table.capacity }
    }

    pub fn count(&self) -> usize {
        self.classes.len()
    }

    /// Sum of all seven budgets.
    pub fn aggregate_capacity(&self) -> f64 {
        self.capacity.iter().sum()
    }

    pub(crate) fn item(&self, j: usize, k: usize) -> &Item {
        self.classes[j].iter().find(|it| it.strategy == k).expect("strategy is allowed")
    }
}

/// Resource use of a choice vector, summed in viewpoint order.
pub(crate) fn usage(problem: &Problem, choice: &[usize]) -> [f64; CONSTRAINT_COUNT] {
    let mut used = [0.0; CONSTRAINT_COUNT];
    for (j, &k) in choice.iter().enumerate() {
        add(&mut used, &problem.item(j, k).cons);
    }
    used
}

pub(crate) fn add(used: &mut [f64; CONSTRAINT_COUNT], cons: &[f64; CONSTRAINT_COUNT]) {
    for (u, c) in used.iter_mut().zip(cons) {
        *u += c;
    }
}

pub(crate) fn fits(used: &[f64; CONSTRAINT_COUNT], capacity: &[f64; CONSTRAINT_COUNT]) -> bool {
    used.iter().zip(capacity).all(|(u, c)| c - u >= 0.0)
}

/// A solver's assignment with search statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub assignment: Assignment,
    /// Proven optimal.
    pub optimal: bool,
    /// Search nodes (branch and bound, brute force) or linear programs solved (DCP).
    pub nodes: usize,
    pub iterations: usize,
    pub elapsed: Duration,
}
