//! Exhaustive search, for small instances and as a reference for the other
//! solvers.

use super::{add, fits, Problem, Solution};
use crate::error::{Error, Result};
use crate::strategy::{StrategyTable, CONSTRAINT_COUNT};
use std::time::Instant;

/// Largest number of complete assignments the search will accept.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Depth-first enumeration in ascending strategy order, pruning prefixes
/// that already exceed a budget. Among equal optima the lexicographically
/// smallest choice is returned.
pub fn solve_bruteforce(table: &StrategyTable) -> Result<Solution> {
    let start = Instant::now();
    let problem = Problem::new(table);
    let combinations: f64 = problem.classes.iter().map(|c| c.len() as f64).product();
    if combinations > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { combinations, limit: BRUTE_FORCE_LIMIT });
    }
    let mut search = Search { problem: &problem, choice: Vec::new(), best: None, nodes: 0 };
    search.descend([0.0; CONSTRAINT_COUNT], 0.0);
    let (choice, _) = search.best.ok_or_else(|| Error::Infeasible("no assignment satisfies the budgets".into()))?;
    Ok(Solution {
        assignment: table.evaluate(&choice),
        optimal: true,
        nodes: search.nodes,
        iterations: 0,
        elapsed: start.elapsed(),
    })
}

struct Search<'a> {
    problem: &'a Problem,
    choice: Vec<usize>,
    best: Option<(Vec<usize>, f64)>,
    nodes: usize,
}

impl Search<'_> {
    fn descend(&mut self, used: [f64; CONSTRAINT_COUNT], value: f64) {
        self.nodes += 1;
        let j = self.choice.len();
        if j == self.problem.count() {
            if self.best.as_ref().is_none_or(|b| value > b.1) {
                self.best = Some((self.choice.clone(), value));
            }
            return;
        }
        for it in &self.problem.classes[j] {
            let mut u = used;
            add(&mut u, &it.cons);
            // consumptions are non-negative, so an overrun prefix stays overrun
            if !fits(&u, &self.problem.capacity) {
                continue;
            }
            self.choice.push(it.strategy);
            self.descend(u, value + it.value);
            self.choice.pop();
        }
    }
}
