//! Best-first branch and bound over viewpoints in index order.
//!
//! A node fixes the strategies of the first `depth` viewpoints. Its priority
//! is the fixed value plus a relaxation bound on the rest; the incumbent
//! starts from the greedy heuristic and is refreshed by a greedy completion
//! of every expanded node. Expanding a node solves the linear relaxation of
//! its subtree, whose duals bound the children.

use super::bound::{Lagrangian, SuffixBounds};
use super::heuristic::{greedy_completion, lower_bound};
use super::{add, fits, usage, Problem, Solution};
use crate::error::{Error, Result};
use crate::strategy::{StrategyTable, CONSTRAINT_COUNT};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

// Nodes whose bound exceeds the incumbent by less than this are pruned.
const PRUNE_EPS: f64 = 1e-13;
// Subtrees with at most this many free viewpoints are enumerated.
const TAIL: usize = 3;

#[derive(Debug, Clone)]
struct Node {
    priority: f64,
    value: f64,
    used: [f64; CONSTRAINT_COUNT],
    choice: Vec<usize>,
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
    // highest priority first, then deeper, then lexicographically smaller
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then(self.choice.len().cmp(&other.choice.len()))
            .then_with(|| other.choice.cmp(&self.choice))
    }
}

/// Exact solution unless `time_limit` runs out first, in which case the best
/// assignment found so far is returned with `optimal == false`.
pub fn solve_bfbb(table: &StrategyTable, time_limit: Option<Duration>) -> Result<Solution> {
    let start = Instant::now();
    let problem = Problem::new(table);
    if problem.classes.iter().any(|c| c.is_empty()) {
        return Err(Error::Infeasible("a viewpoint has no usable strategy".into()));
    }
    let n = problem.count();
    let bounds = SuffixBounds::new(&problem);
    let zero = [0.0; CONSTRAINT_COUNT];
    let Some(root_bound) = bounds.bound(0, &problem.capacity, &zero) else {
        return Err(Error::Infeasible("the lightest strategies already exceed a budget".into()));
    };

    let mut incumbent: Option<(Vec<usize>, f64)> = lower_bound(&problem, &[]).map(|c| {
        let v = value_of(&problem, &c);
        (c, v)
    });
    let lb = |inc: &Option<(Vec<usize>, f64)>| inc.as_ref().map_or(f64::NEG_INFINITY, |b| b.1);

    let mut tail = Tail::new(&problem);
    let mut heap = BinaryHeap::new();
    heap.push(Node { priority: root_bound, value: 0.0, used: zero, choice: Vec::new() });
    let mut nodes = 0usize;
    let mut optimal = true;

    while let Some(node) = heap.pop() {
        if time_limit.is_some_and(|t| start.elapsed() >= t) {
            optimal = false;
            break;
        }
        if node.priority <= lb(&incumbent) + PRUNE_EPS && incumbent.is_some() {
            continue;
        }
        nodes += 1;
        let depth = node.choice.len();
        if depth == n {
            // its value equals its priority, so nothing left can beat it
            if node.value > lb(&incumbent) {
                incumbent = Some((node.choice, node.value));
            }
            break;
        }
        if n - depth <= TAIL {
            // replace the subtree by its best leaf
            if let Some((choice, value, used)) = tail.search(&node.choice, node.value, node.used, lb(&incumbent)) {
                incumbent = Some((choice.clone(), value));
                heap.push(Node { priority: value, value, used, choice });
            }
            continue;
        }
        // multipliers of this subtree's own relaxation tighten the bounds
        let lag = if depth + 1 < n { Lagrangian::for_subtree(&problem, depth, &node.used) } else { None };
        if let (Some(l), Some(_)) = (&lag, &incumbent) {
            if node.value + l.bound(depth, &problem.capacity, &node.used) <= lb(&incumbent) + PRUNE_EPS {
                continue;
            }
        }
        if let Some(c) = greedy_completion(&problem, &node.choice) {
            let v = value_of(&problem, &c);
            if v > lb(&incumbent) {
                incumbent = Some((c, v));
            }
        }
        for it in &problem.classes[depth] {
            let mut used = node.used;
            add(&mut used, &it.cons);
            if !fits(&used, &problem.capacity) {
                continue;
            }
            let value = node.value + it.value;
            let rest = if depth + 1 == n { Some(0.0) } else { bounds.bound(depth + 1, &problem.capacity, &used) };
            let Some(mut rest) = rest else { continue };
            if let Some(l) = &lag {
                rest = rest.min(l.bound(depth + 1, &problem.capacity, &used));
            }
            let priority = value + rest;
            if incumbent.is_some() && priority <= lb(&incumbent) + PRUNE_EPS {
                continue;
            }
            let mut choice = node.choice.clone();
            choice.push(it.strategy);
            heap.push(Node { priority, value, used, choice });
        }
    }

    let (choice, _) = incumbent.ok_or_else(|| Error::Infeasible("no assignment satisfies the budgets".into()))?;
    debug_assert!(fits(&usage(&problem, &choice), &problem.capacity));
    Ok(Solution {
        assignment: table.evaluate(&choice),
        optimal,
        nodes,
        iterations: 0,
        elapsed: start.elapsed(),
    })
}

// Best leaf below a node that beats `floor`, by depth-first search cut off
// by the largest values still obtainable; ties keep the first found.
struct Tail<'a> {
    problem: &'a Problem,
    // [j]: sum over viewpoints j.. of their largest value
    top: Vec<f64>,
    choice: Vec<usize>,
    best: Option<(Vec<usize>, f64, [f64; CONSTRAINT_COUNT])>,
    floor: f64,
}

impl<'a> Tail<'a> {
    fn new(problem: &'a Problem) -> Self {
        let mut top = vec![0.0; problem.count() + 1];
        for j in (0..problem.count()).rev() {
            top[j] = top[j + 1] + problem.classes[j].iter().map(|it| it.value).fold(f64::NEG_INFINITY, f64::max);
        }
        Tail { problem, top, choice: Vec::new(), best: None, floor: f64::NEG_INFINITY }
    }

    fn search(&mut self, prefix: &[usize], value: f64, used: [f64; CONSTRAINT_COUNT], floor: f64) -> Option<(Vec<usize>, f64, [f64; CONSTRAINT_COUNT])> {
        self.choice.clear();
        self.choice.extend_from_slice(prefix);
        self.best = None;
        self.floor = floor;
        self.descend(value, used);
        self.best.take()
    }

    fn descend(&mut self, value: f64, used: [f64; CONSTRAINT_COUNT]) {
        let j = self.choice.len();
        if j == self.problem.count() {
            if value > self.floor {
                self.floor = value;
                self.best = Some((self.choice.clone(), value, used));
            }
            return;
        }
        if value + self.top[j] <= self.floor {
            return;
        }
        for it in &self.problem.classes[j] {
            let mut u = used;
            add(&mut u, &it.cons);
            if fits(&u, &self.problem.capacity) {
                self.choice.push(it.strategy);
                self.descend(value + it.value, u);
                self.choice.pop();
            }
        }
    }
}

fn value_of(problem: &Problem, choice: &[usize]) -> f64 {
    choice.iter().enumerate().map(|(j, &k)| problem.item(j, k).value).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::brute::solve_bruteforce;
    use crate::solvers::instances::random_instance;

    #[test]
    fn single_viewpoint_takes_best_fitting() {
        for seed in 0..20 {
            let t = random_instance(seed, 1);
            let Ok(s) = solve_bfbb(&t, None) else { continue };
            let best = (1..=18)
                .filter(|&k| t.evaluate(&[k]).feasible)
                .map(|k| t.value(0, k))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(s.optimal);
            assert_eq!(s.assignment.objective, best);
        }
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut checked = 0;
        for seed in 0..60 {
            let t = random_instance(500 + seed, 1 + (seed as usize % 5));
            match solve_bruteforce(&t) {
                Ok(b) => {
                    let s = solve_bfbb(&t, None).unwrap();
                    assert!(s.optimal && s.assignment.feasible);
                    assert!((s.assignment.objective - b.assignment.objective).abs() <= 1e-12, "seed {seed}");
                    checked += 1;
                }
                Err(Error::Infeasible(_)) => assert!(solve_bfbb(&t, None).is_err()),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(checked >= 30);
    }

    #[test]
    fn zero_time_limit_returns_incumbent() {
        let t = random_instance(9, 12);
        if let Ok(s) = solve_bfbb(&t, Some(Duration::ZERO)) {
            assert!(!s.optimal);
            assert!(s.assignment.feasible);
        }
    }

    // best value of any feasible completion of `prefix`
    fn best_below(p: &Problem, prefix: &mut Vec<usize>, used: [f64; CONSTRAINT_COUNT]) -> Option<f64> {
        let j = prefix.len();
        if j == p.count() {
            return Some(0.0);
        }
        let mut best: Option<f64> = None;
        for it in &p.classes[j] {
            let mut u = used;
            add(&mut u, &it.cons);
            if fits(&u, &p.capacity) {
                prefix.push(it.strategy);
                if let Some(v) = best_below(p, prefix, u) {
                    best = Some(best.map_or(it.value + v, |b: f64| b.max(it.value + v)));
                }
                prefix.pop();
            }
        }
        best
    }

    fn check_prefixes(p: &Problem, bounds: &SuffixBounds, prefix: &mut Vec<usize>, used: [f64; CONSTRAINT_COUNT]) {
        let depth = prefix.len();
        if depth == p.count() {
            return;
        }
        let lag = if depth + 1 < p.count() { Lagrangian::for_subtree(p, depth, &used) } else { None };
        if let (Some(l), Some(opt)) = (&lag, best_below(p, &mut prefix.clone(), used)) {
            assert!(l.bound(depth, &p.capacity, &used) >= opt - 1e-12);
        }
        for it in &p.classes[depth] {
            let mut u = used;
            add(&mut u, &it.cons);
            if !fits(&u, &p.capacity) {
                continue;
            }
            prefix.push(it.strategy);
            if let Some(opt) = best_below(p, &mut prefix.clone(), u) {
                let mut rest = if depth + 1 == p.count() { 0.0 } else { bounds.bound(depth + 1, &p.capacity, &u).unwrap() };
                if let Some(l) = &lag {
                    rest = rest.min(l.bound(depth + 1, &p.capacity, &u));
                }
                assert!(rest >= opt - 1e-12, "prefix {prefix:?}: bound {rest} < {opt}");
            }
            check_prefixes(p, bounds, prefix, u);
            prefix.pop();
        }
    }

    #[test]
    fn priorities_never_undercut_completions() {
        for seed in 0..12 {
            let p = Problem::new(&random_instance(900 + seed, 2 + seed as usize % 3));
            if p.classes.iter().any(|c| c.is_empty()) {
                continue;
            }
            check_prefixes(&p, &SuffixBounds::new(&p), &mut Vec::new(), [0.0; CONSTRAINT_COUNT]);
        }
    }
}
