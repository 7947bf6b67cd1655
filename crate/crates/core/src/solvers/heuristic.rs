//! Greedy lower bound based on aggregate resource saving.
//!
//! Starts from the lowest-valued strategy of every viewpoint, upgrades while
//! some upgrade stays within budget, then tries value-increasing swaps that
//! are paid for by downgrading the heaviest other viewpoints.

use super::{add, fits, Item, Problem};
use crate::error::{Error, Result};
use crate::strategy::{Assignment, StrategyTable, CONSTRAINT_COUNT};
use std::cmp::Ordering;

/// The greedy lower bound on the whole table.
pub fn heuristic_lower_bound(table: &StrategyTable) -> Result<Assignment> {
    let problem = Problem::new(table);
    let choice = lower_bound(&problem, &[]).ok_or_else(|| Error::Infeasible("no feasible starting assignment".into()))?;
    Ok(table.evaluate(&choice))
}

/// Upgrades and swaps with the first `fixed.len()` viewpoints pinned to the
/// given strategies. Returns strategy indices.
pub(crate) fn lower_bound(problem: &Problem, fixed: &[usize]) -> Option<Vec<usize>> {
    let mut st = State::start(problem, fixed)?;
    st.upgrade(problem);
    st.swap_phase(problem);
    Some(st.strategies(problem))
}

/// Only the upgrade phase; cheap enough to run at every search node.
pub(crate) fn greedy_completion(problem: &Problem, fixed: &[usize]) -> Option<Vec<usize>> {
    let mut st = State::start(problem, fixed)?;
    st.upgrade(problem);
    Some(st.strategies(problem))
}

/// Makes `choice` (strategy indices) feasible by downgrades, then upgrades
/// it. `None` if no sequence of downgrades reaches feasibility.
pub(crate) fn repair_and_improve(problem: &Problem, choice: &[usize]) -> Option<Vec<usize>> {
    let idx: Vec<usize> = choice
        .iter()
        .enumerate()
        .map(|(j, &k)| problem.classes[j].iter().position(|it| it.strategy == k))
        .collect::<Option<_>>()?;
    let mut st = State::from_items(problem, idx, 0);
    if !st.repair(problem) {
        return None;
    }
    st.upgrade(problem);
    Some(st.strategies(problem))
}

struct State {
    // position within each class
    pick: Vec<usize>,
    used: [f64; CONSTRAINT_COUNT],
    // viewpoints below this index are not changed
    free_from: usize,
}

fn lowest_valued(class: &[Item]) -> usize {
    let mut best = 0;
    for (i, it) in class.iter().enumerate().skip(1) {
        let b = &class[best];
        if it.value < b.value || (it.value == b.value && it.weight < b.weight) {
            best = i;
        }
    }
    best
}

// Overload summed over budgets, each relative to the larger of its budget
// and its largest possible use.
fn exceeds(used: &[f64; CONSTRAINT_COUNT], cap: &[f64; CONSTRAINT_COUNT], scale: &[f64; CONSTRAINT_COUNT]) -> f64 {
    (0..CONSTRAINT_COUNT).map(|d| ((used[d] - cap[d]) / scale[d]).max(0.0)).sum()
}

fn overload_scale(problem: &Problem) -> [f64; CONSTRAINT_COUNT] {
    let mut scale = problem.capacity.map(f64::abs);
    for d in 0..CONSTRAINT_COUNT {
        let most: f64 = problem.classes.iter().map(|c| c.iter().map(|it| it.cons[d]).fold(0.0, f64::max)).sum();
        scale[d] = scale[d].max(most);
        if !(scale[d] > 0.0) {
            scale[d] = 1.0;
        }
    }
    scale
}

impl State {
    fn start(problem: &Problem, fixed: &[usize]) -> Option<State> {
        let mut pick = Vec::with_capacity(problem.count());
        for (j, class) in problem.classes.iter().enumerate() {
            if class.is_empty() {
                return None;
            }
            pick.push(match fixed.get(j) {
                Some(&k) => class.iter().position(|it| it.strategy == k)?,
                None => lowest_valued(class),
            });
        }
        let mut st = State::from_items(problem, pick, fixed.len());
        if !st.feasible(problem) && !st.repair(problem) {
            return None;
        }
        Some(st)
    }

    fn from_items(problem: &Problem, pick: Vec<usize>, free_from: usize) -> State {
        let mut st = State { pick, used: [0.0; CONSTRAINT_COUNT], free_from };
        st.used = st.exact_usage(problem);
        st
    }

    fn strategies(&self, problem: &Problem) -> Vec<usize> {
        self.pick.iter().enumerate().map(|(j, &i)| problem.classes[j][i].strategy).collect()
    }

    fn item<'a>(&self, problem: &'a Problem, j: usize) -> &'a Item {
        &problem.classes[j][self.pick[j]]
    }

    // same summation order as `usage`
    fn exact_usage(&self, problem: &Problem) -> [f64; CONSTRAINT_COUNT] {
        let mut used = [0.0; CONSTRAINT_COUNT];
        for (j, &i) in self.pick.iter().enumerate() {
            add(&mut used, &problem.classes[j][i].cons);
        }
        used
    }

    fn feasible(&self, problem: &Problem) -> bool {
        fits(&self.exact_usage(problem), &problem.capacity)
    }

    fn value(&self, problem: &Problem) -> f64 {
        (0..self.pick.len()).map(|j| self.item(problem, j).value).sum()
    }

    fn used_after(&self, problem: &Problem, j: usize, i: usize) -> [f64; CONSTRAINT_COUNT] {
        let (old, new) = (self.item(problem, j), &problem.classes[j][i]);
        let mut u = self.used;
        for d in 0..CONSTRAINT_COUNT {
            u[d] += new.cons[d] - old.cons[d];
        }
        u
    }

    fn set(&mut self, problem: &Problem, j: usize, i: usize) {
        self.pick[j] = i;
        self.used = self.exact_usage(problem);
    }

    /// Repeatedly applies the upgrade with the largest aggregate saving, or
    /// failing that the best value gain per unit of extra weight.
    fn upgrade(&mut self, problem: &Problem) {
        let mut banned: Vec<(usize, usize)> = Vec::new();
        loop {
            // (saves, score, strategy, viewpoint, item)
            let mut best: Option<(bool, f64, usize, usize, usize)> = None;
            for j in self.free_from..problem.count() {
                let cur = self.item(problem, j);
                for (i, it) in problem.classes[j].iter().enumerate() {
                    let dv = it.value - cur.value;
                    if dv <= 0.0 || banned.contains(&(j, i)) {
                        continue;
                    }
                    if !fits(&self.used_after(problem, j, i), &problem.capacity) {
                        continue;
                    }
                    let saving = cur.weight - it.weight;
                    let cand = if saving > 0.0 {
                        (true, saving, it.strategy, j, i)
                    } else if saving == 0.0 {
                        (false, f64::INFINITY, it.strategy, j, i)
                    } else {
                        (false, dv / -saving, it.strategy, j, i)
                    };
                    if best.is_none_or(|b| better(&cand, &b)) {
                        best = Some(cand);
                    }
                }
            }
            let Some((_, _, _, j, i)) = best else { return };
            let prev = self.pick[j];
            self.set(problem, j, i);
            if !self.feasible(problem) {
                // rounding put it over budget after all
                self.set(problem, j, prev);
                banned.push((j, i));
            } else {
                banned.clear();
            }
        }
    }

    /// Downgrades the heaviest viewpoint to its lightest alternative until
    /// the budgets hold; falls back to the move that most reduces the
    /// relative overload.
    fn repair(&mut self, problem: &Problem) -> bool {
        while !self.feasible(problem) {
            match self.heaviest_downgrade(problem, None, false) {
                Some((j, i)) => self.set(problem, j, i),
                None => break,
            }
        }
        // overload strictly falls, so this ends
        while !self.feasible(problem) {
            let scale = overload_scale(problem);
            let now = exceeds(&self.used, &problem.capacity, &scale);
            let mut best: Option<(f64, f64, usize, usize, usize)> = None;
            for j in self.free_from..problem.count() {
                for (i, it) in problem.classes[j].iter().enumerate() {
                    if i == self.pick[j] {
                        continue;
                    }
                    let prev = std::mem::replace(&mut self.pick[j], i);
                    let e = exceeds(&self.exact_usage(problem), &problem.capacity, &scale);
                    self.pick[j] = prev;
                    if e >= now {
                        continue;
                    }
                    let cand = (e, -it.value, it.strategy, j, i);
                    if best.is_none_or(|b| (cand.0, cand.1, cand.2, cand.3) < (b.0, b.1, b.2, b.3)) {
                        best = Some(cand);
                    }
                }
            }
            match best {
                Some((_, _, _, j, i)) => self.set(problem, j, i),
                None => return false,
            }
        }
        true
    }

    /// Viewpoint (other than `skip`) whose current strategy has the largest
    /// aggregate weight and which has a lighter alternative, together with
    /// its lightest alternative. With `lower_valued`, only alternatives of
    /// lower value count.
    fn heaviest_downgrade(&self, problem: &Problem, skip: Option<usize>, lower_valued: bool) -> Option<(usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for j in self.free_from..problem.count() {
            if Some(j) == skip {
                continue;
            }
            let cur = self.item(problem, j);
            let mut alt: Option<usize> = None;
            for (i, it) in problem.classes[j].iter().enumerate() {
                if it.weight >= cur.weight || (lower_valued && it.value >= cur.value) {
                    continue;
                }
                let take = match alt {
                    None => true,
                    Some(a) => {
                        let a = &problem.classes[j][a];
                        it.weight < a.weight || (it.weight == a.weight && it.value > a.value)
                    }
                };
                if take {
                    alt = Some(i);
                }
            }
            if let Some(i) = alt {
                if best.is_none_or(|b| cur.weight > b.0) {
                    best = Some((cur.weight, j, i));
                }
            }
        }
        best.map(|(_, j, i)| (j, i))
    }

    /// Steps 8–16: force in the largest value gain, pay for it with
    /// downgrades, keep the result only if the total value rises.
    fn swap_phase(&mut self, problem: &Problem) {
        let mut tried: Vec<(usize, usize)> = Vec::new();
        loop {
            // (gain, weight, strategy, viewpoint, item)
            let mut best: Option<(f64, f64, usize, usize, usize)> = None;
            for j in self.free_from..problem.count() {
                let cur = self.item(problem, j);
                for (i, it) in problem.classes[j].iter().enumerate() {
                    let gain = it.value - cur.value;
                    if gain <= 0.0 || tried.contains(&(j, i)) {
                        continue;
                    }
                    let cand = (gain, it.weight, it.strategy, j, i);
                    let wins = match best {
                        None => true,
                        Some(b) => {
                            cand.0 > b.0
                                || (cand.0 == b.0 && (cand.1 < b.1 || (cand.1 == b.1 && (cand.2, cand.3) < (b.2, b.3))))
                        }
                    };
                    if wins {
                        best = Some(cand);
                    }
                }
            }
            let Some((_, _, _, j, i)) = best else { return };
            let before_pick = self.pick.clone();
            let before_value = self.value(problem);
            self.set(problem, j, i);
            while !self.feasible(problem) {
                match self.heaviest_downgrade(problem, Some(j), true) {
                    Some((jj, ii)) => self.set(problem, jj, ii),
                    None => break,
                }
            }
            if self.feasible(problem) && self.value(problem) > before_value {
                tried.clear();
                self.upgrade(problem);
            } else {
                self.pick = before_pick;
                self.used = self.exact_usage(problem);
                tried.push((j, i));
            }
        }
    }
}

// Saving moves beat ratio moves; larger score wins; then lower strategy
// index, then lower viewpoint index.
fn better(a: &(bool, f64, usize, usize, usize), b: &(bool, f64, usize, usize, usize)) -> bool {
    match (a.0, b.0) {
        (true, false) => return true,
        (false, true) => return false,
        _ => {}
    }
    match a.1.partial_cmp(&b.1) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => (a.2, a.3) < (b.2, b.3),
    }
}
