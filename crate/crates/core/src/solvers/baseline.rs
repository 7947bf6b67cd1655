//! Reference policies: two greedy caching rules and the optimum with only
//! one base-station tier deployed.

use super::bfbb::solve_bfbb;
use crate::error::{invalid, Error, Result};
use crate::netmodel::{NetworkConfig, Tier};
use crate::reliability::LinkSelector;
use crate::strategy::{build_strategy_table_with, Assignment, ResourceBudget, StrategyTable, ViewpointCatalog, CONSTRAINT_COUNT};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    /// SVs cached at the HMD in popularity order until it is full, the rest
    /// served by SVs cached at the base stations, else from the cloud.
    Lsc,
    /// MVs cached and projected at the HMD while its energy lasts, then SVs
    /// at the HMD, then MVs projected at the base stations.
    LcMcp,
    /// Optimum with no mmWave base stations.
    MuOnly,
    /// Optimum with no sub-6 GHz base stations.
    MbsOnly,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [BaselineKind::Lsc, BaselineKind::LcMcp, BaselineKind::MuOnly, BaselineKind::MbsOnly];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Lsc => "LSC",
            BaselineKind::LcMcp => "LC-MCP",
            BaselineKind::MuOnly => "MU_ONLY",
            BaselineKind::MbsOnly => "MBS_ONLY",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_uppercase().replace('_', "-");
        match norm.as_str() {
            "LSC" => Ok(BaselineKind::Lsc),
            "LC-MCP" => Ok(BaselineKind::LcMcp),
            "MU-ONLY" => Ok(BaselineKind::MuOnly),
            "MBS-ONLY" => Ok(BaselineKind::MbsOnly),
            _ => Err(invalid("baseline", format!("unknown baseline `{s}`"))),
        }
    }
}

/// Runs a baseline. `table` must have been built from `catalog`, `budget`
/// and `selector`; the greedy rules read it directly, the single-tier
/// baselines rebuild it without the other tier.
pub fn baseline(
    kind: BaselineKind,
    table: &StrategyTable,
    catalog: &ViewpointCatalog,
    budget: &ResourceBudget,
    selector: &LinkSelector,
    time_limit: Option<Duration>,
) -> Result<Assignment> {
    match kind {
        BaselineKind::Lsc | BaselineKind::LcMcp => greedy_baseline(kind, table),
        BaselineKind::MuOnly | BaselineKind::MbsOnly => {
            let tier = if kind == BaselineKind::MuOnly { Tier::Sub6 } else { Tier::Mmwave };
            let t = single_tier_table(tier, catalog, budget, selector.config(), selector)?;
            Ok(solve_bfbb(&t, time_limit)?.assignment)
        }
    }
}

/// Strategy table with only `keep` deployed.
pub fn single_tier_table(
    keep: Tier,
    catalog: &ViewpointCatalog,
    budget: &ResourceBudget,
    config: &NetworkConfig,
    selector: &LinkSelector,
) -> Result<StrategyTable> {
    let cfg = match keep {
        Tier::Sub6 => NetworkConfig { lambda_m: 0.0, ..config.clone() },
        Tier::Mmwave => NetworkConfig { lambda_mu: 0.0, ..config.clone() },
    };
    build_strategy_table_with(catalog, budget, &LinkSelector::new(&cfg, selector.rule()))
}

// Strategy sequences: phases filled in popularity order while they fit,
// then per-viewpoint fallbacks.
const LSC_FILL: &[usize] = &[2];
const LSC_FALLBACK: &[usize] = &[11, 14, 17, 18];
const LCMCP_FILL: &[usize] = &[1, 2];
const LCMCP_FALLBACK: &[usize] = &[3, 12, 16, 18];

/// LSC or LC-MCP on a prebuilt table.
pub fn greedy_baseline(kind: BaselineKind, table: &StrategyTable) -> Result<Assignment> {
    let (fill, fallback) = match kind {
        BaselineKind::Lsc => (LSC_FILL, LSC_FALLBACK),
        BaselineKind::LcMcp => (LCMCP_FILL, LCMCP_FALLBACK),
        _ => return Err(invalid("baseline", format!("{kind} needs a rebuilt table"))),
    };
    let n = table.count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| table.popularity[b].total_cmp(&table.popularity[a]).then(a.cmp(&b)));

    let mut choice: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    for &k in fill {
        while next < n {
            let j = order[next];
            if !try_assign(table, &mut choice, j, k) {
                break;
            }
            next += 1;
        }
    }
    for &j in &order[next..] {
        if !fallback.iter().any(|&k| try_assign(table, &mut choice, j, k)) {
            return Err(Error::Infeasible(format!("{kind}: viewpoint {j} cannot be served within the budgets")));
        }
    }
    let choice: Vec<usize> = choice.into_iter().map(|k| k.expect("every viewpoint assigned")).collect();
    Ok(table.evaluate(&choice))
}

// Assigns `k` to `j` if the partial assignment stays within all budgets.
fn try_assign(table: &StrategyTable, choice: &mut [Option<usize>], j: usize, k: usize) -> bool {
    if !table.allowed(j, k) {
        return false;
    }
    choice[j] = Some(k);
    let mut used = [0.0; CONSTRAINT_COUNT];
    for (jj, c) in choice.iter().enumerate() {
        if let Some(kk) = c {
            for (u, x) in used.iter_mut().zip(table.consumption(jj, *kk)) {
                *u += x;
            }
        }
    }
    let ok = used.iter().zip(&table.capacity).all(|(u, c)| c - u >= 0.0);
    if !ok {
        choice[j] = None;
    }
    ok
}
