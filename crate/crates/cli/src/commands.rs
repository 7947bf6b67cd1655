//! The subcommands. Each writes its CSV files into the output directory and
//! returns a short human-readable summary.

use crate::output::{num, opt_num, Table};
use crate::scenario::Scenario;
use anyhow::{bail, Result};
use dcvr_core::montecarlo::{mc_link_select, mc_reliability};
use dcvr_core::netmodel::{NetworkConfig, Tier};
use dcvr_core::reliability::{rel_dc, rel_mmwave, rel_sub6, DeliveryCase, LinkSelector};
use dcvr_core::solvers::{baseline, solve_bfbb, solve_dcp, BaselineKind, DcpOptions};
use dcvr_core::specfun::{gauss_laguerre, QuadratureRule};
use dcvr_core::strategy::{
    build_strategy_table_with, strategy_def, Assignment, Device, StrategyTable, StrategyType,
};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Simulate,
    Solve,
    Sweep,
    Validate,
    Table,
}

impl FromStr for Command {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "analyze" => Command::Analyze,
            "simulate" => Command::Simulate,
            "solve" => Command::Solve,
            "sweep" => Command::Sweep,
            "validate" => Command::Validate,
            "table" => Command::Table,
            _ => bail!("unknown command `{s}`"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Per exact solve (BFBB and the single-tier baselines).
    pub time_limit: Option<Duration>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: String,
    /// False when a validation deviation exceeds its tolerance.
    pub ok: bool,
}

pub fn run(cmd: Command, s: &Scenario, opts: &RunOptions) -> Result<Report> {
    match cmd {
        Command::Analyze => analyze(s, &opts.out),
        Command::Simulate => simulate(s, &opts.out),
        Command::Solve => solve(s, opts),
        Command::Sweep => sweep(s, opts),
        Command::Validate => validate(s, &opts.out),
        Command::Table => table(s, &opts.out),
    }
}

fn rule(s: &Scenario) -> Result<QuadratureRule> {
    Ok(gauss_laguerre(s.quadrature_order)?)
}

// Payload sizes and full delay budget of the first viewpoint.
fn payloads(s: &Scenario) -> [(&'static str, f64); 2] {
    [("mv", s.catalog.mv_size[0]), ("sv", s.catalog.sv_size[0])]
}

const TAU0_GRID: [f64; 5] = [-5e-3, -2e-3, 0.0, 2e-3, 5e-3];

fn analyze(s: &Scenario, out: &Path) -> Result<Report> {
    let q = rule(s)?;
    let budget = s.catalog.budget(0);
    let mut rel = Table::new(&["payload", "data_size_bits", "latency_budget_s", "rel_sub6", "rel_mmwave", "rel_dc"]);
    let mut summary = String::new();
    for (name, d) in payloads(s) {
        let case = DeliveryCase::new(d, budget);
        let a = rel_sub6(case, &s.network, &q);
        let b = rel_mmwave(case, &s.network, &q);
        let c = rel_dc(a, b);
        rel.push(vec![name.into(), num(d), num(budget), num(a.value()), num(b.value()), num(c.value())]);
        writeln!(summary, "{name}: R_sub6 {:.6}  R_mmwave {:.6}  R_dc {:.6}", a.value(), b.value(), c.value())?;
    }
    let sel = LinkSelector::new(&s.network, &q);
    let mut link = Table::new(&["data_size_sub6_bits", "data_size_mmwave_bits", "tau0_s", "a_m"]);
    let sv = s.catalog.sv_size[0];
    for t0 in TAU0_GRID {
        let a = sel.prob_mmwave(sv, sv, t0);
        link.push(vec![num(sv), num(sv), num(t0), num(a)]);
        if t0 == 0.0 {
            writeln!(summary, "A^m (sv, tau0 = 0): {a:.6}")?;
        }
    }
    Ok(Report { files: vec![rel.write(out, "analyze.csv")?, link.write(out, "link_selection.csv")?], summary, ok: true })
}

fn simulate(s: &Scenario, out: &Path) -> Result<Report> {
    let budget = s.catalog.budget(0);
    let mut t = Table::new(&[
        "quantity",
        "payload",
        "data_size_bits",
        "latency_budget_s",
        "tau0_s",
        "mean",
        "half_width_95",
        "trials",
        "seed",
    ]);
    let mut summary = String::new();
    for (i, (name, d)) in payloads(s).into_iter().enumerate() {
        let case = DeliveryCase::new(d, budget);
        for (j, (quantity, tier)) in [("rel_sub6", Tier::Sub6), ("rel_mmwave", Tier::Mmwave)].into_iter().enumerate() {
            let e = mc_reliability(tier, case, &s.network, s.mc_trials, stream(s.seed, 2 * i + j))?;
            t.push(vec![
                quantity.into(),
                name.into(),
                num(d),
                num(budget),
                String::new(),
                num(e.mean),
                num(e.half_width_95),
                e.trials.to_string(),
                e.seed.to_string(),
            ]);
            writeln!(summary, "{quantity} {name}: {:.4} ± {:.4}", e.mean, e.half_width_95)?;
        }
    }
    let sv = s.catalog.sv_size[0];
    let case = DeliveryCase::new(sv, budget);
    let e = mc_link_select(case, case, 0.0, &s.network, s.mc_trials, stream(s.seed, 4))?;
    t.push(vec![
        "a_m".into(),
        "sv".into(),
        num(sv),
        num(budget),
        num(0.0),
        num(e.mean),
        num(e.half_width_95),
        e.trials.to_string(),
        e.seed.to_string(),
    ]);
    writeln!(summary, "A^m sv: {:.4} ± {:.4}", e.mean, e.half_width_95)?;
    Ok(Report { files: vec![t.write(out, "simulate.csv")?], summary, ok: true })
}

// Distinct seeds for the independent estimates of one run.
fn stream(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(1000).wrapping_add(i as u64)
}

pub const TOL_SUB6: f64 = 0.01;
pub const TOL_MMWAVE: f64 = 0.015;
pub const TOL_LINK: f64 = 0.015;

fn validate(s: &Scenario, out: &Path) -> Result<Report> {
    let q = rule(s)?;
    let budget = s.catalog.budget(0);
    let mut t = Table::new(&[
        "quantity",
        "data_size_bits",
        "latency_budget_s",
        "tau0_s",
        "analytic",
        "mc_mean",
        "mc_half_width_95",
        "abs_error",
        "tolerance",
        "pass",
    ]);
    let mut worst = [0.0f64; 3];
    let mut ok = true;
    let mut row = |quantity: &str, d: f64, tau0: Option<f64>, analytic: f64, mean: f64, hw: f64, tol: f64| {
        let err = (analytic - mean).abs();
        ok &= err <= tol;
        t.push(vec![
            quantity.into(),
            num(d),
            num(budget),
            opt_num(tau0),
            num(analytic),
            num(mean),
            num(hw),
            num(err),
            num(tol),
            (err <= tol).to_string(),
        ]);
        err
    };
    for (i, (_, d)) in payloads(s).into_iter().enumerate() {
        let case = DeliveryCase::new(d, budget);
        let e = mc_reliability(Tier::Sub6, case, &s.network, s.mc_trials, stream(s.seed, 2 * i))?;
        let a = rel_sub6(case, &s.network, &q).value();
        worst[0] = worst[0].max(row("rel_sub6", d, None, a, e.mean, e.half_width_95, TOL_SUB6));
        let e = mc_reliability(Tier::Mmwave, case, &s.network, s.mc_trials, stream(s.seed, 2 * i + 1))?;
        let a = rel_mmwave(case, &s.network, &q).value();
        worst[1] = worst[1].max(row("rel_mmwave", d, None, a, e.mean, e.half_width_95, TOL_MMWAVE));
    }
    let sel = LinkSelector::new(&s.network, &q);
    let sv = s.catalog.sv_size[0];
    let case = DeliveryCase::new(sv, budget);
    for (i, t0) in [-5e-3, 0.0, 5e-3].into_iter().enumerate() {
        let e = mc_link_select(case, case, t0, &s.network, s.mc_trials, stream(s.seed, 4 + i))?;
        let a = sel.prob_mmwave(sv, sv, t0);
        worst[2] = worst[2].max(row("a_m", sv, Some(t0), a, e.mean, e.half_width_95, TOL_LINK));
    }
    let summary = format!(
        "max |analytic - MC|: rel_sub6 {:.4} (tol {TOL_SUB6}), rel_mmwave {:.4} (tol {TOL_MMWAVE}), A^m {:.4} (tol {TOL_LINK})\n",
        worst[0], worst[1], worst[2]
    );
    Ok(Report { files: vec![t.write(out, "validate.csv")?], summary, ok })
}

fn strategy_table(s: &Scenario, sel: &LinkSelector) -> Result<StrategyTable> {
    Ok(build_strategy_table_with(&s.catalog, &s.budget, sel)?)
}

fn table(s: &Scenario, out: &Path) -> Result<Report> {
    let q = rule(s)?;
    let st = strategy_table(s, &LinkSelector::new(&s.network, &q))?;
    let mut t = Table::new(&[
        "viewpoint",
        "strategy",
        "tuple",
        "reliability",
        "cache_hmd_bits",
        "cache_mu_bits",
        "cache_mm_bits",
        "energy_hmd_j",
        "energy_mu_j",
        "energy_mm_j",
        "backhaul_bits",
        "a_m",
    ]);
    for e in &st.entries {
        let mut row = vec![(e.viewpoint + 1).to_string(), e.strategy.to_string(), e.def().tuple.into(), num(e.reliability)];
        row.extend(e.cache_cost.to_array().map(num));
        row.extend(e.energy_cost.to_array().map(num));
        row.push(num(e.backhaul_cost));
        row.push(opt_num(e.a_m));
        t.push(row);
    }
    let mut summary = format!("{} viewpoints x 18 strategies\n", st.count());
    for w in &st.warnings {
        writeln!(summary, "warning: {w}")?;
    }
    Ok(Report { files: vec![t.write(out, "table.csv")?], summary, ok: true })
}

pub const SOLVERS: [&str; 6] = ["BFBB", "DCP", "LSC", "LC-MCP", "MU_ONLY", "MBS_ONLY"];

struct SolveRun {
    results: Vec<(&'static str, Assignment, Option<bool>)>,
}

fn solve_all(s: &Scenario, sel: &LinkSelector, st: &StrategyTable, time_limit: Option<Duration>) -> Result<SolveRun> {
    let mut results = Vec::new();
    let b = solve_bfbb(st, time_limit)?;
    results.push(("BFBB", b.assignment, Some(b.optimal)));
    results.push(("DCP", solve_dcp(st, &DcpOptions::default())?.solution.assignment, None));
    for kind in [BaselineKind::Lsc, BaselineKind::LcMcp, BaselineKind::MuOnly, BaselineKind::MbsOnly] {
        let a = baseline(kind, st, &s.catalog, &s.budget, sel, time_limit)?;
        results.push((kind.name(), a, None));
    }
    Ok(SolveRun { results })
}

fn solve(s: &Scenario, opts: &RunOptions) -> Result<Report> {
    let q = rule(s)?;
    let sel = LinkSelector::new(&s.network, &q);
    let st = strategy_table(s, &sel)?;
    let run = solve_all(s, &sel, &st, opts.time_limit)?;

    let mut solvers = Table::new(&["solver", "objective", "feasible", "optimal"]);
    let mut assign = Table::new(&[
        "solver",
        "viewpoint",
        "strategy",
        "tuple",
        "reliability",
        "cache_hmd_bits",
        "cache_mu_bits",
        "cache_mm_bits",
        "energy_hmd_j",
        "energy_mu_j",
        "energy_mm_j",
        "backhaul_bits",
    ]);
    let mut summary = String::new();
    for (name, a, optimal) in &run.results {
        solvers.push(vec![
            name.to_string(),
            num(a.objective),
            a.feasible.to_string(),
            optimal.map(|o| o.to_string()).unwrap_or_default(),
        ]);
        writeln!(summary, "{name:<9} {:.6}{}", a.objective, if *optimal == Some(false) { " (time limit hit)" } else { "" })?;
        for (j, &k) in a.choice.iter().enumerate() {
            // single-tier baselines were solved on their own tables; costs are from the full one
            let e = st.entry(j, k);
            let mut row = vec![name.to_string(), (j + 1).to_string(), k.to_string(), e.def().tuple.into(), num(e.reliability)];
            row.extend(e.cache_cost.to_array().map(num));
            row.extend(e.energy_cost.to_array().map(num));
            row.push(num(e.backhaul_cost));
            assign.push(row);
        }
    }
    let best = &run.results[0].1;
    let props = proportions(&st, &best.choice);
    Ok(Report {
        files: vec![
            solvers.write(&opts.out, "solve.csv")?,
            assign.write(&opts.out, "assignments.csv")?,
            props.write(&opts.out, "proportions.csv")?,
        ],
        summary,
        ok: true,
    })
}

/// Popularity-weighted shares of the four strategy types and of MV/SV
/// caching per device in an assignment.
fn proportions(st: &StrategyTable, choice: &[usize]) -> Table {
    let mut t = Table::new(&["group", "category", "proportion"]);
    let share = |f: &dyn Fn(usize) -> bool| -> f64 {
        // fold from +0 so empty shares print as 0
        choice.iter().enumerate().filter(|&(_, &k)| f(k)).fold(0.0, |acc, (j, _)| acc + st.popularity[j])
    };
    for kind in [StrategyType::Local, StrategyType::BothBs, StrategyType::SingleBs, StrategyType::Backhaul] {
        t.push(vec!["type".into(), kind.name().into(), num(share(&|k| strategy_def(k).kind == kind))]);
    }
    for (group, d) in [("cache_hmd", Device::Hmd), ("cache_mu", Device::Mu), ("cache_mm", Device::Mm)] {
        let mv = share(&|k| strategy_def(k).decision().cache_mv.get(d));
        let sv = share(&|k| strategy_def(k).decision().cache_sv.get(d));
        t.push(vec![group.into(), "mv".into(), num(mv)]);
        t.push(vec![group.into(), "sv".into(), num(sv)]);
        t.push(vec![group.into(), "none".into(), num(1.0 - mv - sv)]);
    }
    t
}

fn sweep(s: &Scenario, opts: &RunOptions) -> Result<Report> {
    let Some(sw) = &s.sweep else {
        bail!("the scenario has no sweep; set `sweep.parameter` and `sweep.values`");
    };
    let points: Vec<Scenario> = sw.values.iter().map(|&v| s.with(sw.parameter, v)).collect::<Result<_, _>>()?;
    let q = rule(s)?;
    // one selector per distinct network, built in parallel
    let mut networks: Vec<NetworkConfig> = Vec::new();
    for p in &points {
        if !networks.contains(&p.network) {
            networks.push(p.network.clone());
        }
    }
    let selectors: Vec<LinkSelector> = networks.par_iter().map(|n| LinkSelector::new(n, &q)).collect();
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .zip(&sw.values)
        .map(|(p, &v)| -> Result<Vec<String>> {
            let sel = &selectors[networks.iter().position(|n| *n == p.network).expect("collected above")];
            let q = rule(p)?;
            let (sv, budget) = (p.catalog.sv_size[0], p.catalog.budget(0));
            let case = DeliveryCase::new(sv, budget);
            let mut row = vec![
                num(v),
                num(rel_sub6(case, &p.network, &q).value()),
                num(rel_mmwave(case, &p.network, &q).value()),
                num(sel.prob_mmwave(sv, sv, 0.0)),
            ];
            let st = strategy_table(p, sel)?;
            let run = solve_all(p, sel, &st, opts.time_limit)?;
            row.extend(run.results.iter().map(|(_, a, _)| num(a.objective)));
            row.push(run.results[0].2.unwrap_or(false).to_string());
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut header = vec![sw.parameter.to_string(), "rel_sub6_sv".into(), "rel_mmwave_sv".into(), "a_m_sv".into()];
    header.extend(SOLVERS.iter().map(|n| format!("objective_{}", n.to_lowercase().replace('-', "_"))));
    header.push("bfbb_optimal".into());
    let mut t = Table::with_header(header);
    let mut summary = format!("{:>14} {}\n", sw.parameter.name, SOLVERS.map(|n| format!("{n:>9}")).join(" "));
    for r in rows {
        let objs: Vec<String> = r[4..10].iter().map(|x| format!("{:>9.6}", x.parse::<f64>().unwrap_or(f64::NAN))).collect();
        writeln!(summary, "{:>14} {}", r[0].parse::<f64>().unwrap_or(f64::NAN), objs.join(" "))?;
        t.push(r);
    }
    Ok(Report { files: vec![t.write(&opts.out, "sweep.csv")?], summary, ok: true })
}
