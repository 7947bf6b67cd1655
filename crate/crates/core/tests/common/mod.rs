//! Invariant checks shared by the `properties` and `acceptance` targets.
//! Each check panics on the first violation.

use dcvr_core::montecarlo::{mc_reliability, McEstimate};
use dcvr_core::netmodel::{draw_sinr_mmwave, draw_sinr_sub6, sample_ppp, NetworkConfig, Tier};
use dcvr_core::reliability::{rel_dc, rel_mmwave, rel_sub6, DeliveryCase, LinkSelector};
use dcvr_core::solvers::instances::random_instance;
use dcvr_core::solvers::{
    greedy_baseline, heuristic_lower_bound, solve_bfbb, solve_bruteforce, solve_dcp, upper_bound_relaxed, BaselineKind,
    DcpOptions, Problem,
};
use dcvr_core::specfun::{gamma_fn, gauss_laguerre, hyp_h, QuadratureRule};
use dcvr_core::strategy::{
    build_strategy_table_with, check_lemma1, strategy_def, zipf_popularity, Assignment, DecisionTuple, Device,
    ResourceBudget, StrategyTable, ViewpointCatalog, CONSTRAINT_COUNT, STRATEGY_COUNT,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::sync::OnceLock;

pub type Check = (&'static str, fn());

pub const SUITE: &[Check] = &[
    ("quadrature exactness", quadrature_exactness),
    ("H_delta monotone in (0, 1]", hyp_h_monotone),
    ("gamma reflection", gamma_reflection),
    ("seeded SINR reproducibility", seeded_sinr),
    ("nearest-distance KS", nearest_distance_ks),
    ("reliability monotonicity grid", reliability_grid),
    ("A^m non-increasing in tau0", link_selection_monotone),
    ("LOS-only convexity in kappa", los_only_convexity),
    ("outputs in [0, 1], rel_dc >= inputs", reliability_ranges),
    ("q=32 vs q=64", quadrature_convergence),
    ("MC estimate invariants", mc_estimate_invariants),
    ("MC CI coverage", mc_ci_coverage),
    ("Zipf normalisation", zipf_normalised),
    ("structural rule enumeration", structural_rule_enumeration),
    ("strategy table entries", table_entries),
    ("energy templates", energy_templates),
    ("UB soundness", upper_bound_sound),
    ("BFBB = brute force", bfbb_matches_brute_force),
    ("solver outputs feasible", solvers_feasible),
    ("DCP monotone descent", dcp_descent),
    ("BFBB >= DCP >= 0", solver_ordering),
];

fn rule(q: usize) -> &'static QuadratureRule {
    static R32: OnceLock<QuadratureRule> = OnceLock::new();
    static R64: OnceLock<QuadratureRule> = OnceLock::new();
    let cell = match q {
        32 => &R32,
        64 => &R64,
        _ => panic!("no cached rule of order {q}"),
    };
    cell.get_or_init(|| gauss_laguerre(q).unwrap())
}

/// Link selector of the default network at q = 32, built once.
pub fn default_selector() -> &'static LinkSelector {
    static SEL: OnceLock<LinkSelector> = OnceLock::new();
    SEL.get_or_init(|| LinkSelector::new(&NetworkConfig::default(), rule(32)))
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

pub fn quadrature_exactness() {
    for q in [2usize, 4, 8, 16] {
        let rule = gauss_laguerre(q).unwrap();
        for k in 0..2 * q {
            let exact = gamma_fn(k as f64 + 1.0).unwrap();
            let v = rule.integrate(|r| r.powi(k as i32));
            assert!(((v - exact) / exact).abs() <= 1e-9, "q {q} k {k}: {v} vs {exact}");
        }
    }
}

pub fn hyp_h_monotone() {
    proptest!(cases(256), |(delta in 0.05f64..0.95, x in 0.0f64..50.0, step in 0.01f64..10.0)| {
        let a = hyp_h(delta, x).unwrap();
        let b = hyp_h(delta, x + step).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b < a, "H({delta}, {x}) = {a} <= H(.., {}) = {b}", x + step);
    });
}

pub fn gamma_reflection() {
    for i in 1..=9 {
        let d = i as f64 / 10.0;
        let lhs = gamma_fn(1.0 + d).unwrap() * gamma_fn(1.0 - d).unwrap();
        let rhs = PI * d / (PI * d).sin();
        assert!(((lhs - rhs) / rhs).abs() <= 1e-10, "delta {d}");
    }
}

pub fn seeded_sinr() {
    let cfg = NetworkConfig::default();
    proptest!(cases(16), |(seed in any::<u64>())| {
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..4)
                .map(|_| (draw_sinr_sub6(&cfg, &mut rng).unwrap().to_bits(), draw_sinr_mmwave(&cfg, &mut rng).unwrap().to_bits()))
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(draw(), draw());
    });
}

pub fn nearest_distance_ks() {
    let lambda = 1e-5;
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut d: Vec<f64> = (0..n)
        .map(|_| {
            sample_ppp(lambda, 1500.0, &mut rng)
                .iter()
                .map(|p| p[0].hypot(p[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    d.sort_by(f64::total_cmp);
    let ks = d
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let f = 1.0 - (-PI * lambda * r * r).exp();
            (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.01, "KS statistic {ks}");
}

pub fn reliability_grid() {
    let cfg = NetworkConfig::default();
    let sizes = [0.5e6, 1e6, 2e6, 3e6, 5e6];
    let budgets = [0.005, 0.01, 0.02, 0.03, 0.05];
    for f in [rel_sub6, rel_mmwave] {
        let grid: Vec<Vec<f64>> = sizes
            .iter()
            .map(|&d| budgets.iter().map(|&t| f(DeliveryCase::new(d, t), &cfg, rule(32)).value()).collect())
            .collect();
        for i in 0..5 {
            for j in 0..5 {
                if i + 1 < 5 {
                    assert!(grid[i + 1][j] <= grid[i][j], "not non-increasing in D at {i},{j}: {grid:?}");
                }
                if j + 1 < 5 {
                    assert!(grid[i][j + 1] >= grid[i][j], "not non-decreasing in T at {i},{j}: {grid:?}");
                }
            }
        }
    }
}

pub fn link_selection_monotone() {
    let sel = default_selector();
    let a: Vec<f64> = [-5e-3, -2e-3, 0.0, 2e-3, 5e-3].iter().map(|&t0| sel.prob_mmwave(3e6, 3e6, t0)).collect();
    assert!(a.windows(2).all(|w| w[1] <= w[0]), "{a:?}");
}

// Evenly spaced so second differences test convexity.
const KAPPAS: [f64; 6] = [1e-4, 4.8e-4, 8.6e-4, 1.24e-3, 1.62e-3, 2e-3];

fn convex_decreasing(v: &[f64], what: &str) {
    for w in v.windows(2) {
        assert!(w[1] - w[0] <= 1e-12, "{what} increases: {v:?}");
    }
    for w in v.windows(3) {
        assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-12, "{what} not convex: {v:?}");
    }
}

pub fn los_only_convexity() {
    let case = DeliveryCase::new(3e6, 0.02);
    let mut rel = Vec::new();
    let mut sel = Vec::new();
    for kappa in KAPPAS {
        let cfg = NetworkConfig { kappa, los_only: true, ..NetworkConfig::default() };
        rel.push(rel_mmwave(case, &cfg, rule(32)).value());
        sel.push(LinkSelector::new(&cfg, rule(32)).prob_mmwave(3e6, 3e6, 0.0));
    }
    convex_decreasing(&rel, "rel_mmwave");
    convex_decreasing(&sel, "A^m");
}

pub fn reliability_ranges() {
    let cfg = NetworkConfig::default();
    proptest!(cases(64), |(d in 1e4f64..1e7, t in -0.01f64..0.1)| {
        let case = DeliveryCase::new(d, t);
        let a = rel_sub6(case, &cfg, rule(32));
        let b = rel_mmwave(case, &cfg, rule(32));
        let c = rel_dc(a, b);
        for v in [a, b, c] {
            prop_assert!((0.0..=1.0).contains(&v.value()));
        }
        prop_assert!(c.value() >= a.value().max(b.value()));
        if t <= 0.0 {
            prop_assert_eq!(c.value(), 0.0);
        }
    });
}

pub fn quadrature_convergence() {
    let cfg = NetworkConfig::default();
    for (d, t) in [(1e6, 0.01), (1e6, 0.02), (3e6, 0.01), (3e6, 0.02), (3e6, 0.03)] {
        let case = DeliveryCase::new(d, t);
        for f in [rel_sub6, rel_mmwave] {
            let a = f(case, &cfg, rule(32)).value();
            let b = f(case, &cfg, rule(64)).value();
            assert!((a - b).abs() <= 1e-5, "D {d} T {t}: {a} vs {b}");
        }
    }
    let a = default_selector().prob_mmwave(3e6, 3e6, 0.0);
    let b = LinkSelector::new(&NetworkConfig::default(), rule(64)).prob_mmwave(3e6, 3e6, 0.0);
    assert!((a - b).abs() <= 1e-5, "A^m {a} vs {b}");
}

fn estimate_ok(e: &McEstimate) -> bool {
    (0.0..=1.0).contains(&e.mean) && e.half_width_95 <= 0.5
}

pub fn mc_estimate_invariants() {
    let cfg = NetworkConfig::default();
    proptest!(cases(12), |(seed in any::<u64>(), d in 1e5f64..5e6, t in 0.001f64..0.05, mm in any::<bool>())| {
        let tier = if mm { Tier::Mmwave } else { Tier::Sub6 };
        let case = DeliveryCase::new(d, t);
        let a = mc_reliability(tier, case, &cfg, 1000, seed).unwrap();
        prop_assert!(estimate_ok(&a), "{a:?}");
        prop_assert_eq!(a, mc_reliability(tier, case, &cfg, 1000, seed).unwrap());
    });
}

pub fn mc_ci_coverage() {
    let cfg = NetworkConfig::default();
    let case = DeliveryCase::new(3e6, 0.02);
    let exact = rel_sub6(case, &cfg, rule(32)).value();
    let covered = (0..100u64)
        .filter(|&s| mc_reliability(Tier::Sub6, case, &cfg, 1000, 5000 + s).unwrap().contains(exact))
        .count();
    // three binomial standard deviations below 95
    assert!(covered >= 90, "analytic value inside {covered}/100 intervals");
}

pub fn zipf_normalised() {
    proptest!(cases(128), |(count in 1usize..300, skew in 0.0f64..3.0)| {
        let p = zipf_popularity(count, skew).unwrap();
        prop_assert_eq!(p.len(), count);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0]));
    });
}

// An MV is projected only where it is cached and nobody computes for nothing.
fn no_idle_computing(t: &DecisionTuple) -> bool {
    t.hmd_computes.hmd == t.cache_mv.hmd
        && (!t.hmd_computes.mu || t.cache_mv.mu)
        && (!t.hmd_computes.mm || t.cache_mv.mm)
        && (!t.mu_computes || t.cache_mv.mu)
        && (!t.mm_computes || t.cache_mv.mm)
}

pub fn structural_rule_enumeration() {
    let found: BTreeSet<u16> = (0..1u16 << DecisionTuple::BITS)
        .map(DecisionTuple::from_bits)
        .filter(|t| check_lemma1(t) && no_idle_computing(t))
        .map(|t| t.to_bits())
        .collect();
    let schedule: BTreeSet<u16> = (1..=STRATEGY_COUNT).map(|k| strategy_def(k).decision().to_bits()).collect();
    assert_eq!(schedule.len(), STRATEGY_COUNT);
    assert_eq!(found, schedule);
}

prop_compose! {
    fn catalogs()(count in 1usize..5, mv in 0.3e6f64..2e6, ratio in 2.0f64..4.0, skew in 0.0f64..1.5, t in 0.005f64..0.05)
        -> ViewpointCatalog {
        ViewpointCatalog::uniform(count, mv, mv * ratio, skew, t).unwrap()
    }
}

fn table_for(cat: &ViewpointCatalog) -> StrategyTable {
    build_strategy_table_with(cat, &ResourceBudget::default(), default_selector()).unwrap()
}

pub fn table_entries() {
    let cfg = NetworkConfig::default();
    proptest!(cases(12), |(cat in catalogs())| {
        let table = table_for(&cat);
        for e in &table.entries {
            prop_assert!((0.0..=1.0).contains(&e.reliability));
            if e.strategy <= 2 {
                prop_assert_eq!(e.reliability, 1.0);
                continue;
            }
            // the full budget with this strategy's own payloads
            let (mu, mm) = e.def().links.unwrap();
            let size = |p| match p {
                dcvr_core::strategy::Payload::Mv => cat.mv_size[e.viewpoint],
                dcvr_core::strategy::Payload::Sv => cat.sv_size[e.viewpoint],
            };
            let full = cat.budget(e.viewpoint);
            let best = rel_dc(
                rel_sub6(DeliveryCase::new(size(mu.payload), full), &cfg, rule(32)),
                rel_mmwave(DeliveryCase::new(size(mm.payload), full), &cfg, rule(32)),
            );
            prop_assert!(e.reliability <= best.value() + 1e-12, "k {}: {} > {}", e.strategy, e.reliability, best.value());
        }
        let last = table.entry(0, STRATEGY_COUNT);
        prop_assert_eq!(last.cache_cost.to_array(), [0.0; 3]);
        prop_assert_eq!(last.energy_cost.to_array(), [0.0; 3]);
        prop_assert_eq!(last.backhaul_cost, cat.sv_size[0]);
    });
}

pub fn energy_templates() {
    let budget = ResourceBudget::default();
    proptest!(cases(12), |(cat in catalogs())| {
        let table = table_for(&cat);
        for e in &table.entries {
            let t = e.def().decision();
            let a_m = e.a_m.unwrap_or(0.0);
            let a_mu = 1.0 - a_m;
            let f = |d: Device| budget.cycle_energy(d) * budget.cycles_per_bit * cat.mv_size[e.viewpoint];
            let b = |x: bool| if x { 1.0 } else { 0.0 };
            let hmd = b(t.hmd_computes.hmd) + (b(t.hmd_computes.mu) * a_mu + b(t.hmd_computes.mm) * a_m).min(1.0);
            let expect = [hmd * f(Device::Hmd), b(t.mu_computes) * a_mu * f(Device::Mu), b(t.mm_computes) * a_m * f(Device::Mm)];
            let got = e.energy_cost.to_array();
            for d in 0..3 {
                prop_assert!((got[d] - expect[d]).abs() <= 1e-12 * expect[d].max(1e-30), "k {} device {d}: {} vs {}", e.strategy, got[d], expect[d]);
            }
            let total: f64 = got.iter().sum();
            prop_assert!((total - expect.iter().sum::<f64>()).abs() <= 1e-12 * total.max(1e-30));
        }
    });
}

fn brute_force_value(table: &StrategyTable) -> Option<f64> {
    solve_bruteforce(table).ok().map(|s| s.assignment.objective)
}

pub fn upper_bound_sound() {
    proptest!(cases(48), |(seed in any::<u64>(), count in 1usize..5)| {
        let table = random_instance(seed, count);
        if let Some(opt) = brute_force_value(&table) {
            let p = Problem::new(&table);
            prop_assert!(upper_bound_relaxed(&p.classes, p.aggregate_capacity()) >= opt - 1e-12);
        }
    });
}

pub fn bfbb_matches_brute_force() {
    proptest!(cases(48), |(seed in any::<u64>(), count in 1usize..=5)| {
        let table = random_instance(seed, count);
        match brute_force_value(&table) {
            Some(opt) => {
                let s = solve_bfbb(&table, None).unwrap();
                prop_assert!(s.optimal);
                prop_assert!((s.assignment.objective - opt).abs() <= 1e-12, "{} vs {opt}", s.assignment.objective);
            }
            None => prop_assert!(solve_bfbb(&table, None).is_err()),
        }
    });
}

fn well_formed(table: &StrategyTable, a: &Assignment) -> bool {
    a.feasible
        && a.choice.len() == table.count()
        && a.choice.iter().enumerate().all(|(j, &k)| table.allowed(j, k))
        && a.slack.iter().all(|&s| s >= 0.0)
        && a.slack.len() == CONSTRAINT_COUNT
}

pub fn solvers_feasible() {
    proptest!(cases(48), |(seed in any::<u64>(), count in 1usize..9)| {
        let table = random_instance(seed, count);
        let mut results = Vec::new();
        results.extend(heuristic_lower_bound(&table).ok());
        results.extend(solve_bfbb(&table, None).ok().map(|s| s.assignment));
        results.extend(solve_dcp(&table, &DcpOptions::default()).ok().map(|r| r.solution.assignment));
        for kind in [BaselineKind::Lsc, BaselineKind::LcMcp] {
            results.extend(greedy_baseline(kind, &table).ok());
        }
        for a in &results {
            prop_assert!(well_formed(&table, a), "{a:?}");
        }
    });
}

pub fn dcp_descent() {
    proptest!(cases(32), |(seed in any::<u64>(), count in 1usize..9)| {
        let table = random_instance(seed, count);
        if let Ok(r) = solve_dcp(&table, &DcpOptions::default()) {
            for level in &r.trace {
                for w in level.objective.windows(2) {
                    prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "penalty {}: {:?}", level.penalty, level.objective);
                }
            }
        }
    });
}

pub fn solver_ordering() {
    proptest!(cases(32), |(seed in any::<u64>(), count in 1usize..9)| {
        let table = random_instance(seed, count);
        if let (Ok(b), Ok(d)) = (solve_bfbb(&table, None), solve_dcp(&table, &DcpOptions::default())) {
            prop_assert!(d.solution.assignment.objective >= 0.0);
            prop_assert!(b.assignment.objective >= d.solution.assignment.objective - 1e-12);
        }
    });
}
