//! Synthetic strategy tables for testing and benchmarking the solvers.
//!
//! Entries follow the cache, energy and backhaul templates of the strategy
//! schedule, but sizes, reliabilities, selection probabilities and budgets
//! are random, so the instances are far more varied than physical ones.

use crate::strategy::{
    strategy_def, zipf_popularity, Devices, Occupancy, StrategyEntry, StrategyTable, Weight, CONSTRAINT_COUNT,
    STRATEGY_COUNT,
};
use crate::netmodel::Tier;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// A random table with `count` viewpoints; the same seed gives the same
/// table. Budgets may make it infeasible.
pub fn random_instance(seed: u64, count: usize) -> StrategyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let skew = rng.random_range(0.0..1.5);
    let popularity = zipf_popularity(count.max(1), skew).expect("valid skew")[..count].to_vec();
    // joules per MV projected at each device
    let unit_energy = Devices::new(rng.random_range(0.5..1.5), rng.random_range(0.05..0.3), rng.random_range(0.05..0.3));

    let mut entries = Vec::with_capacity(count * STRATEGY_COUNT);
    for j in 0..count {
        let mv = rng.random_range(0.5e6..1.5e6);
        let sv = mv * rng.random_range(2.0..4.0);
        for k in 1..=STRATEGY_COUNT {
            let def = strategy_def(k);
            let a_m = def.links.map(|_| rng.random_range(0.0..1.0));
            let a = a_m.unwrap_or(0.0);
            let factor = |w: Weight| match w {
                Weight::Zero => 0.0,
                Weight::Full => 1.0,
                Weight::Selected(Tier::Sub6) => 1.0 - a,
                Weight::Selected(Tier::Mmwave) => a,
            };
            let reliability = if k <= 2 { 1.0 } else { rng.random_range(0.3..1.0) };
            entries.push(StrategyEntry {
                viewpoint: j,
                strategy: k,
                reliability,
                rel_sub6: reliability,
                rel_mmwave: reliability,
                cache_cost: def.cache.map(|_, o| match o {
                    Occupancy::Zero => 0.0,
                    Occupancy::Mv => mv,
                    Occupancy::Sv => sv,
                }),
                energy_cost: def.energy.map(|d, w| factor(w) * unit_energy.get(d) * mv / 1e6),
                backhaul_cost: factor(def.backhaul) * sv,
                a_m,
                tau0: None,
                budgets: None,
                excluded: false,
            });
        }
    }

    let mut table = StrategyTable { popularity, entries, capacity: [0.0; CONSTRAINT_COUNT], warnings: Vec::new() };
    let mut most = [0.0; CONSTRAINT_COUNT];
    let mut all_sv = 0.0;
    for j in 0..count {
        for d in 0..CONSTRAINT_COUNT {
            most[d] += (1..=STRATEGY_COUNT).map(|k| table.consumption(j, k)[d]).fold(0.0, f64::max);
        }
        all_sv += table.entry(j, STRATEGY_COUNT).backhaul_cost;
    }
    for d in 0..CONSTRAINT_COUNT - 1 {
        table.capacity[d] = most[d] * rng.random_range(0.05..1.0);
    }
    table.capacity[CONSTRAINT_COUNT - 1] = all_sv * rng.random_range(0.5..1.2);
    table
}
