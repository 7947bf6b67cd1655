//! Criterion benchmarks for dcvr-core; see `benches/`.
