//! Criterion benchmarks for gw-core; see `benches/`.
