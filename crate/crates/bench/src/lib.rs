//! Criterion benchmarks for `wgp-core`; see `benches/`.
