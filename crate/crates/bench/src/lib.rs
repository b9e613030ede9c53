//! Criterion benchmarks for `dunkl-core`; see `benches/`.
