//! Criterion benchmarks for `most-core`; see `benches/statistics.rs`.
