//! Criterion benchmarks for wmrep-core live in `benches/`.
