//! Criterion benchmarks for the funcint engine; see `benches/`.
