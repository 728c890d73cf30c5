//! Benchmarks for the simulation pipeline live in `benches/`.
