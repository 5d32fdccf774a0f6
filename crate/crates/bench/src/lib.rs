//! Benchmarks for the semnet engine live in `benches/`.
