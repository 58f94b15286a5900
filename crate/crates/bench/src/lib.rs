//! Criterion benchmarks for graphheat kernels live in `benches/`.
