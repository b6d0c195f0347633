//! Criterion benchmarks for the pm4dof crate live under `benches/`.
