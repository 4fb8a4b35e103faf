//! Criterion benchmarks for the solver and the online update loop; see `benches/`.
