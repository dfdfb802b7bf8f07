//! Benchmark-only crate; see `benches/singularities.rs`.
