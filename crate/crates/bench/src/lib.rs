//! Benchmark-only crate; see `benches/kinks.rs`.
