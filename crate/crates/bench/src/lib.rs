//! Benchmark crate: see `benches/relation_ops.rs`.
