//! Benchmarks for the parade simulator; see `benches/`.
