//! Benchmark workloads and acceptance drivers for the congraph structures.

pub mod criteria;
pub mod workload;
