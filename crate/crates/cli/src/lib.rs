//! Benchmark harness for the recover-core solvers: experiment spec files,
//! reference degradations, quality metrics, and run orchestration.

pub mod data;
pub mod metrics;
pub mod runner;
pub mod spec;
