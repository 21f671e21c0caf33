//! Evaluation, `{D, N}` grid search, and the Fastfood-vs-dense benchmark.

mod bench;
mod eval;
mod grid;

pub use bench::{bench_projection, BenchReport, DENSE_BENCH_ELEMENT_CAP};
pub use eval::{evaluate, EvalReport};
pub use grid::{grid_search, GridCell, GridResult, GridSpec};

/// Report rendered as ordered `(key, value)` pairs.
pub trait KeyValues {
    fn key_values(&self) -> Vec<(String, String)>;
}
