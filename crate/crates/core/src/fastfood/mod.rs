//! Fastfood projection blocks, the Walsh–Hadamard transform they rely on,
//! and dense random-kitchen-sinks counterparts used for verification.

mod block;
mod dense;
mod kernel;
mod wht;

pub use block::{sample_block, FastfoodBlock, FastfoodStack, ScaleMode};
pub use dense::{dense_materialize, dense_materialize_capped, dense_rks, DenseMatrix, DEFAULT_ORACLE_CAP};
pub use kernel::{apply_nonlinearity, apply_nonlinearity_in_place, exact_rbf, sample_phases, NonlinearityMode};
pub use wht::{fwht, fwht_add_count, fwht_in_place, hadamard_entry};
