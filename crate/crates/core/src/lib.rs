//! Fastfood random-subspace ensembles over pooled deep features.
//!
//! Concatenated feature vectors are projected into `N` independent
//! `D`-dimensional subspaces with structured Fastfood transforms, one CART
//! tree is trained per subspace, and predictions are fused by a weighted
//! average of the trees' class distributions.

pub mod dataio;
pub mod ensemble;
pub mod error;
pub mod fastfood;
pub mod harness;
pub mod rng;
pub mod tree;

pub use error::{Error, Result};
