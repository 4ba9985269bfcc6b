//! Random trees that are invariant in law under random edge contraction:
//! discrete trees, measured real trees, their generators, and Monte-Carlo
//! checks of the distributional identities relating them.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrete;
mod draw;
pub mod error;
pub mod fixtures;
pub mod generators;
pub mod qsd;
pub mod rng;
pub mod rtree;
pub mod stats;

pub use error::{Error, Result};
