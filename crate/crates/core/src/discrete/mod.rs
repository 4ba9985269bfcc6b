//! Rooted unordered trees, canonical codes and random contractions.

pub mod code;
pub mod one_ended;
pub mod ops;
pub mod tree;

pub use code::CanonicalCode;
pub use one_ended::{DecorationSource, OneEndedTree, Truncate};
pub use ops::{
    contract, cop_uniform, persistent_count, persistent_count_one_ended, prune_spine, sop,
    sop_one_ended, KeepMask, SopMode,
};
pub use tree::DiscreteTree;
