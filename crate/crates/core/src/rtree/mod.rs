//! Measured real trees: finite ones, one-ended lazy ones, and the maps
//! between them and discrete trees.

pub mod discretize;
pub mod finite;
pub mod mass;
pub mod one_ended;
pub mod point;

pub use discretize::{discretize, discretize_conditioned, discretize_given, Conditioned, DEFAULT_ATTEMPT_CAP};
pub use finite::{Atom, Edge, FiniteRTree, RescaleMode, TreeId};
pub use mass::{hurst_exponent, mass_process, Jump, MassPath, SlopePiece};
pub use one_ended::{
    discretize_one_ended, iota, iota_one_ended, prune_lambda, Attachment, OneEndedRTree, Segment, SegmentSource,
};
pub use point::{
    dm_estimate_from_epo, dm_sample, epo_sample, sample_mu, DistanceMatrix, EpoSample, Location, MuSampler,
    Origin, PointRef, Relation, RelationMatrix,
};
