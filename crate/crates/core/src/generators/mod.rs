//! Generators of self-similar trees and mass processes.

pub mod kernel;
pub mod lambda;
pub mod rays;
pub mod reparam;
pub mod subordinator;

pub use kernel::DecorationKernel;
pub use lambda::{LambdaSpec, SizeSampler};
pub use rays::{geometric_bouquet_ray, ti_poisson_forest, uniform_density_ray};
pub use reparam::{reparam, reparam_beta, reparam_delta, reparam_gamma, reparam_record, Reparam, TreeSampler};
pub use subordinator::subordinator_jumps;
