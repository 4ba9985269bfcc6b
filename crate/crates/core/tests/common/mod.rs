#![allow(dead_code)]

use sstree::generators::DecorationKernel;
use sstree::rtree::FiniteRTree;

pub use sstree::fixtures::segment_with_end_atom;

pub fn fixture() -> FiniteRTree {
    sstree::fixtures::branch_with_atom()
}

pub fn unit_kernel() -> DecorationKernel {
    DecorationKernel::constant(segment_with_end_atom()).unwrap()
}

pub fn poisson_pmf(mean: f64) -> impl Fn(u64) -> f64 {
    use statrs::distribution::{Discrete, Poisson};
    let d = Poisson::new(mean).unwrap();
    move |k| d.pmf(k)
}
