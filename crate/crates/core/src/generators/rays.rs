//! Self-similar one-ended trees.

use std::sync::Arc;

use rand::Rng;

use crate::discrete::{DiscreteTree, OneEndedTree};
use crate::draw::{geometric, poisson};
use crate::error::{check_half_open_unit, Error, Result};
use crate::generators::kernel::DecorationKernel;
use crate::generators::lambda::LambdaSpec;
use crate::rng::fork;
use crate::rtree::{Attachment, OneEndedRTree, Segment};

/// Half-line whose measure is `lambda` times length.
pub fn uniform_density_ray(lambda: f64) -> Result<OneEndedRTree> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::Parameter { name: "lambda", value: lambda, range: "[1, inf)" });
    }
    let density = lambda - 1.0;
    Ok(OneEndedRTree::from_source(move || Segment { density, ..Segment::bare(1.0) }, density == 0.0))
}

/// Discrete ray with an independent star of `Geo(gamma)` leaves at every
/// spine vertex, `P(k leaves) = (1 - gamma)^k gamma`.
pub fn geometric_bouquet_ray<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> Result<OneEndedTree> {
    check_half_open_unit("gamma", gamma)?;
    let mut rng = fork(rng);
    Ok(OneEndedTree::from_source(move || DiscreteTree::star(geometric(&mut rng, gamma) as usize)))
}

/// Translation-invariant Poisson forest on a bare spine: attachments arrive
/// at rate `Lambda_total`, an attachment of size `x` is the kernel tree for
/// `x` scaled by `x`.
pub fn ti_poisson_forest<R: Rng + ?Sized>(
    spec: &LambdaSpec,
    kernel: &DecorationKernel,
    rng: &mut R,
) -> Result<OneEndedRTree> {
    let rate = spec.total_rate();
    if !rate.is_finite() {
        return Err(Error::Unsupported("infinite total rate".into()));
    }
    let sizes = spec.sampler();
    let kernel = kernel.clone();
    let mut rng = fork(rng);
    let source = move || {
        let mut seg = Segment::bare(1.0);
        let count = poisson(&mut rng, rate);
        let mut offsets: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
        offsets.sort_by(f64::total_cmp);
        seg.attachments = offsets
            .into_iter()
            .map(|offset| {
                let x = sizes.sample(&mut rng);
                Attachment { offset, tree: Arc::new(kernel.attachment(x)) }
            })
            .collect();
        seg
    };
    Ok(OneEndedRTree::from_source(source, true))
}
