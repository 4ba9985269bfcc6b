//! Small sampling helpers shared across modules.

use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric, Poisson};

/// Poisson count; a non-positive mean gives zero.
pub(crate) fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

pub(crate) fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    Exp::new(rate).expect("positive rate").sample(rng)
}

/// Number of failures before the first success.
pub(crate) fn geometric<R: Rng + ?Sized>(rng: &mut R, success: f64) -> u64 {
    Geometric::new(success).expect("success probability in (0, 1]").sample(rng)
}

/// Index drawn proportionally to `weights` given as a cumulative table.
pub(crate) fn pick_cumulative<R: Rng + ?Sized>(rng: &mut R, cumulative: &[f64]) -> usize {
    let u = rng.random::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

pub(crate) fn cumulate(weights: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .into_iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}
