use rand::Rng;

use crate::draw::poisson;
use crate::error::{check_open_unit, check_positive, Error, Result};
use crate::rtree::{Jump, MassPath};

/// Pure-jump path with jump intensity `alpha * x^(-1-alpha) dx dt` on
/// `x >= eps`, over `[0, horizon]`. Self-similar with index `1 / alpha`
/// once the cutoff is rescaled along with the path.
pub fn subordinator_jumps<R: Rng + ?Sized>(alpha: f64, eps: f64, horizon: f64, rng: &mut R) -> Result<MassPath> {
    check_open_unit("alpha", alpha)?;
    check_positive("eps", eps)?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Parameter { name: "horizon", value: horizon, range: "[0, inf)" });
    }
    let rate = eps.powf(-alpha);
    let count = poisson(rng, rate * horizon);
    let mut jumps: Vec<Jump> = (0..count)
        .map(|_| {
            let time = horizon * (1.0 - rng.random::<f64>());
            let size = eps * (1.0 - rng.random::<f64>()).powf(-1.0 / alpha);
            Jump { time, size }
        })
        .collect();
    jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut path = MassPath::empty(horizon);
    path.jumps = jumps;
    path.hurst = Some(1.0 / alpha);
    Ok(path)
}
