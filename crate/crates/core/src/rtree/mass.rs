//! Mass process along the spine.

use crate::error::{Error, Result};
use crate::rtree::one_ended::OneEndedRTree;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopePiece {
    pub start: f64,
    pub end: f64,
    pub slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

/// Nondecreasing path `X = X_c + X_j` on `[0, horizon]`: a piecewise-linear
/// continuous part and a finite list of jumps.
///
/// Mass sitting exactly at the spine root is kept in `origin_mass`, so
/// `X(0) = origin_mass`; it is zero for every generator in this crate.
#[derive(Clone, Debug, PartialEq)]
pub struct MassPath {
    pub horizon: f64,
    pub pieces: Vec<SlopePiece>,
    pub jumps: Vec<Jump>,
    pub origin_mass: f64,
    /// Self-similarity index, when the generating law has one.
    pub hurst: Option<f64>,
}

/// Index of a `(p, q)` family: `log p / log q`.
pub fn hurst_exponent(p: f64, q: f64) -> f64 {
    p.ln() / q.ln()
}

impl MassPath {
    pub fn empty(horizon: f64) -> Self {
        MassPath { horizon, pieces: Vec::new(), jumps: Vec::new(), origin_mass: 0.0, hurst: None }
    }

    pub fn continuous(&self, t: f64) -> f64 {
        self.pieces
            .iter()
            .take_while(|p| p.start < t)
            .map(|p| p.slope * (p.end.min(t) - p.start))
            .sum::<f64>()
            + 0.0 // an empty sum is -0
    }

    pub fn jump_part(&self, t: f64) -> f64 {
        self.origin_mass + self.jumps.iter().take_while(|j| j.time <= t).map(|j| j.size).sum::<f64>()
    }

    pub fn value(&self, t: f64) -> f64 {
        self.continuous(t) + self.jump_part(t)
    }

    /// `(t, X, X_c, X_j)` at `steps + 1` equally spaced times.
    pub fn grid(&self, steps: usize) -> Vec<[f64; 4]> {
        if self.horizon == 0.0 || steps == 0 {
            return Vec::new();
        }
        (0..=steps)
            .map(|i| {
                let t = self.horizon * i as f64 / steps as f64;
                let c = self.continuous(t);
                let j = self.jump_part(t);
                [t, c + j, c, j]
            })
            .collect()
    }

    /// Path of `s -> X(scale * s)` on `[0, horizon / scale]`, multiplied by `factor`.
    pub fn time_changed(&self, scale: f64, factor: f64) -> MassPath {
        MassPath {
            horizon: self.horizon / scale,
            pieces: self
                .pieces
                .iter()
                .map(|p| SlopePiece { start: p.start / scale, end: p.end / scale, slope: p.slope * factor * scale })
                .collect(),
            jumps: self.jumps.iter().map(|j| Jump { time: j.time / scale, size: j.size * factor }).collect(),
            origin_mass: self.origin_mass * factor,
            hurst: self.hurst,
        }
    }
}

/// `X(t) = mu(V_t) - t`, where `V_t` is everything whose spine projection is
/// within distance `t` of the root.
pub fn mass_process(tree: &OneEndedRTree, horizon: f64) -> Result<MassPath> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Parameter { name: "horizon", value: horizon, range: "[0, inf)" });
    }
    let mut path = MassPath::empty(horizon);
    if horizon == 0.0 {
        return Ok(path);
    }
    for (start, seg) in tree.segments_until(horizon) {
        if start >= horizon && start > 0.0 {
            continue;
        }
        let end = (start + seg.length).min(horizon);
        if seg.density > 0.0 && end > start {
            path.pieces.push(SlopePiece { start, end, slope: seg.density });
        }
        let masses = seg
            .atoms
            .iter()
            .map(|a| (a.offset, a.mass))
            .chain(seg.attachments.iter().map(|a| (a.offset, a.tree.total_mass())));
        for (offset, size) in masses {
            let time = start + offset;
            if size <= 0.0 || time > horizon {
                continue;
            }
            if time == 0.0 {
                path.origin_mass += size;
            } else {
                path.jumps.push(Jump { time, size });
            }
        }
    }
    path.jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rtree::finite::FiniteRTree;
    use crate::rtree::one_ended::{Attachment, Segment};
    use std::sync::Arc;

    #[test]
    fn uniform_density_gives_linear_path() {
        let ray = OneEndedRTree::from_source(|| Segment { density: 2.0, ..Segment::bare(1.0) }, false);
        let x = mass_process(&ray, 3.5).unwrap();
        assert!(x.jumps.is_empty());
        assert!((x.value(2.5) - 5.0).abs() < 1e-12);
        assert!((x.value(3.5) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn attachments_are_jumps() {
        let twig = Arc::new(FiniteRTree::segment(3.0).unwrap());
        let mut seen = 0;
        let ray = OneEndedRTree::from_source(
            move || {
                seen += 1;
                let mut s = Segment::bare(1.0);
                if seen == 3 {
                    s.attachments.push(Attachment { offset: 0.0, tree: Arc::clone(&twig) });
                }
                s
            },
            true,
        );
        let x = mass_process(&ray, 5.0).unwrap();
        assert_eq!(x.jumps, vec![Jump { time: 2.0, size: 3.0 }]);
        assert_eq!(x.value(1.999), 0.0);
        assert_eq!(x.value(2.0), 3.0);
        assert_eq!(x.value(0.0), 0.0);
        assert!(mass_process(&ray, 0.0).unwrap().grid(10).is_empty());
        assert!(mass_process(&ray, -1.0).is_err());
    }

    #[test]
    fn hurst_index() {
        assert!((hurst_exponent(0.25, 0.5) - 2.0).abs() < 1e-15);
    }
}
