//! Reparametrizations of one-ended trees through their mass process.
//!
//! Spine densities are piecewise constant per segment, so transformations of
//! the continuous part are applied as segment averages (mass preserving on
//! every segment).

use std::sync::Arc;

use rand::Rng;

use crate::error::{check_positive, Error, Result};
use crate::rng::{fork, StreamRng};
use crate::rtree::{Atom, Attachment, FiniteRTree, OneEndedRTree, Segment};

/// Draws a unit-mass tree.
pub type TreeSampler = Arc<dyn Fn(&mut StreamRng) -> FiniteRTree + Send + Sync>;

#[derive(Clone)]
pub enum Reparam {
    /// Spine height `t` moves to `t^beta`.
    Beta(f64),
    /// Mass projecting to height `s` is scaled by `s^gamma`.
    Gamma(f64),
    /// A jump of size `x` becomes one of size `x^delta`.
    Delta(f64),
    /// Jumps between consecutive record jumps share one tree from the sampler.
    Record(TreeSampler),
}

pub fn reparam<R: Rng + ?Sized>(tree: &OneEndedRTree, mode: &Reparam, rng: &mut R) -> Result<OneEndedRTree> {
    match mode {
        Reparam::Beta(beta) => reparam_beta(tree, *beta),
        Reparam::Gamma(gamma) => reparam_gamma(tree, *gamma),
        Reparam::Delta(delta) => reparam_delta(tree, *delta),
        Reparam::Record(sampler) => reparam_record(tree, Arc::clone(sampler), rng),
    }
}

/// Walks the input view, handing each segment to `f` with its start height.
fn mapped(tree: &OneEndedRTree, mut f: impl FnMut(f64, &Segment) -> Segment + Send + 'static) -> OneEndedRTree {
    let input = tree.clone();
    let pure = tree.is_pure_jump();
    let mut k = 0;
    let mut start = 0.0;
    OneEndedRTree::from_source(
        move || {
            let seg = input.segment(k);
            let out = f(start, &seg);
            k += 1;
            start += seg.length;
            out
        },
        pure,
    )
}

pub fn reparam_beta(tree: &OneEndedRTree, beta: f64) -> Result<OneEndedRTree> {
    check_positive("beta", beta)?;
    Ok(mapped(tree, move |a, seg| {
        let b = a + seg.length;
        let (na, nb) = (a.powf(beta), b.powf(beta));
        let moved = |offset: f64| ((a + offset).powf(beta) - na).clamp(0.0, (nb - na) * (1.0 - f64::EPSILON));
        Segment {
            length: nb - na,
            density: seg.density * seg.length / (nb - na),
            atoms: seg.atoms.iter().map(|x| Atom { offset: moved(x.offset), mass: x.mass }).collect(),
            attachments: seg
                .attachments
                .iter()
                .map(|x| Attachment { offset: moved(x.offset), tree: Arc::clone(&x.tree) })
                .collect(),
        }
    }))
}

/// Average of `s^gamma` over `[a, b]`.
fn mean_power(a: f64, b: f64, gamma: f64) -> f64 {
    if (gamma + 1.0).abs() < 1e-12 {
        (b / a).ln() / (b - a)
    } else {
        (b.powf(gamma + 1.0) - a.powf(gamma + 1.0)) / ((gamma + 1.0) * (b - a))
    }
}

pub fn reparam_gamma(tree: &OneEndedRTree, gamma: f64) -> Result<OneEndedRTree> {
    if !gamma.is_finite() {
        return Err(Error::Parameter { name: "gamma", value: gamma, range: "finite" });
    }
    let first = tree.segment(0);
    if gamma <= -1.0 && first.density > 0.0 {
        return Err(Error::Parameter { name: "gamma", value: gamma, range: "(-1, inf) for a spine with density" });
    }
    let at_root = first.atoms.iter().any(|a| a.offset == 0.0) || first.attachments.iter().any(|a| a.offset == 0.0);
    if gamma < 0.0 && at_root {
        return Err(Error::Parameter { name: "gamma", value: gamma, range: "[0, inf) with mass at the root" });
    }
    Ok(mapped(tree, move |a, seg| {
        let weight = |offset: f64| (a + offset).powf(gamma);
        Segment {
            length: seg.length,
            density: seg.density * mean_power(a, a + seg.length, gamma),
            atoms: seg
                .atoms
                .iter()
                .map(|x| Atom { offset: x.offset, mass: x.mass * weight(x.offset) })
                .filter(|x| x.mass > 0.0 && x.mass.is_finite())
                .collect(),
            attachments: seg
                .attachments
                .iter()
                .filter_map(|x| {
                    let w = weight(x.offset);
                    (w > 0.0 && w.is_finite()).then(|| Attachment {
                        offset: x.offset,
                        tree: if x.tree.total_mass() > 0.0 { Arc::new(x.tree.scale(w).unwrap()) } else { Arc::clone(&x.tree) },
                    })
                })
                .collect(),
        }
    }))
}

pub fn reparam_delta(tree: &OneEndedRTree, delta: f64) -> Result<OneEndedRTree> {
    check_positive("delta", delta)?;
    Ok(mapped(tree, move |_, seg| Segment {
        length: seg.length,
        density: seg.density,
        atoms: seg.atoms.iter().map(|x| Atom { offset: x.offset, mass: x.mass.powf(delta) }).collect(),
        attachments: seg
            .attachments
            .iter()
            .map(|x| {
                let m = x.tree.total_mass();
                let tree = if m > 0.0 { Arc::new(x.tree.scale(m.powf(delta - 1.0)).unwrap()) } else { Arc::clone(&x.tree) };
                Attachment { offset: x.offset, tree }
            })
            .collect(),
    }))
}

/// Needs a pure-jump input. Spine atoms count as jumps and are replaced by
/// attachments.
pub fn reparam_record<R: Rng + ?Sized>(tree: &OneEndedRTree, sampler: TreeSampler, rng: &mut R) -> Result<OneEndedRTree> {
    if !tree.is_pure_jump() {
        return Err(Error::Unsupported("record reparametrization of a spine with continuous mass".into()));
    }
    let mut rng = fork(rng);
    let mut record = 0.0f64;
    let mut shared: Option<Arc<FiniteRTree>> = None;
    Ok(mapped(tree, move |_, seg| {
        assert!(seg.density == 0.0, "pure-jump stream produced spine density");
        let mut jumps: Vec<(f64, f64)> = seg
            .atoms
            .iter()
            .map(|a| (a.offset, a.mass))
            .chain(seg.attachments.iter().map(|a| (a.offset, a.tree.total_mass())))
            .filter(|j| j.1 > 0.0)
            .collect();
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let attachments = jumps
            .into_iter()
            .map(|(offset, size)| {
                if size > record || shared.is_none() {
                    record = record.max(size);
                    shared = Some(Arc::new(sampler(&mut rng)));
                }
                let base = shared.as_ref().unwrap();
                Attachment { offset, tree: Arc::new(base.scale(size).unwrap()) }
            })
            .collect();
        Segment { length: seg.length, density: 0.0, atoms: Vec::new(), attachments }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::uniform_density_ray;
    use crate::rtree::mass_process;

    fn single_jump_ray(at: f64, size: f64) -> OneEndedRTree {
        let tree = Arc::new(FiniteRTree::segment(size).unwrap());
        let mut k = 0;
        OneEndedRTree::from_source(
            move || {
                let mut s = Segment::bare(1.0);
                if k as f64 == at.floor() {
                    s.attachments.push(Attachment { offset: at - at.floor(), tree: Arc::clone(&tree) });
                }
                k += 1;
                s
            },
            true,
        )
    }

    #[test]
    fn delta_squares_a_jump() {
        let t = reparam_delta(&single_jump_ray(2.0, 3.0), 2.0).unwrap();
        let x = mass_process(&t, 5.0).unwrap();
        assert_eq!(x.jumps.len(), 1);
        assert_eq!(x.jumps[0].time, 2.0);
        assert!((x.jumps[0].size - 9.0).abs() < 1e-12);
    }

    #[test]
    fn beta_moves_jump_times() {
        let t = reparam_beta(&single_jump_ray(2.5, 1.0), 2.0).unwrap();
        let x = mass_process(&t, 10.0).unwrap();
        assert!((x.jumps[0].time - 6.25).abs() < 1e-12);
        assert!((x.jumps[0].size - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_preserves_segment_mass() {
        let t = reparam_beta(&uniform_density_ray(3.0).unwrap(), 0.5).unwrap();
        let x = mass_process(&t, 2f64.sqrt()).unwrap();
        // excess over the first two input segments is 2 * 2
        assert!((x.value(2f64.sqrt()) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_weights_mass() {
        let t = reparam_gamma(&single_jump_ray(2.0, 3.0), 1.0).unwrap();
        let x = mass_process(&t, 5.0).unwrap();
        assert!((x.jumps[0].size - 6.0).abs() < 1e-12);
        let t = reparam_gamma(&uniform_density_ray(2.0).unwrap(), 1.0).unwrap();
        assert!((mass_process(&t, 2.0).unwrap().value(2.0) - 2.0).abs() < 1e-12);
        assert!(reparam_gamma(&uniform_density_ray(2.0).unwrap(), -1.0).is_err());
        assert!(reparam_gamma(&single_jump_ray(0.0, 1.0), -0.5).is_err());
    }

    #[test]
    fn record_shares_trees_between_records() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        // unit mass split between a segment and a root atom at random
        let sampler: TreeSampler = Arc::new(|rng: &mut StreamRng| {
            let len = 0.1 + 0.8 * rng.random::<f64>();
            let mut t = FiniteRTree::with_root_atom(1.0 - len).unwrap();
            t.graft(0, &FiniteRTree::segment(len).unwrap());
            t
        });
        let mut sizes = vec![3.0, 1.0, 2.0, 5.0, 4.0].into_iter();
        let input = OneEndedRTree::from_source(
            move || {
                let mut s = Segment::bare(1.0);
                if let Some(x) = sizes.next() {
                    s.atoms.push(Atom { offset: 0.5, mass: x });
                }
                s
            },
            true,
        );
        let out = reparam_record(&input, sampler, &mut rng).unwrap();
        let shape = |k: usize| {
            let t = &out.segment(k).attachments[0].tree;
            t.total_length() / t.total_mass()
        };
        for (k, want) in [3.0, 1.0, 2.0, 5.0, 4.0].into_iter().enumerate() {
            assert!((out.segment(k).attachments[0].tree.total_mass() - want).abs() < 1e-12);
        }
        assert!((shape(0) - shape(1)).abs() < 1e-12);
        assert!((shape(1) - shape(2)).abs() < 1e-12);
        assert!((shape(3) - shape(4)).abs() < 1e-12);
        assert!((shape(2) - shape(3)).abs() > 1e-9);
        assert!(reparam_record(&uniform_density_ray(2.0).unwrap(), Arc::new(|_: &mut StreamRng| FiniteRTree::segment(1.0).unwrap()), &mut rng).is_err());
    }

    use rand::SeedableRng;
}
