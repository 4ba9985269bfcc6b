//! Discrete trees read off from point configurations of a real tree.

use rand::Rng;

use crate::discrete::DiscreteTree;
use crate::draw::poisson;
use crate::error::{Error, Result};
use crate::rtree::finite::FiniteRTree;
use crate::rtree::point::{uniform_on, Canon, Location, MuSampler, Origin, PointRef};

/// Default number of attempts for conditioned sampling.
pub const DEFAULT_ATTEMPT_CAP: u64 = 10_000_000;

/// Tree on `{root} + v0 + v1`. Each point hangs below the closest point of
/// `v0` (or the root) that is a strict ancestor of it, so points of `v1` are
/// leaves and coincident points are siblings.
///
/// Output vertex 0 is the root, `1..=v0.len()` are the `v0` points in order,
/// and the `v1` points follow.
pub fn discretize_given(tree: &FiniteRTree, v0: &[PointRef], v1: &[PointRef]) -> Result<DiscreteTree> {
    let mut canon = Vec::with_capacity(v0.len() + v1.len());
    for p in v0.iter().chain(v1) {
        tree.precedes(p, p)?;
        tree.point_at(p.location(), p.origin())?;
        canon.push(tree.canon(p.location()));
    }
    Ok(assemble(tree, &canon, v0.len()))
}

/// The first `n_branching` entries of `points` may have children.
fn assemble(tree: &FiniteRTree, points: &[Canon], n_branching: usize) -> DiscreteTree {
    let mut on_edge: Vec<Vec<(f64, usize)>> = vec![Vec::new(); tree.vertex_count()];
    let mut parent: Vec<Option<usize>> = vec![Some(0); points.len() + 1];
    parent[0] = None;
    for (i, c) in points.iter().enumerate() {
        if let Canon::On(e, s) = *c {
            on_edge[e].push((s, i + 1));
        }
    }
    // deepest branching point at or above each skeleton vertex
    let mut last = vec![0usize; tree.vertex_count()];
    for v in 1..tree.vertex_count() {
        let mut cur = last[tree.parent(v).unwrap()];
        let bucket = &mut on_edge[v];
        bucket.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut k = 0;
        while k < bucket.len() {
            let offset = bucket[k].0;
            let mut next = cur;
            while k < bucket.len() && bucket[k].0 == offset {
                let out = bucket[k].1;
                parent[out] = Some(cur);
                if out <= n_branching && next == cur {
                    next = out;
                }
                k += 1;
            }
            cur = next;
        }
        last[v] = cur;
    }
    DiscreteTree::from_parents(parent).expect("parents point towards the root")
}

/// Poisson discretization: branching points with intensity given by length,
/// leaves with intensity given by the excess measure.
pub fn discretize<R: Rng + ?Sized>(tree: &FiniteRTree, rng: &mut R) -> DiscreteTree {
    let mut v0 = Vec::new();
    let mut v1 = Vec::new();
    for _ in 0..poisson(rng, tree.root_atom()) {
        v1.push(Canon::Root);
    }
    for (v, e) in tree.edges() {
        for _ in 0..poisson(rng, e.length) {
            v0.push(tree.canon(uniform_on(tree, v, rng)));
        }
        for _ in 0..poisson(rng, e.length * e.density) {
            v1.push(tree.canon(uniform_on(tree, v, rng)));
        }
        for a in &e.atoms {
            let at = tree.canon(Location::OnEdge { edge: v, offset: a.offset });
            for _ in 0..poisson(rng, a.mass) {
                v1.push(at);
            }
        }
    }
    let n0 = v0.len();
    v0.append(&mut v1);
    assemble(tree, &v0, n0)
}

/// Outcome of conditioned sampling.
#[derive(Clone, Debug)]
pub struct Conditioned {
    pub tree: DiscreteTree,
    pub attempts: u64,
}

impl Conditioned {
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / self.attempts as f64
    }
}

/// [`discretize`] conditioned on exactly `n` non-root vertices, by rejection
/// on the Poisson point count. Given the count, the points are independent
/// draws from the normalized measure.
pub fn discretize_conditioned<R: Rng + ?Sized>(
    tree: &FiniteRTree,
    n: usize,
    cap: u64,
    rng: &mut R,
) -> Result<Conditioned> {
    let mass = tree.total_mass();
    if mass == 0.0 {
        return if n == 0 {
            Ok(Conditioned { tree: DiscreteTree::single(), attempts: 1 })
        } else {
            Err(Error::ZeroMass)
        };
    }
    let mut attempts = 0;
    loop {
        if attempts == cap {
            return Err(Error::RejectionCap { attempts });
        }
        attempts += 1;
        if poisson(rng, mass) == n as u64 {
            break;
        }
    }
    Ok(Conditioned { tree: iid_discretization(tree, &MuSampler::new(tree)?, n, rng), attempts })
}

/// Discretization of `n` independent draws from the normalized measure.
pub(crate) fn iid_discretization<R: Rng + ?Sized>(
    tree: &FiniteRTree,
    sampler: &MuSampler,
    n: usize,
    rng: &mut R,
) -> DiscreteTree {
    let mut v0 = Vec::with_capacity(n);
    let mut v1 = Vec::new();
    for _ in 0..n {
        let p = sampler.sample(tree, rng);
        let c = tree.canon(p.location());
        match p.origin() {
            Origin::Length => v0.push(c),
            Origin::Excess => v1.push(c),
        }
    }
    let n0 = v0.len();
    v0.append(&mut v1);
    assemble(tree, &v0, n0)
}
