//! Contractions and spine operations on discrete trees.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::discrete::one_ended::{DecorationSource, OneEndedTree};
use crate::discrete::tree::DiscreteTree;
use crate::error::{check_open_unit, check_positive, Error, Result};
use crate::rng::{fork, StreamRng};

/// Which vertices survive a contraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeepMask(pub Vec<bool>);

impl KeepMask {
    pub fn all(n: usize) -> Self {
        KeepMask(vec![true; n])
    }

    pub fn is_kept(&self, v: usize) -> bool {
        self.0[v]
    }

    pub fn kept_count(&self) -> usize {
        self.0.iter().filter(|&&k| k).count()
    }
}

/// Keeps the masked vertices; each one hangs below its nearest kept strict
/// ancestor. The root of the result is the old root.
pub fn contract(tree: &DiscreteTree, mask: &KeepMask) -> Result<DiscreteTree> {
    if mask.0.len() != tree.len() {
        return Err(Error::MaskSize { expected: tree.len(), got: mask.0.len() });
    }
    if !mask.0[tree.root()] {
        return Err(Error::RootNotKept);
    }
    Ok(contract_unchecked(tree, &mask.0))
}

fn contract_unchecked(tree: &DiscreteTree, keep: &[bool]) -> DiscreteTree {
    let mut out = DiscreteTree::single();
    // image of the nearest kept ancestor-or-self
    let mut anchor = vec![0usize; tree.len()];
    for &v in &tree.top_down()[1..] {
        let up = anchor[tree.parent(v).unwrap()];
        anchor[v] = if keep[v] { out.push_child(up) } else { up };
    }
    out
}

/// How vertices are classified as spine vertices by [`sop`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SopMode {
    /// Only genuine spine vertices use the spine probability; in a finite
    /// tree the spine is the root alone.
    ExactSpine,
    /// Any vertex with a descendant at distance `m` uses the spine probability.
    Horizon(usize),
}

fn keep_probabilities(tree: &DiscreteTree, p: f64, q: f64, mode: SopMode) -> Vec<f64> {
    match mode {
        SopMode::ExactSpine => vec![p; tree.len()],
        SopMode::Horizon(m) => tree
            .heights()
            .into_iter()
            .map(|h| if h >= m { q } else { p })
            .collect(),
    }
}

fn bernoulli_mask<R: Rng + ?Sized>(probs: &[f64], root: usize, rng: &mut R) -> Vec<bool> {
    probs
        .iter()
        .enumerate()
        .map(|(v, &pr)| v == root || rng.random_bool(pr))
        .collect()
}

/// Random contraction: every non-root vertex is kept independently, with
/// probability `q` on the spine and `p` elsewhere.
pub fn sop<R: Rng + ?Sized>(
    tree: &DiscreteTree,
    p: f64,
    q: f64,
    mode: SopMode,
    rng: &mut R,
) -> Result<DiscreteTree> {
    check_open_unit("p", p)?;
    check_open_unit("q", q)?;
    let probs = keep_probabilities(tree, p, q, mode);
    let keep = bernoulli_mask(&probs, tree.root(), rng);
    Ok(contract_unchecked(tree, &keep))
}

struct SopStream {
    input: OneEndedTree,
    p: f64,
    q: f64,
    mode: SopMode,
    next_input: usize,
    rng: StreamRng,
}

impl SopStream {
    fn contract_decoration(&mut self, k: usize) -> DiscreteTree {
        let deco = self.input.decoration(k);
        let probs = keep_probabilities(&deco, self.p, self.q, self.mode);
        let keep = bernoulli_mask(&probs, deco.root(), &mut self.rng);
        contract_unchecked(&deco, &keep)
    }
}

impl DecorationSource for SopStream {
    fn next_decoration(&mut self) -> DiscreteTree {
        // spine vertex `next_input` is kept; collect every removed spine
        // vertex up to the next kept one
        let mut out = self.contract_decoration(self.next_input);
        loop {
            self.next_input += 1;
            if self.rng.random_bool(self.q) {
                return out;
            }
            let piece = self.contract_decoration(self.next_input);
            out.graft(0, &piece);
        }
    }
}

/// [`sop`] on a one-ended tree; the result is sampled lazily.
///
/// In horizon mode only off-spine vertices are classified by height inside
/// their decoration; spine vertices always use `q`.
pub fn sop_one_ended<R: Rng + ?Sized>(
    tree: &OneEndedTree,
    p: f64,
    q: f64,
    mode: SopMode,
    rng: &mut R,
) -> Result<OneEndedTree> {
    check_open_unit("p", p)?;
    check_open_unit("q", q)?;
    Ok(OneEndedTree::from_source(SopStream {
        input: tree.clone(),
        p,
        q,
        mode,
        next_input: 0,
        rng: fork(rng),
    }))
}

/// Keeps a uniformly random `m`-subset of the non-root vertices.
pub fn cop_uniform<R: Rng + ?Sized>(tree: &DiscreteTree, m: usize, rng: &mut R) -> Result<DiscreteTree> {
    let others: Vec<usize> = (0..tree.len()).filter(|&v| v != tree.root()).collect();
    if m > others.len() {
        return Err(Error::SubsetTooLarge { requested: m, available: others.len() });
    }
    let mut keep = vec![false; tree.len()];
    keep[tree.root()] = true;
    for i in rand::seq::index::sample(rng, others.len(), m) {
        keep[others[i]] = true;
    }
    Ok(contract_unchecked(tree, &keep))
}

/// Number of vertices at depth `r` with a descendant at depth `horizon`.
pub fn persistent_count(tree: &DiscreteTree, r: usize, horizon: usize) -> Result<usize> {
    if r > horizon {
        return Err(Error::DepthOrder { r, horizon });
    }
    let depth = tree.depths();
    let height = tree.heights();
    Ok((0..tree.len())
        .filter(|&v| depth[v] == r && height[v] >= horizon - r)
        .count())
}

/// [`persistent_count`] for a one-ended tree.
pub fn persistent_count_one_ended(tree: &OneEndedTree, r: usize, horizon: usize) -> Result<usize> {
    if r > horizon {
        return Err(Error::DepthOrder { r, horizon });
    }
    persistent_count(&tree.truncate(horizon), r, horizon)
}

/// Marks each non-root spine vertex with probability `lambda / (1 + lambda)`
/// and returns the root component once the first marked vertex is removed.
pub fn prune_spine<R: Rng + ?Sized>(tree: &OneEndedTree, lambda: f64, rng: &mut R) -> Result<DiscreteTree> {
    check_positive("lambda", lambda)?;
    let mark = lambda / (1.0 + lambda);
    let survivors = Geometric::new(mark)
        .map_err(|_| Error::Parameter { name: "lambda", value: lambda, range: "(0, inf)" })?
        .sample(rng) as usize;
    Ok(tree.spine_prefix(survivors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cherry_on_stick() -> DiscreteTree {
        // 0 - 1 - {2, 3}
        DiscreteTree::from_parents(vec![None, Some(0), Some(1), Some(1)]).unwrap()
    }

    #[test]
    fn contract_examples() {
        let t = cherry_on_stick();
        let c = contract(&t, &KeepMask(vec![true, false, true, true])).unwrap();
        assert_eq!(c.code().as_str(), "(()())");
        let all = contract(&t, &KeepMask::all(4)).unwrap();
        assert!(all.is_isomorphic(&t));
        let none = contract(&t, &KeepMask(vec![true, false, false, false])).unwrap();
        assert_eq!(none.len(), 1);
    }

    #[test]
    fn contract_errors() {
        let t = cherry_on_stick();
        assert_eq!(contract(&t, &KeepMask(vec![true; 3])).unwrap_err(), Error::MaskSize { expected: 4, got: 3 });
        assert_eq!(contract(&t, &KeepMask(vec![false, true, true, true])).unwrap_err(), Error::RootNotKept);
    }

    #[test]
    fn sop_parameter_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = DiscreteTree::path(3);
        assert!(sop(&t, 0.0, 0.5, SopMode::ExactSpine, &mut rng).is_err());
        assert!(sop(&t, 0.5, 1.0, SopMode::ExactSpine, &mut rng).is_err());
        assert!(sop_one_ended(&OneEndedTree::ray(), 1.5, 0.5, SopMode::ExactSpine, &mut rng).is_err());
    }

    #[test]
    fn sop_on_ray_is_a_ray() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = sop_one_ended(&OneEndedTree::ray(), 0.3, 0.6, SopMode::ExactSpine, &mut rng).unwrap();
        assert!(out.truncate(6).is_isomorphic(&DiscreteTree::path(6)));
    }

    #[test]
    fn horizon_mode_uses_heights() {
        // with horizon 0 every vertex is a spine vertex, and q close to 1
        // keeps nearly everything
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = DiscreteTree::star(200);
        let kept = sop(&t, 0.01, 0.99, SopMode::Horizon(0), &mut rng).unwrap().edge_count();
        assert!(kept > 180, "kept {kept}");
        let kept = sop(&t, 0.01, 0.99, SopMode::Horizon(1), &mut rng).unwrap().edge_count();
        assert!(kept < 20, "kept {kept}");
    }

    #[test]
    fn cop_uniform_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = DiscreteTree::path(5);
        assert_eq!(cop_uniform(&t, 3, &mut rng).unwrap().code(), DiscreteTree::path(3).code());
        assert_eq!(cop_uniform(&t, 5, &mut rng).unwrap().code(), t.code());
        assert!(matches!(cop_uniform(&t, 6, &mut rng), Err(Error::SubsetTooLarge { .. })));
    }

    #[test]
    fn persistent_count_examples() {
        let t = cherry_on_stick();
        assert_eq!(persistent_count(&t, 0, 2).unwrap(), 1);
        assert_eq!(persistent_count(&t, 1, 2).unwrap(), 1);
        assert_eq!(persistent_count(&t, 2, 2).unwrap(), 2);
        assert_eq!(persistent_count(&t, 1, 3).unwrap(), 0);
        assert!(persistent_count(&t, 3, 2).is_err());
        let ray = OneEndedTree::ray();
        for r in 0..5 {
            assert_eq!(persistent_count_one_ended(&ray, r, 5).unwrap(), 1);
        }
    }

    #[test]
    fn prune_spine_keeps_a_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = OneEndedTree::from_decorations(vec![DiscreteTree::star(2)]);
        assert!(prune_spine(&t, 0.0, &mut rng).is_err());
        for _ in 0..50 {
            let cut = prune_spine(&t, 1.0, &mut rng).unwrap();
            // cherry at the root plus a bare path
            assert_eq!(cut.children(0).len(), 2 + usize::from(cut.len() > 3));
        }
    }

    #[test]
    fn prune_spine_survivor_law() {
        // surviving non-root spine count is geometric with success 2/3
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 30_000;
        let zeros = (0..n)
            .filter(|_| prune_spine(&OneEndedTree::ray(), 2.0, &mut rng).unwrap().len() == 1)
            .count();
        let freq = zeros as f64 / n as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.015, "{freq}");
    }

    fn random_tree() -> impl Strategy<Value = DiscreteTree> {
        (1usize..30).prop_flat_map(|n| {
            proptest::collection::vec(any::<proptest::sample::Index>(), n - 1).prop_map(|picks| {
                let mut parent = vec![None];
                for (i, pick) in picks.iter().enumerate() {
                    parent.push(Some(pick.index(i + 1)));
                }
                DiscreteTree::from_parents(parent).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn contraction_composes(tree in random_tree(), seed in any::<u64>()) {
            // contracting by A then by B equals contracting by A and B
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = tree.len();
            let a: Vec<bool> = (0..n).map(|v| v == tree.root() || rng.random_bool(0.6)).collect();
            let b: Vec<bool> = (0..n).map(|v| v == tree.root() || rng.random_bool(0.6)).collect();
            let once = contract(&tree, &KeepMask(a.clone())).unwrap();
            // vertices of `once` appear in top-down order of the kept ones
            let kept: Vec<usize> = tree.top_down().iter().copied().filter(|&v| a[v]).collect();
            let b_on_once: Vec<bool> = kept.iter().map(|&v| b[v]).collect();
            let mut b_mask = vec![false; once.len()];
            for (image, &keep) in once.top_down().iter().zip(&b_on_once) {
                b_mask[*image] = keep;
            }
            b_mask[once.root()] = true;
            let twice = contract(&once, &KeepMask(b_mask)).unwrap();
            let both: Vec<bool> = (0..n).map(|v| a[v] && b[v]).collect();
            let direct = contract(&tree, &KeepMask(both)).unwrap();
            prop_assert_eq!(twice.code(), direct.code());
        }

        #[test]
        fn contraction_preserves_ancestry(tree in random_tree(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = sop(&tree, 0.5, 0.5, SopMode::ExactSpine, &mut rng).unwrap();
            prop_assert!(out.len() <= tree.len());
            prop_assert!(out.height() <= tree.height());
        }
    }
}
