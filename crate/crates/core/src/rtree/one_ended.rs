//! Lazily generated real trees with a single end.

use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;

use crate::discrete::{DecorationSource, DiscreteTree, OneEndedTree};
use crate::draw::{exponential, poisson};
use crate::error::{check_half_open_unit, check_positive, Error, Result};
use crate::rng::{fork, StreamRng};
use crate::rtree::discretize::discretize;
use crate::rtree::finite::{Atom, Edge, FiniteRTree, RescaleMode};

/// Finite tree hanging from the spine at `offset` within its segment.
#[derive(Clone, Debug, PartialEq)]
pub struct Attachment {
    pub offset: f64,
    pub tree: Arc<FiniteRTree>,
}

/// A stretch of spine. Offsets of atoms and attachments lie in `[0, length)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub length: f64,
    pub density: f64,
    pub atoms: Vec<Atom>,
    pub attachments: Vec<Attachment>,
}

impl Segment {
    pub fn bare(length: f64) -> Self {
        Segment { length, density: 0.0, atoms: Vec::new(), attachments: Vec::new() }
    }

    /// Total measure carried by the segment and its attachments.
    pub fn mass(&self) -> f64 {
        self.length * (1.0 + self.density)
            + self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.attachments.iter().map(|a| a.tree.total_mass()).sum::<f64>()
    }

    fn validate(&self) {
        assert!(self.length > 0.0 && self.length.is_finite(), "segment length {}", self.length);
        assert!(self.density >= 0.0 && self.density.is_finite(), "segment density {}", self.density);
        let in_range = |o: f64| (0.0..self.length).contains(&o);
        assert!(self.atoms.iter().all(|a| in_range(a.offset) && a.mass > 0.0), "bad spine atom");
        assert!(self.attachments.iter().all(|a| in_range(a.offset)), "bad attachment offset");
    }

    /// The part of the segment from `cut` on, re-based at zero.
    fn trimmed(&self, cut: f64) -> Segment {
        Segment {
            length: self.length - cut,
            density: self.density,
            atoms: self
                .atoms
                .iter()
                .filter(|a| a.offset >= cut)
                .map(|a| Atom { offset: a.offset - cut, mass: a.mass })
                .collect(),
            attachments: self
                .attachments
                .iter()
                .filter(|a| a.offset >= cut)
                .map(|a| Attachment { offset: a.offset - cut, tree: Arc::clone(&a.tree) })
                .collect(),
        }
    }
}

/// Produces spine segments in order. Lengths must not be summable.
pub trait SegmentSource: Send {
    fn next_segment(&mut self) -> Segment;
}

impl<F: FnMut() -> Segment + Send> SegmentSource for F {
    fn next_segment(&mut self) -> Segment {
        self()
    }
}

struct Stream {
    segments: Vec<Arc<Segment>>,
    starts: Vec<f64>,
    end: f64,
    source: Box<dyn SegmentSource>,
}

impl Stream {
    fn pull(&mut self) {
        let seg = self.source.next_segment();
        seg.validate();
        self.starts.push(self.end);
        self.end += seg.length;
        self.segments.push(Arc::new(seg));
    }
}

/// Measured real tree with one end: a half-line spine carrying excess mass
/// and finite attached trees, generated segment by segment and memoized.
#[derive(Clone)]
pub struct OneEndedRTree {
    stream: Arc<Mutex<Stream>>,
    origin: f64,
    pure_jump: bool,
    head: Arc<OnceLock<(usize, f64, Arc<Segment>)>>,
}

impl fmt::Debug for OneEndedRTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OneEndedRTree")
            .field("origin", &self.origin)
            .field("pure_jump", &self.pure_jump)
            .finish()
    }
}

impl OneEndedRTree {
    /// `pure_jump` declares that every segment has zero spine density.
    pub fn from_source(source: impl SegmentSource + 'static, pure_jump: bool) -> Self {
        let stream = Stream { segments: Vec::new(), starts: Vec::new(), end: 0.0, source: Box::new(source) };
        OneEndedRTree {
            stream: Arc::new(Mutex::new(stream)),
            origin: 0.0,
            pure_jump,
            head: Arc::new(OnceLock::new()),
        }
    }

    /// Bare half-line with length measure, in unit segments.
    pub fn bare_ray() -> Self {
        Self::from_source(|| Segment::bare(1.0), true)
    }

    pub fn is_pure_jump(&self) -> bool {
        self.pure_jump
    }

    /// Underlying segment index and in-segment cut for the view's root.
    fn head(&self) -> &(usize, f64, Arc<Segment>) {
        self.head.get_or_init(|| {
            let mut s = self.stream.lock().expect("segment stream poisoned");
            while s.end <= self.origin {
                s.pull();
            }
            let mut b = s.starts.partition_point(|&x| x <= self.origin) - 1;
            let mut cut = self.origin - s.starts[b];
            if cut >= s.segments[b].length {
                b += 1;
                while s.segments.len() <= b {
                    s.pull();
                }
                cut = 0.0;
            }
            let seg = if cut == 0.0 { Arc::clone(&s.segments[b]) } else { Arc::new(s.segments[b].trimmed(cut)) };
            (b, cut, seg)
        })
    }

    /// Segment `k` of this view; segment 0 starts at the root.
    pub fn segment(&self, k: usize) -> Arc<Segment> {
        let (base, _, first) = self.head();
        if k == 0 {
            return Arc::clone(first);
        }
        let idx = base + k;
        let mut s = self.stream.lock().expect("segment stream poisoned");
        while s.segments.len() <= idx {
            s.pull();
        }
        Arc::clone(&s.segments[idx])
    }

    /// Segments with their starting heights, up to the one starting past `limit`.
    pub fn segments_until(&self, limit: f64) -> Vec<(f64, Arc<Segment>)> {
        let mut out = Vec::new();
        let mut start = 0.0;
        let mut k = 0;
        while start <= limit {
            let seg = self.segment(k);
            let len = seg.length;
            out.push((start, seg));
            start += len;
            k += 1;
        }
        out
    }

    /// Shift along the spine: the point at height `t` becomes the root and
    /// everything below it is dropped. An attachment at exactly `t` stays.
    pub fn theta_t(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Parameter { name: "t", value: t, range: "[0, inf)" });
        }
        Ok(OneEndedRTree {
            stream: Arc::clone(&self.stream),
            origin: self.origin + t,
            pure_jump: self.pure_jump,
            head: Arc::new(OnceLock::new()),
        })
    }

    /// Spine `[0, h]` with the mass and attachments at heights below `h`
    /// (or up to `h` when `inclusive`), as a finite tree.
    pub fn spine_prefix(&self, h: f64, inclusive: bool) -> FiniteRTree {
        let within = |pos: f64| pos < h || (inclusive && pos == h);
        let mut pieces = Vec::new();
        let mut atoms = Vec::new();
        let mut attached = Vec::new();
        let mut breaks = vec![0.0, h];
        for (start, seg) in self.segments_until(h) {
            let end = (start + seg.length).min(h);
            if end > start {
                pieces.push((start, end, seg.density));
                breaks.push(end);
            }
            atoms.extend(seg.atoms.iter().map(|a| (start + a.offset, a.mass)).filter(|&(x, _)| within(x)));
            for a in &seg.attachments {
                let pos = start + a.offset;
                if within(pos) {
                    breaks.push(pos);
                    attached.push((pos, Arc::clone(&a.tree)));
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut out = FiniteRTree::point();
        let mut vertex_at = vec![0usize];
        let mut piece = 0;
        let mut next_atom = 0;
        while next_atom < atoms.len() && atoms[next_atom].0 <= 0.0 {
            out.add_root_atom(atoms[next_atom].1);
            next_atom += 1;
        }
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            while piece + 1 < pieces.len() && pieces[piece].1 <= a {
                piece += 1;
            }
            let mut edge = Edge::new(b - a).with_density(pieces.get(piece).map_or(0.0, |p| p.2));
            while next_atom < atoms.len() && atoms[next_atom].0 <= b {
                edge.atoms.push(Atom { offset: (atoms[next_atom].0 - a).clamp(0.0, b - a), mass: atoms[next_atom].1 });
                next_atom += 1;
            }
            let tip = *vertex_at.last().unwrap();
            vertex_at.push(out.add_edge(tip, edge).expect("spine edges are valid"));
        }
        for (pos, tree) in attached {
            let i = breaks.partition_point(|&x| x < pos);
            out.graft(vertex_at[i], &tree);
        }
        out
    }

    /// Closed ball of radius `r` around the root.
    pub fn truncate_r(&self, r: f64) -> Result<FiniteRTree> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Parameter { name: "radius", value: r, range: "[0, inf)" });
        }
        self.spine_prefix(r, true).truncate_r(r)
    }

    /// Spine rescaling: spine lengths by `q`, everything else as in
    /// [`FiniteRTree::rescale`]. Only the exact spine is supported here.
    pub fn rescale(&self, p: f64, q: f64, mode: RescaleMode) -> Result<OneEndedRTree> {
        check_half_open_unit("p", p)?;
        check_half_open_unit("q", q)?;
        if let RescaleMode::Horizon(_) = mode {
            return Err(Error::Unsupported("horizon rescaling of a one-ended tree".into()));
        }
        if p == 1.0 && q == 1.0 {
            return Ok(self.clone());
        }
        let input = self.clone();
        let mut k = 0;
        let source = move || {
            let seg = input.segment(k);
            k += 1;
            Segment {
                length: q * seg.length,
                density: seg.density * p / q,
                atoms: seg.atoms.iter().map(|a| Atom { offset: q * a.offset, mass: p * a.mass }).collect(),
                attachments: seg
                    .attachments
                    .iter()
                    .map(|a| Attachment {
                        offset: q * a.offset,
                        tree: Arc::new(a.tree.scale(p).expect("p is positive")),
                    })
                    .collect(),
            }
        };
        Ok(OneEndedRTree::from_source(source, self.pure_jump))
    }
}

/// Real tree with unit edges and length measure.
pub fn iota(tree: &DiscreteTree) -> FiniteRTree {
    let mut out = FiniteRTree::point();
    let mut image = vec![0usize; tree.len()];
    for &v in &tree.top_down()[1..] {
        image[v] = out
            .add_edge(image[tree.parent(v).unwrap()], Edge::new(1.0))
            .expect("unit edges are valid");
    }
    out
}

/// [`iota`] for a one-ended tree: unit spine segments, decoration `k`
/// attached at the start of segment `k`.
pub fn iota_one_ended(tree: &OneEndedTree) -> OneEndedRTree {
    let input = tree.clone();
    let mut k = 0;
    OneEndedRTree::from_source(
        move || {
            let deco = input.decoration(k);
            k += 1;
            let mut seg = Segment::bare(1.0);
            if deco.len() > 1 {
                seg.attachments.push(Attachment { offset: 0.0, tree: Arc::new(iota(&deco)) });
            }
            seg
        },
        true,
    )
}

struct DiscretizeStream {
    input: OneEndedRTree,
    segment: usize,
    local: f64,
    rng: StreamRng,
}

impl DecorationSource for DiscretizeStream {
    fn next_decoration(&mut self) -> DiscreteTree {
        let mut out = DiscreteTree::single();
        let mut remaining = exponential(&mut self.rng, 1.0);
        loop {
            let seg = self.input.segment(self.segment);
            let a = self.local;
            let available = seg.length - a;
            let stop = remaining < available;
            let b = if stop { a + remaining } else { seg.length };
            let mut leaves = poisson(&mut self.rng, seg.density * (b - a));
            for atom in seg.atoms.iter().filter(|x| x.offset >= a && x.offset < b) {
                leaves += poisson(&mut self.rng, atom.mass);
            }
            for _ in 0..leaves {
                out.push_child(0);
            }
            for att in seg.attachments.iter().filter(|x| x.offset >= a && x.offset < b) {
                let piece = discretize(&att.tree, &mut self.rng);
                out.graft(0, &piece);
            }
            if stop {
                self.local = b;
                return out;
            }
            remaining -= available;
            self.segment += 1;
            self.local = 0.0;
        }
    }
}

/// Poisson discretization of a one-ended tree, sampled lazily. Spine points
/// of the length measure become the spine; everything whose spine
/// projection lies between consecutive spine points forms a decoration.
pub fn discretize_one_ended<R: Rng + ?Sized>(tree: &OneEndedRTree, rng: &mut R) -> OneEndedTree {
    OneEndedTree::from_source(DiscretizeStream { input: tree.clone(), segment: 0, local: 0.0, rng: fork(rng) })
}

/// Cuts the spine at an exponential height of rate `lambda` and keeps the
/// component of the root.
pub fn prune_lambda<R: Rng + ?Sized>(tree: &OneEndedRTree, lambda: f64, rng: &mut R) -> Result<FiniteRTree> {
    check_positive("lambda", lambda)?;
    Ok(tree.spine_prefix(exponential(rng, lambda), false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn decorated_ray() -> OneEndedRTree {
        // segments of length 2 with density 1, an atom at 0.5 and a unit
        // segment attached at 1.0
        let twig = Arc::new(FiniteRTree::segment(1.0).unwrap());
        OneEndedRTree::from_source(
            move || Segment {
                length: 2.0,
                density: 1.0,
                atoms: vec![Atom { offset: 0.5, mass: 0.25 }],
                attachments: vec![Attachment { offset: 1.0, tree: Arc::clone(&twig) }],
            },
            false,
        )
    }

    #[test]
    fn prefix_contents() {
        let t = decorated_ray();
        let p = t.spine_prefix(3.0, false);
        // spine 3 with density 1, two atoms, one twig
        assert!((p.total_mass() - (6.0 + 0.5 + 1.0)).abs() < 1e-12);
        assert_eq!(p.height(), 3.0);
        let q = t.spine_prefix(1.0, false);
        assert!((q.total_mass() - 2.25).abs() < 1e-12);
        let q = t.spine_prefix(1.0, true);
        assert!((q.total_mass() - 3.25).abs() < 1e-12);
        let ball = t.truncate_r(1.5).unwrap();
        assert!((ball.total_mass() - (3.0 + 0.25 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn theta_keeps_attachment_at_the_cut() {
        let t = decorated_ray().theta_t(1.0).unwrap();
        let seg = t.segment(0);
        assert_eq!(seg.length, 1.0);
        assert_eq!(seg.attachments.len(), 1);
        assert_eq!(seg.attachments[0].offset, 0.0);
        assert!(seg.atoms.is_empty());
        assert_eq!(t.segment(1).length, 2.0);
        assert!(decorated_ray().theta_t(-1.0).is_err());
    }

    #[test]
    fn theta_at_a_boundary_starts_the_next_segment() {
        let t = decorated_ray().theta_t(2.0).unwrap();
        assert_eq!(*t.segment(0), *decorated_ray().segment(0));
    }

    #[test]
    fn theta_semigroup() {
        let t = decorated_ray();
        let a = t.theta_t(0.75).unwrap().theta_t(1.5).unwrap();
        let b = t.theta_t(0.75 + 1.5).unwrap();
        for k in 0..4 {
            assert_eq!(*a.segment(k), *b.segment(k));
        }
    }

    #[test]
    fn rescale_segments() {
        let t = decorated_ray().rescale(0.5, 0.8, RescaleMode::ExactSpine).unwrap();
        let s = t.segment(0);
        assert!((s.length - 1.6).abs() < 1e-15);
        assert!((s.density - 0.625).abs() < 1e-15);
        assert_eq!(s.atoms[0], Atom { offset: 0.4, mass: 0.125 });
        assert!((s.attachments[0].offset - 0.8).abs() < 1e-15);
        assert_eq!(s.attachments[0].tree.total_mass(), 0.5);
        assert!(decorated_ray().rescale(0.5, 0.8, RescaleMode::Horizon(1.0)).is_err());
        let same = decorated_ray().rescale(1.0, 1.0, RescaleMode::ExactSpine).unwrap();
        assert_eq!(*same.segment(0), *decorated_ray().segment(0));
    }

    #[test]
    fn iota_of_ray_is_bare() {
        let t = iota_one_ended(&OneEndedTree::ray());
        assert!(t.segment(0).attachments.is_empty());
        let mut star = DiscreteTree::star(2);
        star.push_child(1);
        let u = iota(&star);
        assert_eq!(u.total_length(), 3.0);
        assert_eq!(u.total_excess(), 0.0);
    }

    #[test]
    fn discretized_bare_ray_is_a_ray() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = discretize_one_ended(&OneEndedRTree::bare_ray(), &mut rng);
        assert!(d.truncate(10).is_isomorphic(&DiscreteTree::path(10)));
    }

    #[test]
    fn pruning_bare_ray_gives_exponential_segment() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let mean: f64 = (0..n)
            .map(|_| prune_lambda(&OneEndedRTree::bare_ray(), 2.0, &mut rng).unwrap().total_length())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
        assert!(prune_lambda(&OneEndedRTree::bare_ray(), 0.0, &mut rng).is_err());
    }
}
