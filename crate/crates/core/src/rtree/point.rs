//! Points of a finite real tree, the sampling measure, and distances.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rtree::finite::{FiniteRTree, TreeId};

/// Where a point sits in the skeleton.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    Root,
    /// `offset` from the root-side end of the edge above vertex `edge`.
    OnEdge { edge: usize, offset: f64 },
}

/// Which part of the measure a sampled point came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Length,
    Excess,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointRef {
    tree: TreeId,
    location: Location,
    origin: Origin,
}

impl PointRef {
    pub fn location(&self) -> Location {
        self.location
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }
}

/// Location with a unique representation: the root, or a strictly positive
/// offset on an edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Canon {
    Root,
    On(usize, f64),
}

impl FiniteRTree {
    pub fn root_point(&self) -> PointRef {
        PointRef { tree: self.id(), location: Location::Root, origin: Origin::Length }
    }

    /// Reference to a point of this tree.
    pub fn point_at(&self, location: Location, origin: Origin) -> Result<PointRef> {
        if let Location::OnEdge { edge, offset } = location {
            if edge == 0 || edge >= self.vertex_count() {
                return Err(Error::BadPoint(format!("no edge above vertex {edge}")));
            }
            let len = self.edge(edge).length;
            if !(offset >= 0.0 && offset <= len) {
                return Err(Error::BadPoint(format!("offset {offset} outside [0, {len}]")));
            }
        }
        Ok(PointRef { tree: self.id(), location, origin })
    }

    /// The lower end of edge `v`, or the root for `v = 0`.
    pub fn vertex_point(&self, v: usize, origin: Origin) -> Result<PointRef> {
        if v == 0 {
            return self.point_at(Location::Root, origin);
        }
        if v >= self.vertex_count() {
            return Err(Error::BadPoint(format!("no vertex {v}")));
        }
        self.point_at(Location::OnEdge { edge: v, offset: self.edge(v).length }, origin)
    }

    fn check(&self, p: &PointRef) -> Result<()> {
        if p.tree != self.id() {
            return Err(Error::ForeignPoint);
        }
        Ok(())
    }

    pub(crate) fn canon(&self, loc: Location) -> Canon {
        let (mut edge, mut offset) = match loc {
            Location::Root => return Canon::Root,
            Location::OnEdge { edge, offset } => (edge, offset),
        };
        while offset <= 0.0 {
            match self.parent(edge) {
                Some(0) | None => return Canon::Root,
                Some(up) => {
                    edge = up;
                    offset = self.edge(up).length;
                }
            }
        }
        Canon::On(edge, offset)
    }

    pub(crate) fn canon_depth(&self, c: Canon) -> f64 {
        match c {
            Canon::Root => 0.0,
            Canon::On(e, s) => self.depth(self.parent(e).unwrap()) + s,
        }
    }

    /// `a` lies on the path from the root to `b` and differs from it.
    pub(crate) fn canon_precedes(&self, a: Canon, b: Canon) -> bool {
        match (a, b) {
            (_, Canon::Root) => false,
            (Canon::Root, Canon::On(..)) => true,
            (Canon::On(ea, sa), Canon::On(eb, sb)) => {
                if ea == eb {
                    sa < sb
                } else {
                    ea < eb && self.is_vertex_ancestor(ea, eb)
                }
            }
        }
    }

    pub(crate) fn canon_distance(&self, a: Canon, b: Canon) -> f64 {
        let da = self.canon_depth(a);
        let db = self.canon_depth(b);
        let meet = match (a, b) {
            (Canon::Root, _) | (_, Canon::Root) => 0.0,
            (Canon::On(ea, sa), Canon::On(eb, sb)) if ea == eb => self.depth(self.parent(ea).unwrap()) + sa.min(sb),
            (Canon::On(ea, _), Canon::On(eb, _)) => {
                if self.is_vertex_ancestor(ea, eb) {
                    da
                } else if self.is_vertex_ancestor(eb, ea) {
                    db
                } else {
                    self.depth(self.lowest_common_ancestor(ea, eb))
                }
            }
        };
        (da - meet) + (db - meet)
    }

    /// Strict ancestry `a < b` decided on the skeleton.
    pub fn precedes(&self, a: &PointRef, b: &PointRef) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.canon_precedes(self.canon(a.location), self.canon(b.location)))
    }

    pub fn distance(&self, a: &PointRef, b: &PointRef) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.canon_distance(self.canon(a.location), self.canon(b.location)))
    }
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Length(usize),
    Density(usize),
    Atom(usize, usize),
    RootAtom,
}

/// Draws points from the normalized measure of a tree.
#[derive(Clone, Debug)]
pub struct MuSampler {
    cumulative: Vec<f64>,
    pieces: Vec<Piece>,
}

impl MuSampler {
    pub fn new(tree: &FiniteRTree) -> Result<Self> {
        let mut cumulative = Vec::new();
        let mut pieces = Vec::new();
        let mut acc = 0.0;
        let mut push = |w: f64, piece: Piece| {
            if w > 0.0 {
                acc += w;
                cumulative.push(acc);
                pieces.push(piece);
            }
        };
        push(tree.root_atom(), Piece::RootAtom);
        for (v, e) in tree.edges() {
            push(e.length, Piece::Length(v));
            push(e.length * e.density, Piece::Density(v));
            for (i, a) in e.atoms.iter().enumerate() {
                push(a.mass, Piece::Atom(v, i));
            }
        }
        if pieces.is_empty() {
            return Err(Error::ZeroMass);
        }
        Ok(MuSampler { cumulative, pieces })
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn sample<R: Rng + ?Sized>(&self, tree: &FiniteRTree, rng: &mut R) -> PointRef {
        let u = rng.random::<f64>() * self.total();
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.pieces.len() - 1);
        let (location, origin) = match self.pieces[i] {
            Piece::RootAtom => (Location::Root, Origin::Excess),
            Piece::Length(v) => (uniform_on(tree, v, rng), Origin::Length),
            Piece::Density(v) => (uniform_on(tree, v, rng), Origin::Excess),
            Piece::Atom(v, k) => (
                Location::OnEdge { edge: v, offset: tree.edge(v).atoms[k].offset },
                Origin::Excess,
            ),
        };
        PointRef { tree: tree.id(), location, origin }
    }
}

pub(crate) fn uniform_on<R: Rng + ?Sized>(tree: &FiniteRTree, v: usize, rng: &mut R) -> Location {
    Location::OnEdge { edge: v, offset: rng.random::<f64>() * tree.edge(v).length }
}

/// One point drawn from the normalized measure.
pub fn sample_mu<R: Rng + ?Sized>(tree: &FiniteRTree, rng: &mut R) -> Result<PointRef> {
    Ok(MuSampler::new(tree)?.sample(tree, rng))
}

/// Square matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }
}

fn require_probability(tree: &FiniteRTree) -> Result<()> {
    let mass = tree.total_mass();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::NotProbability(mass));
    }
    Ok(())
}

/// Distances between the root (index 0) and `n` independent points from the
/// measure (indices `1..=n`).
pub fn dm_sample<R: Rng + ?Sized>(tree: &FiniteRTree, n: usize, rng: &mut R) -> Result<DistanceMatrix> {
    Ok(epo_sample(tree, n, rng)?.distance_matrix())
}

/// Queries of a strict partial order on `{0, ..., size - 1}`.
pub trait Relation {
    fn size(&self) -> usize;
    fn precedes(&self, i: usize, j: usize) -> bool;
}

/// Dense materialized relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationMatrix {
    size: usize,
    bits: Vec<bool>,
}

impl RelationMatrix {
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                bits.push(f(i, j));
            }
        }
        RelationMatrix { size, bits }
    }
}

impl Relation for RelationMatrix {
    fn size(&self) -> usize {
        self.size
    }

    fn precedes(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.size + j]
    }
}

/// Root plus `n` sampled points; `i` relates to `j` when point `i` is a
/// strict ancestor of point `j` and was drawn from the length measure.
///
/// Queries are answered on demand, so large samples stay cheap.
#[derive(Clone, Debug)]
pub struct EpoSample {
    tree: FiniteRTree,
    points: Vec<Canon>,
    origins: Vec<Origin>,
}

impl EpoSample {
    pub fn origin(&self, i: usize) -> Origin {
        self.origins[i]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.tree.canon_distance(self.points[i], self.points[j])
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        let size = self.points.len();
        let mut data = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                data.push(self.distance(i, j));
            }
        }
        DistanceMatrix { size, data }
    }

    pub fn relation_matrix(&self) -> RelationMatrix {
        RelationMatrix::from_fn(self.points.len(), |i, j| self.precedes(i, j))
    }
}

impl Relation for EpoSample {
    fn size(&self) -> usize {
        self.points.len()
    }

    fn precedes(&self, i: usize, j: usize) -> bool {
        self.origins[i] == Origin::Length && self.tree.canon_precedes(self.points[i], self.points[j])
    }
}

pub fn epo_sample<R: Rng + ?Sized>(tree: &FiniteRTree, n: usize, rng: &mut R) -> Result<EpoSample> {
    require_probability(tree)?;
    let sampler = MuSampler::new(tree)?;
    let mut points = Vec::with_capacity(n + 1);
    let mut origins = Vec::with_capacity(n + 1);
    points.push(Canon::Root);
    origins.push(Origin::Length);
    for _ in 0..n {
        let p = sampler.sample(tree, rng);
        points.push(tree.canon(p.location));
        origins.push(p.origin);
    }
    Ok(EpoSample { tree: tree.clone(), points, origins })
}

/// Estimates the distance between elements `i` and `j` from the relation
/// alone: the fraction of the first `n` sampled elements that lie below
/// exactly one of the two.
pub fn dm_estimate_from_epo(relation: &impl Relation, i: usize, j: usize, n: usize) -> Result<f64> {
    let size = relation.size();
    if i >= size || j >= size || n >= size {
        return Err(Error::Dimension(format!("indices ({i}, {j}, {n}) for relation of size {size}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let count = (1..=n)
        .filter(|&k| k != i && k != j)
        .filter(|&k| relation.precedes(k, i) != relation.precedes(k, j))
        .count();
    Ok(count as f64 / n as f64)
}
