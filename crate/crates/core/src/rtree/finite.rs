use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{check_half_open_unit, check_positive, Error, Result};

/// Point mass sitting on an edge, `offset` measured from the root-side end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub offset: f64,
    pub mass: f64,
}

/// Skeleton edge with uniform excess density and point masses.
///
/// On the edge the measure is `(1 + density)` times length plus the atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub length: f64,
    pub density: f64,
    pub atoms: Vec<Atom>,
}

impl Edge {
    pub fn new(length: f64) -> Self {
        Edge { length, density: 0.0, atoms: Vec::new() }
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn with_atom(mut self, offset: f64, mass: f64) -> Self {
        self.atoms.push(Atom { offset, mass });
        self
    }

    pub fn excess(&self) -> f64 {
        self.length * self.density + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    pub fn mass(&self) -> f64 {
        self.length + self.excess()
    }

    fn validate(&self) -> Result<()> {
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidTree(format!("edge length {}", self.length)));
        }
        if !(self.density >= 0.0 && self.density.is_finite()) {
            return Err(Error::InvalidTree(format!("edge density {}", self.density)));
        }
        for a in &self.atoms {
            if !(a.offset >= 0.0 && a.offset <= self.length) {
                return Err(Error::InvalidTree(format!(
                    "atom offset {} outside [0, {}]",
                    a.offset, self.length
                )));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(Error::InvalidTree(format!("atom mass {}", a.mass)));
            }
        }
        Ok(())
    }
}

/// Identity of a tree value; point references carry it so that points of
/// one tree are rejected by another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TreeId(u64);

impl TreeId {
    fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        TreeId(NEXT.fetch_add(1, Ordering::Relaxed))
    }
}

/// Compact measured real tree: a finite skeleton with edge lengths, a
/// measure dominating length, and an optional atom at the root.
///
/// Vertex 0 is the root. Vertex `v > 0` is the lower end of edge `v`, and
/// every parent index is smaller than its child's.
#[derive(Clone, Debug)]
pub struct FiniteRTree {
    id: TreeId,
    parent: Vec<usize>,
    edges: Vec<Edge>,
    depth: Vec<f64>,
    root_atom: f64,
}

impl PartialEq for FiniteRTree {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent && self.edges == other.edges && self.root_atom == other.root_atom
    }
}

impl Default for FiniteRTree {
    fn default() -> Self {
        Self::point()
    }
}

impl FiniteRTree {
    /// The one-point tree with zero mass.
    pub fn point() -> Self {
        FiniteRTree {
            id: TreeId::fresh(),
            parent: vec![usize::MAX],
            edges: vec![Edge::new(0.0)],
            depth: vec![0.0],
            root_atom: 0.0,
        }
    }

    pub fn with_root_atom(mass: f64) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidTree(format!("root atom {mass}")));
        }
        let mut t = Self::point();
        t.root_atom = mass;
        Ok(t)
    }

    /// Single edge of the given length with length measure.
    pub fn segment(length: f64) -> Result<Self> {
        let mut t = Self::point();
        t.add_edge(0, Edge::new(length))?;
        Ok(t)
    }

    pub fn add_edge(&mut self, parent: usize, edge: Edge) -> Result<usize> {
        if parent >= self.vertex_count() {
            return Err(Error::InvalidTree(format!("parent vertex {parent} out of range")));
        }
        edge.validate()?;
        self.depth.push(self.depth[parent] + edge.length);
        self.parent.push(parent);
        self.edges.push(edge);
        Ok(self.edges.len() - 1)
    }

    pub(crate) fn add_root_atom(&mut self, mass: f64) {
        self.root_atom += mass;
    }

    pub fn id(&self) -> TreeId {
        self.id
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn edge_count(&self) -> usize {
        self.parent.len() - 1
    }

    /// Edge above vertex `v`, for `v >= 1`.
    pub fn edge(&self, v: usize) -> &Edge {
        assert!(v >= 1 && v < self.vertex_count(), "no edge above vertex {v}");
        &self.edges[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().skip(1)
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v > 0).then(|| self.parent[v])
    }

    /// Distance of vertex `v` from the root.
    pub fn depth(&self, v: usize) -> f64 {
        self.depth[v]
    }

    pub fn root_atom(&self) -> f64 {
        self.root_atom
    }

    /// `u` lies on the path from the root to `v` (inclusive).
    pub fn is_vertex_ancestor(&self, u: usize, mut v: usize) -> bool {
        while v > u {
            v = self.parent[v];
        }
        u == v
    }

    pub fn lowest_common_ancestor(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if u > v {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    pub fn total_length(&self) -> f64 {
        self.edges().map(|(_, e)| e.length).sum()
    }

    /// Mass in excess of length: densities times lengths plus all atoms.
    pub fn total_excess(&self) -> f64 {
        self.root_atom + self.edges().map(|(_, e)| e.excess()).sum::<f64>()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_length() + self.total_excess()
    }

    /// Height of the subtree below every vertex.
    pub fn heights(&self) -> Vec<f64> {
        let mut h = vec![0.0f64; self.vertex_count()];
        for v in (1..self.vertex_count()).rev() {
            let up = self.parent[v];
            h[up] = h[up].max(h[v] + self.edges[v].length);
        }
        h
    }

    pub fn height(&self) -> f64 {
        self.heights()[0]
    }

    /// Copies `other` into `self`, identifying its root with vertex `at`.
    pub fn graft(&mut self, at: usize, other: &FiniteRTree) {
        assert!(at < self.vertex_count(), "graft vertex {at} out of range");
        if other.root_atom > 0.0 {
            if at == 0 {
                self.root_atom += other.root_atom;
            } else {
                let len = self.edges[at].length;
                self.edges[at].atoms.push(Atom { offset: len, mass: other.root_atom });
            }
        }
        let mut image = vec![at; other.vertex_count()];
        for v in 1..other.vertex_count() {
            image[v] = self
                .add_edge(image[other.parent[v]], other.edges[v].clone())
                .expect("edges of a valid tree stay valid");
        }
    }

    /// Multiplies distances and mass by `x`; densities are unchanged.
    pub fn scale(&self, x: f64) -> Result<FiniteRTree> {
        check_positive("scale", x)?;
        let mut out = self.clone();
        out.id = TreeId::fresh();
        out.root_atom *= x;
        for (d, e) in out.depth.iter_mut().zip(out.edges.iter_mut()) {
            *d *= x;
            e.length *= x;
            for a in &mut e.atoms {
                a.offset *= x;
                a.mass *= x;
            }
        }
        Ok(out)
    }

    /// Closed ball of radius `r` around the root.
    pub fn truncate_r(&self, r: f64) -> Result<FiniteRTree> {
        if !(r >= 0.0) {
            return Err(Error::Parameter { name: "radius", value: r, range: "[0, inf)" });
        }
        let n = self.vertex_count();
        let mut clipped: Vec<Option<Edge>> = vec![None; n];
        for v in 1..n {
            let up = self.parent[v];
            if up != 0 && clipped[up].is_none() {
                continue;
            }
            let start = self.depth[up];
            if start > r {
                continue;
            }
            let e = &self.edges[v];
            let length = e.length.min(r - start);
            let atoms = e.atoms.iter().copied().filter(|a| a.offset <= length).collect();
            clipped[v] = Some(Edge { length, density: e.density, atoms });
        }
        // drop empty stubs created at the boundary
        let mut has_child = vec![false; n];
        for v in (1..n).rev() {
            let stub = match &clipped[v] {
                Some(e) => !has_child[v] && e.atoms.is_empty() && self.depth[self.parent[v]] >= r,
                None => false,
            };
            if stub {
                clipped[v] = None;
            }
            if clipped[v].is_some() {
                has_child[self.parent[v]] = true;
            }
        }
        let mut out = FiniteRTree::with_root_atom(self.root_atom)?;
        let mut image = vec![0usize; n];
        for v in 1..n {
            if let Some(e) = clipped[v].take() {
                image[v] = out.add_edge(image[self.parent[v]], e)?;
            }
        }
        Ok(out)
    }

    /// Rescaling with distinct factors on and off the spine.
    ///
    /// Lengths are multiplied by `q` on the spine and by `p` elsewhere, and
    /// the measure becomes `p * mu + (q - p) * length|spine`. So atoms scale by
    /// `p`, off-spine densities are unchanged and spine densities become
    /// `density * p / q`.
    pub fn rescale(&self, p: f64, q: f64, mode: RescaleMode) -> Result<FiniteRTree> {
        check_half_open_unit("p", p)?;
        check_half_open_unit("q", q)?;
        if p == 1.0 && q == 1.0 {
            return Ok(self.clone());
        }
        match mode {
            RescaleMode::ExactSpine => self.scale(p),
            RescaleMode::Horizon(horizon) => self.rescale_horizon(p, q, horizon),
        }
    }

    fn rescale_horizon(&self, p: f64, q: f64, horizon: f64) -> Result<FiniteRTree> {
        if !(horizon >= 0.0) {
            return Err(Error::Parameter { name: "horizon", value: horizon, range: "[0, inf)" });
        }
        let heights = self.heights();
        let mut out = FiniteRTree::with_root_atom(p * self.root_atom)?;
        let mut image = vec![0usize; self.vertex_count()];
        for (v, e) in self.edges() {
            // points at offset s on this edge reach distance len - s + h(v)
            let spine = (e.length + heights[v] - horizon).clamp(0.0, e.length);
            let mut top = image[self.parent[v]];
            let scaled_atom = |a: &Atom, shift: f64, factor: f64| Atom {
                offset: ((a.offset - shift) * factor).max(0.0),
                mass: p * a.mass,
            };
            if spine > 0.0 {
                let upper_len = q * spine;
                let upper = Edge {
                    length: upper_len,
                    density: e.density * p / q,
                    atoms: e
                        .atoms
                        .iter()
                        .filter(|a| a.offset <= spine)
                        .map(|a| Atom { offset: (q * a.offset).min(upper_len), mass: p * a.mass })
                        .collect(),
                };
                top = out.add_edge(top, upper)?;
            }
            if spine < e.length {
                let lower_len = p * (e.length - spine);
                let lower = Edge {
                    length: lower_len,
                    density: e.density,
                    atoms: e
                        .atoms
                        .iter()
                        .filter(|a| spine == 0.0 || a.offset > spine)
                        .map(|a| {
                            let mut s = scaled_atom(a, spine, p);
                            s.offset = s.offset.min(lower_len);
                            s
                        })
                        .collect(),
                };
                top = out.add_edge(top, lower)?;
            }
            image[v] = top;
        }
        Ok(out)
    }
}

/// Spine convention for [`FiniteRTree::rescale`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RescaleMode {
    /// The spine of a finite tree is its root, so every length scales by `p`.
    ExactSpine,
    /// Points with a descendant at distance at least `R` count as spine.
    Horizon(f64),
}

impl fmt::Display for FiniteRTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut children = vec![Vec::new(); self.vertex_count()];
        for v in 1..self.vertex_count() {
            children[self.parent[v]].push(v);
        }
        fn edge(t: &FiniteRTree, kids: &[Vec<usize>], v: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let e = &t.edges[v];
            write!(f, "(len={:.16e} dens={:.16e} atoms=[", e.length, e.density)?;
            for (i, a) in e.atoms.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{:.16e}:{:.16e}", a.offset, a.mass)?;
            }
            f.write_str("]")?;
            for &c in &kids[v] {
                f.write_str(" ")?;
                edge(t, kids, c, f)?;
            }
            f.write_str(")")
        }
        write!(f, "tree{{ rootatom={:.16e}", self.root_atom)?;
        for &c in &children[0] {
            f.write_str(" ")?;
            edge(self, &children, c, f)?;
        }
        f.write_str(" }")
    }
}

impl std::str::FromStr for FiniteRTree {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        TextParser { s: text.as_bytes(), pos: 0 }.tree()
    }
}

struct TextParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl TextParser<'_> {
    fn fail<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse(format!("{what} at byte {}", self.pos)))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.s[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            Ok(())
        } else {
            self.fail(&format!("expected {token:?}"))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && matches!(self.s[self.pos], b'0'..=b'9' | b'.' | b'e' | b'E' | b'+' | b'-' | b'i' | b'n' | b'f')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ASCII digits");
        text.parse().or_else(|_| self.fail(&format!("bad number {text:?}")))
    }

    fn tree(mut self) -> Result<FiniteRTree> {
        self.eat("tree{")?;
        self.eat("rootatom=")?;
        let mut out = FiniteRTree::with_root_atom(self.number()?)?;
        while self.peek() == Some(b'(') {
            self.edge(&mut out, 0)?;
        }
        self.eat("}")?;
        self.skip_ws();
        if self.pos != self.s.len() {
            return self.fail("trailing input");
        }
        Ok(out)
    }

    fn edge(&mut self, out: &mut FiniteRTree, parent: usize) -> Result<()> {
        self.eat("(")?;
        self.eat("len=")?;
        let length = self.number()?;
        self.eat("dens=")?;
        let density = self.number()?;
        self.eat("atoms=[")?;
        let mut atoms = Vec::new();
        while self.peek() != Some(b']') {
            if !atoms.is_empty() {
                self.eat(",")?;
            }
            let offset = self.number()?;
            self.eat(":")?;
            atoms.push(Atom { offset, mass: self.number()? });
        }
        self.eat("]")?;
        let v = out.add_edge(parent, Edge { length, density, atoms })?;
        while self.peek() == Some(b'(') {
            self.edge(out, v)?;
        }
        self.eat(")")
    }
}
