use std::fmt;

use crate::discrete::code::CanonicalCode;
use crate::error::{Error, Result};

/// Finite rooted unordered tree stored as a parent array.
///
/// Vertex labels carry no meaning beyond identity; two trees are the same
/// object up to isomorphism iff their [`CanonicalCode`]s agree.
#[derive(Clone, Debug)]
pub struct DiscreteTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
    // every vertex appears after its parent
    order: Vec<usize>,
}

impl DiscreteTree {
    /// The one-vertex tree.
    pub fn single() -> Self {
        DiscreteTree {
            parent: vec![None],
            children: vec![Vec::new()],
            root: 0,
            order: vec![0],
        }
    }

    /// Path with `edges` edges hanging from the root.
    pub fn path(edges: usize) -> Self {
        let mut t = Self::single();
        let mut tip = 0;
        for _ in 0..edges {
            tip = t.push_child(tip);
        }
        t
    }

    /// Root with `leaves` leaf children.
    pub fn star(leaves: usize) -> Self {
        let mut t = Self::single();
        for _ in 0..leaves {
            t.push_child(0);
        }
        t
    }

    /// Builds a tree from parent references; exactly one entry must be `None`.
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        let mut root = None;
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            match *p {
                None if root.is_some() => {
                    return Err(Error::InvalidTree("more than one root".into()))
                }
                None => root = Some(v),
                Some(u) if u >= n => {
                    return Err(Error::InvalidTree(format!("parent {u} out of range")))
                }
                Some(u) => children[u].push(v),
            }
        }
        let root = root.ok_or_else(|| Error::InvalidTree("no root".into()))?;
        let mut order = Vec::with_capacity(n);
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            order.extend_from_slice(&children[v]);
        }
        if order.len() != n {
            return Err(Error::InvalidTree("parent references contain a cycle".into()));
        }
        Ok(DiscreteTree { parent, children, root, order })
    }

    pub fn parse(text: &str) -> Result<Self> {
        CanonicalCode::parse(text)
    }

    /// Appends a new leaf below `parent` and returns its index.
    pub fn push_child(&mut self, parent: usize) -> usize {
        assert!(parent < self.len(), "parent {parent} out of range");
        let v = self.parent.len();
        self.parent.push(Some(parent));
        self.children.push(Vec::new());
        self.children[parent].push(v);
        self.order.push(v);
        v
    }

    /// Copies `other` into `self`, identifying the root of `other` with `at`.
    pub fn graft(&mut self, at: usize, other: &DiscreteTree) {
        let mut image = vec![usize::MAX; other.len()];
        image[other.root] = at;
        for &v in &other.order[1..] {
            let p = other.parent[v].expect("non-root vertex has a parent");
            image[v] = self.push_child(image[p]);
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.len() - 1
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Vertices with every parent listed before its children.
    pub fn top_down(&self) -> &[usize] {
        &self.order
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.len()];
        for &v in &self.order[1..] {
            depth[v] = depth[self.parent[v].unwrap()] + 1;
        }
        depth
    }

    /// Distance from each vertex to its deepest descendant.
    pub fn heights(&self) -> Vec<usize> {
        let mut height = vec![0; self.len()];
        for &v in self.order.iter().rev() {
            if let Some(p) = self.parent[v] {
                height[p] = height[p].max(height[v] + 1);
            }
        }
        height
    }

    pub fn height(&self) -> usize {
        self.heights()[self.root]
    }

    pub fn code(&self) -> CanonicalCode {
        CanonicalCode::of(self)
    }

    pub fn is_isomorphic(&self, other: &DiscreteTree) -> bool {
        self.len() == other.len() && self.code() == other.code()
    }

    /// Subtree induced by the vertices within distance `k` of the root.
    pub fn truncate(&self, k: usize) -> DiscreteTree {
        let depth = self.depths();
        let mut out = DiscreteTree::single();
        let mut image = vec![usize::MAX; self.len()];
        image[self.root] = 0;
        for &v in &self.order[1..] {
            if depth[v] <= k {
                image[v] = out.push_child(image[self.parent[v].unwrap()]);
            }
        }
        out
    }
}

impl Default for DiscreteTree {
    fn default() -> Self {
        Self::single()
    }
}

impl fmt::Display for DiscreteTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.code().fmt(f)
    }
}
