use std::fmt;
use std::sync::{Arc, Mutex};

use crate::discrete::tree::DiscreteTree;
use crate::error::{Error, Result};

/// Produces the decorations of a one-ended tree in spine order.
pub trait DecorationSource: Send {
    fn next_decoration(&mut self) -> DiscreteTree;
}

impl<F: FnMut() -> DiscreteTree + Send> DecorationSource for F {
    fn next_decoration(&mut self) -> DiscreteTree {
        self()
    }
}

struct Stream {
    cache: Vec<Arc<DiscreteTree>>,
    source: Box<dyn DecorationSource>,
}

/// Infinite tree with a single end, given lazily as a spine `0, 1, 2, ...`
/// with a finite decoration hanging from each spine vertex.
///
/// Decoration `k` is rooted at spine vertex `k` and excludes the spine edge
/// towards `k + 1`. Decorations are generated on first access and memoized,
/// so every clone of a value observes the same tree.
#[derive(Clone)]
pub struct OneEndedTree {
    stream: Arc<Mutex<Stream>>,
    offset: usize,
}

impl OneEndedTree {
    pub fn from_source(source: impl DecorationSource + 'static) -> Self {
        OneEndedTree {
            stream: Arc::new(Mutex::new(Stream { cache: Vec::new(), source: Box::new(source) })),
            offset: 0,
        }
    }

    /// The bare ray: every decoration is a single vertex.
    pub fn ray() -> Self {
        Self::from_source(DiscreteTree::single)
    }

    /// Tree whose decorations are the given trees followed by single vertices.
    pub fn from_decorations(front: Vec<DiscreteTree>) -> Self {
        let mut rest = front.into_iter();
        Self::from_source(move || rest.next().unwrap_or_default())
    }

    pub fn decoration(&self, k: usize) -> Arc<DiscreteTree> {
        let idx = self.offset + k;
        let mut stream = self.stream.lock().expect("decoration stream poisoned");
        while stream.cache.len() <= idx {
            let next = stream.source.next_decoration();
            stream.cache.push(Arc::new(next));
        }
        Arc::clone(&stream.cache[idx])
    }

    /// Shift along the spine: the new root is spine vertex 1 and the old
    /// root with its decoration is dropped.
    pub fn theta_shift(&self) -> Self {
        self.shifted(1)
    }

    pub fn shifted(&self, steps: usize) -> Self {
        OneEndedTree { stream: Arc::clone(&self.stream), offset: self.offset + steps }
    }

    /// Ball of radius `k` around the root, as a finite tree.
    pub fn truncate(&self, k: usize) -> DiscreteTree {
        let mut out = DiscreteTree::single();
        let mut tip = 0;
        for i in 0..=k {
            if i > 0 {
                tip = out.push_child(tip);
            }
            out.graft(tip, &self.decoration(i).truncate(k - i));
        }
        out
    }

    /// Spine vertices `0..=n` with their full decorations.
    pub fn spine_prefix(&self, n: usize) -> DiscreteTree {
        let mut out = DiscreteTree::single();
        let mut tip = 0;
        for i in 0..=n {
            if i > 0 {
                tip = out.push_child(tip);
            }
            out.graft(tip, &self.decoration(i));
        }
        out
    }
}

impl fmt::Debug for OneEndedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cached = self.stream.lock().map(|s| s.cache.len()).unwrap_or(0);
        f.debug_struct("OneEndedTree")
            .field("offset", &self.offset)
            .field("materialized", &cached)
            .finish()
    }
}

/// Anything that can be cut down to a finite ball around its root.
/// `None` asks for the whole tree, which only finite trees can provide.
pub trait Truncate {
    fn truncate_to(&self, depth: Option<usize>) -> Result<DiscreteTree>;
}

impl Truncate for DiscreteTree {
    fn truncate_to(&self, depth: Option<usize>) -> Result<DiscreteTree> {
        Ok(match depth {
            Some(k) => self.truncate(k),
            None => self.clone(),
        })
    }
}

impl Truncate for OneEndedTree {
    fn truncate_to(&self, depth: Option<usize>) -> Result<DiscreteTree> {
        depth
            .map(|k| self.truncate(k))
            .ok_or_else(|| Error::Unsupported("a one-ended tree needs a truncation depth".into()))
    }
}
