//! Small named trees used by the checks and the command-line tool.

use crate::rtree::{Edge, FiniteRTree};

/// Root, one unit edge, then two unit edges below it; the second carries an
/// atom of mass 0.5 at its midpoint. Total mass 3.5.
pub fn branch_with_atom() -> FiniteRTree {
    let mut t = FiniteRTree::point();
    let a = t.add_edge(0, Edge::new(1.0)).expect("valid edge");
    t.add_edge(a, Edge::new(1.0)).expect("valid edge");
    t.add_edge(a, Edge::new(1.0).with_atom(0.5, 0.5)).expect("valid edge");
    t
}

/// Segment of length 0.5 with an atom of mass 0.5 at its far end; unit mass.
pub fn segment_with_end_atom() -> FiniteRTree {
    let mut t = FiniteRTree::point();
    t.add_edge(0, Edge::new(0.5).with_atom(0.5, 0.5)).expect("valid edge");
    t
}
