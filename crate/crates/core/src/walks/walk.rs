use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dart, EmbeddedGraph};

/// A sequence of directed edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DirectedWalk {
    darts: Vec<Dart>,
    closed: bool,
}

impl DirectedWalk {
    /// Validates adjacency, and for a closed walk the return to the start.
    pub fn new(g: &EmbeddedGraph, darts: Vec<Dart>, closed: bool) -> Result<DirectedWalk> {
        if darts.is_empty() {
            return Err(Error::Precondition("empty walk".into()));
        }
        if darts.iter().any(|d| d.edge() >= g.num_edges()) {
            return Err(Error::Precondition("dart outside the graph".into()));
        }
        for w in darts.windows(2) {
            if g.head(w[0]) != g.tail(w[1]) {
                return Err(Error::Precondition("consecutive darts do not meet".into()));
            }
        }
        if closed && g.head(*darts.last().unwrap()) != g.tail(darts[0]) {
            return Err(Error::Precondition("walk does not return to its start".into()));
        }
        Ok(DirectedWalk { darts, closed })
    }

    /// A closed walk through the given vertex indices (first == last), using
    /// the unique edge between consecutive vertices.
    pub fn closed_through(g: &EmbeddedGraph, vertices: &[usize]) -> Result<DirectedWalk> {
        let darts = vertices
            .windows(2)
            .map(|w| {
                let mut it = g.rotation(w[0]).iter().filter(|&&d| g.head(d) == w[1]);
                match (it.next(), it.next()) {
                    (Some(&d), None) => Ok(d),
                    (None, _) => Err(Error::Precondition("vertices are not adjacent".into())),
                    _ => Err(Error::Precondition("ambiguous parallel edges".into())),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        DirectedWalk::new(g, darts, true)
    }

    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }
    pub fn into_darts(self) -> Vec<Dart> {
        self.darts
    }
    pub fn is_closed(&self) -> bool {
        self.closed
    }
    pub fn len(&self) -> usize {
        self.darts.len()
    }
    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    /// No immediate reversal, including across the closing step of a closed walk.
    pub fn is_non_backtracking(&self) -> bool {
        let n = self.darts.len();
        let steps = if self.closed { n } else { n - 1 };
        (0..steps).all(|i| self.darts[(i + 1) % n] != self.darts[i].rev())
    }

    /// Sorted undirected edge indices with multiplicity.
    pub fn edge_multiset(&self) -> Vec<usize> {
        edge_multiset(&self.darts)
    }

    pub fn reversed(&self) -> DirectedWalk {
        DirectedWalk {
            darts: self.darts.iter().rev().map(|d| d.rev()).collect(),
            closed: self.closed,
        }
    }

    /// Cyclic shift of a closed walk by `k` positions.
    pub fn shifted(&self, k: usize) -> DirectedWalk {
        let n = self.darts.len();
        DirectedWalk {
            darts: (0..n).map(|i| self.darts[(i + k) % n]).collect(),
            closed: self.closed,
        }
    }

    pub fn is_edge_simple(&self) -> bool {
        let m = self.edge_multiset();
        m.windows(2).all(|w| w[0] != w[1])
    }
}

pub fn edge_multiset(darts: &[Dart]) -> Vec<usize> {
    let mut m: Vec<usize> = darts.iter().map(|d| d.edge()).collect();
    m.sort_unstable();
    m
}
