//! Edge subsets, the cycle space and even-subgraph generating functions.

use serde::Serialize;

use crate::error::{cap, Error, Result};
use crate::graph::EmbeddedGraph;

/// Default enumeration cap on |E| for even-subgraph sums.
pub const EVEN_EDGE_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeSubset {
    words: Vec<u64>,
    len: usize,
}

impl EdgeSubset {
    pub fn empty(len: usize) -> EdgeSubset {
        EdgeSubset {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }
    pub fn from_edges(len: usize, edges: impl IntoIterator<Item = usize>) -> EdgeSubset {
        let mut s = EdgeSubset::empty(len);
        for e in edges {
            s.insert(e);
        }
        s
    }
    /// Subset from the low bits of a mask (|E| ≤ 64).
    pub fn from_mask(len: usize, mask: u64) -> EdgeSubset {
        let mut s = EdgeSubset::empty(len);
        if len > 0 {
            s.words[0] = mask;
        }
        s
    }
    pub fn universe(&self) -> usize {
        self.len
    }
    pub fn contains(&self, e: usize) -> bool {
        e < self.len && self.words[e / 64] >> (e % 64) & 1 == 1
    }
    pub fn insert(&mut self, e: usize) {
        assert!(e < self.len, "edge {e} outside subset universe");
        self.words[e / 64] |= 1 << (e % 64);
    }
    pub fn toggle(&mut self, e: usize) {
        assert!(e < self.len, "edge {e} outside subset universe");
        self.words[e / 64] ^= 1 << (e % 64);
    }
    pub fn symmetric_difference(&self, other: &EdgeSubset) -> EdgeSubset {
        assert_eq!(self.len, other.len);
        EdgeSubset {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
            len: self.len,
        }
    }
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&e| self.contains(e))
    }
    pub fn mask(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }
}

/// Degree of every vertex in the subgraph H.
pub fn degrees(g: &EmbeddedGraph, h: &EdgeSubset) -> Vec<usize> {
    let mut deg = vec![0; g.num_vertices()];
    for e in h.iter() {
        deg[g.edges()[e].u] += 1;
        deg[g.edges()[e].v] += 1;
    }
    deg
}

pub fn is_even(g: &EmbeddedGraph, h: &EdgeSubset) -> bool {
    degrees(g, h).iter().all(|d| d % 2 == 0)
}

/// Fundamental cycles of a BFS spanning forest.
pub fn cycle_space_basis(g: &EmbeddedGraph) -> Vec<EdgeSubset> {
    let n = g.num_vertices();
    let m = g.num_edges();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut tree = vec![false; m];
    for s in 0..n {
        if depth[s] != usize::MAX {
            continue;
        }
        depth[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &d in g.rotation(v) {
                let w = g.head(d);
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = Some((v, d.edge()));
                    tree[d.edge()] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let mut basis = Vec::new();
    for e in 0..m {
        if tree[e] {
            continue;
        }
        let mut c = EdgeSubset::empty(m);
        c.insert(e);
        let (mut a, mut b) = (g.edges()[e].u, g.edges()[e].v);
        while a != b {
            if depth[a] >= depth[b] {
                let (p, pe) = parent[a].expect("non-root has a parent");
                c.toggle(pe);
                a = p;
            } else {
                let (p, pe) = parent[b].expect("non-root has a parent");
                c.toggle(pe);
                b = p;
            }
        }
        basis.push(c);
    }
    basis
}

/// Visits every even subgraph as a bitmask (Gray-code order over the basis).
pub fn for_each_even_mask(g: &EmbeddedGraph, edge_cap: usize, mut f: impl FnMut(u64)) -> Result<()> {
    cap("|E| for even-subgraph enumeration", g.num_edges(), edge_cap.min(64))?;
    let basis: Vec<u64> = cycle_space_basis(g).iter().map(|c| c.mask()).collect();
    let mut mask = 0u64;
    f(mask);
    for i in 1u64..(1u64 << basis.len()) {
        mask ^= basis[i.trailing_zeros() as usize];
        f(mask);
    }
    Ok(())
}

/// All even subgraphs, in Gray-code order starting from the empty set.
pub fn even_subgraphs(g: &EmbeddedGraph, edge_cap: usize) -> Result<Vec<EdgeSubset>> {
    let mut out = Vec::new();
    for_each_even_mask(g, edge_cap, |m| out.push(EdgeSubset::from_mask(g.num_edges(), m)))?;
    Ok(out)
}

fn mask_product(mask: u64, k: &[f64]) -> f64 {
    let mut p = 1.0;
    let mut m = mask;
    while m != 0 {
        p *= k[m.trailing_zeros() as usize];
        m &= m - 1;
    }
    p
}

/// Σ over even subgraphs H of Π_{e∈H} K_e.
pub fn even_subgraph_gf(g: &EmbeddedGraph, k: &[f64]) -> Result<f64> {
    even_subgraph_gf_capped(g, k, EVEN_EDGE_CAP)
}

pub fn even_subgraph_gf_capped(g: &EmbeddedGraph, k: &[f64], edge_cap: usize) -> Result<f64> {
    if k.len() != g.num_edges() {
        return Err(Error::Precondition("one coupling per edge required".into()));
    }
    let mut total = 0.0;
    for_each_even_mask(g, edge_cap, |m| total += mask_product(m, k))?;
    Ok(total)
}

/// Number of even subgraphs with j edges, for j = 0..=|E|.
pub fn even_subgraph_counts(g: &EmbeddedGraph) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; g.num_edges() + 1];
    for_each_even_mask(g, EVEN_EDGE_CAP, |m| counts[m.count_ones() as usize] += 1)?;
    Ok(counts)
}
