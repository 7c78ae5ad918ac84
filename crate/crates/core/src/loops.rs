//! Loops, star matchings with crossing signs, decompositions of even
//! subgraphs into edge-disjoint loops, and their weights.

use serde::Serialize;

use crate::error::{cap, Error, Result};
use crate::geometry::{self, HomologyClass};
use crate::graph::{Dart, EmbeddedGraph};
use crate::subgraph::{self, EdgeSubset};

/// Cap on |E(H)| for decomposition enumeration.
pub const DECOMPOSITION_EDGE_CAP: usize = 20;

/// A closed edge-simple walk up to cyclic shift and reversal.
///
/// The stored representative starts at the smallest edge id; of the two
/// orientations, the one whose edge-id sequence is lexicographically
/// smaller is kept (ties broken on darts).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Loop {
    darts: Vec<Dart>,
}

fn rotate_to(darts: &[Dart], start: usize) -> Vec<Dart> {
    darts[start..].iter().chain(&darts[..start]).copied().collect()
}

/// The reversed traversal of a closed walk.
pub fn reverse_walk(darts: &[Dart]) -> Vec<Dart> {
    darts.iter().rev().map(|d| d.rev()).collect()
}

impl Loop {
    /// Canonicalizes a closed edge-simple walk.
    pub fn new(g: &EmbeddedGraph, darts: &[Dart]) -> Result<Loop> {
        if darts.is_empty() {
            return Err(Error::Precondition("a loop needs at least one edge".into()));
        }
        let n = darts.len();
        for i in 0..n {
            if g.head(darts[i]) != g.tail(darts[(i + 1) % n]) {
                return Err(Error::Precondition("loop is not a closed walk".into()));
            }
        }
        let mut edges: Vec<usize> = darts.iter().map(|d| d.edge()).collect();
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("loop repeats an edge".into()));
        }
        Ok(Loop::canonical(darts))
    }

    /// Canonical form without validation.
    pub(crate) fn canonical(darts: &[Dart]) -> Loop {
        let emin = darts.iter().map(|d| d.edge()).min().expect("nonempty");
        let fwd = {
            let i = darts.iter().position(|d| d.edge() == emin).unwrap();
            rotate_to(darts, i)
        };
        let bwd = {
            let r = reverse_walk(darts);
            let i = r.iter().position(|d| d.edge() == emin).unwrap();
            rotate_to(&r, i)
        };
        let key = |w: &Vec<Dart>| (w.iter().map(|d| d.edge()).collect::<Vec<_>>(), w.clone());
        let darts = if key(&fwd) <= key(&bwd) { fwd } else { bwd };
        Loop { darts }
    }

    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }
    pub fn len(&self) -> usize {
        self.darts.len()
    }
    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }
    /// Sorted edge indices.
    pub fn edges(&self) -> Vec<usize> {
        let mut e: Vec<usize> = self.darts.iter().map(|d| d.edge()).collect();
        e.sort_unstable();
        e
    }
    pub fn contains_edge(&self, e: usize) -> bool {
        self.darts.iter().any(|d| d.edge() == e)
    }
    pub fn shares_edge(&self, other: &Loop) -> bool {
        self.darts.iter().any(|d| other.contains_edge(d.edge()))
    }
    /// The traversal of this loop that starts with dart `d`, if it contains
    /// `d` in either orientation.
    pub fn rooted_at(&self, d: Dart) -> Option<Vec<Dart>> {
        if let Some(i) = self.darts.iter().position(|&x| x == d) {
            return Some(rotate_to(&self.darts, i));
        }
        let r = reverse_walk(&self.darts);
        let i = r.iter().position(|&x| x == d)?;
        Some(rotate_to(&r, i))
    }
    /// All 2·|C| rooted, oriented traversals.
    pub fn traversals(&self) -> Vec<Vec<Dart>> {
        let r = reverse_walk(&self.darts);
        (0..self.len())
            .flat_map(|i| [rotate_to(&self.darts, i), rotate_to(&r, i)])
            .collect()
    }
    pub fn edge_set(&self, g: &EmbeddedGraph) -> EdgeSubset {
        EdgeSubset::from_edges(g.num_edges(), self.darts.iter().map(|d| d.edge()))
    }
}

/// A perfect matching of the half-edges of H at one vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarMatching {
    pub vertex: usize,
    /// Matched pairs of edge indices.
    pub pairs: Vec<(usize, usize)>,
    pub crossings: usize,
}

impl StarMatching {
    /// Partner of edge `e` in this matching.
    pub fn partner(&self, e: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == e {
                Some(b)
            } else if b == e {
                Some(a)
            } else {
                None
            }
        })
    }
}

/// All perfect matchings of `0..d` as index pairs.
pub fn perfect_matchings(d: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(rest: &[usize], cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        let first = rest[0];
        for i in 1..rest.len() {
            let mut remaining: Vec<usize> = rest[1..].to_vec();
            let partner = remaining.remove(i - 1);
            cur.push((first, partner));
            rec(&remaining, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d.is_multiple_of(2) {
        rec(&(0..d).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    }
    out
}

/// Number of interleaved pairs, with slots given as positions in a cyclic order.
pub fn interleavings(pairs: &[(usize, usize)]) -> usize {
    let mut count = 0;
    for i in 0..pairs.len() {
        let (lo, hi) = (pairs[i].0.min(pairs[i].1), pairs[i].0.max(pairs[i].1));
        for q in &pairs[i + 1..] {
            let inside = |x: usize| lo < x && x < hi;
            if inside(q.0) != inside(q.1) {
                count += 1;
            }
        }
    }
    count
}

pub fn star_matchings(g: &EmbeddedGraph, h: &EdgeSubset, v: usize) -> Result<Vec<StarMatching>> {
    // incident H-edges in rotation order
    let slots: Vec<usize> = g
        .rotation(v)
        .iter()
        .map(|d| d.edge())
        .filter(|&e| h.contains(e))
        .collect();
    if !slots.len().is_multiple_of(2) {
        return Err(Error::OddDegree(g.vertices()[v].id));
    }
    Ok(perfect_matchings(slots.len())
        .into_iter()
        .map(|m| StarMatching {
            vertex: v,
            crossings: interleavings(&m),
            pairs: m.iter().map(|&(a, b)| (slots[a], slots[b])).collect(),
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct PfaffianReport {
    pub degree: usize,
    pub matchings: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
    pub ok: bool,
}

/// Σ_M (−1)^{cr(M)} Π_{(i,j)∈M} √(K_i K_j) against Π_i √K_i, for `d`
/// half-edges in cyclic order.
pub fn pfaffian_check(k: &[f64]) -> Result<PfaffianReport> {
    let d = k.len();
    if ![2, 4, 6, 8].contains(&d) {
        return Err(Error::Precondition("degree must be 2, 4, 6 or 8".into()));
    }
    if k.iter().any(|&x| x <= 0.0) {
        return Err(Error::Precondition("weights must be positive".into()));
    }
    let ms = perfect_matchings(d);
    let lhs: f64 = ms
        .iter()
        .map(|m| {
            let sign = if interleavings(m).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * m.iter().map(|&(i, j)| (k[i] * k[j]).sqrt()).product::<f64>()
        })
        .sum();
    let rhs: f64 = k.iter().map(|x| x.sqrt()).product();
    let rel = (lhs - rhs).abs() / rhs.abs();
    Ok(PfaffianReport {
        degree: d,
        matchings: ms.len(),
        lhs,
        rhs,
        relative_error: rel,
        ok: rel <= 1e-12,
    })
}

/// A set of pairwise edge-disjoint loops, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Decomposition {
    pub loops: Vec<Loop>,
}

impl Decomposition {
    pub fn edges(&self, g: &EmbeddedGraph) -> EdgeSubset {
        EdgeSubset::from_edges(g.num_edges(), self.loops.iter().flat_map(|l| l.edges()))
    }
}

/// Builds the loops of a choice of one star matching per vertex.
pub fn follow_matchings(g: &EmbeddedGraph, h: &EdgeSubset, choice: &[&StarMatching]) -> Result<Decomposition> {
    let mut at = vec![None; g.num_vertices()];
    for m in choice {
        at[m.vertex] = Some(*m);
    }
    let mut used = EdgeSubset::empty(g.num_edges());
    let mut loops = Vec::new();
    for e in h.iter() {
        if used.contains(e) {
            continue;
        }
        let start = Dart::new(e, false);
        let mut walk = Vec::new();
        let mut d = start;
        loop {
            walk.push(d);
            used.insert(d.edge());
            let v = g.head(d);
            let m = at[v].ok_or_else(|| Error::Precondition("missing star matching".into()))?;
            let f = m
                .partner(d.edge())
                .ok_or_else(|| Error::Precondition("edge not matched".into()))?;
            d = g.dart_from(v, f).expect("matched edge is incident");
            if d == start {
                break;
            }
        }
        loops.push(Loop::new(g, &walk)?);
    }
    loops.sort();
    Ok(Decomposition { loops })
}

/// Every decomposition of the even subgraph H, one per choice of star matchings.
pub fn decompositions(g: &EmbeddedGraph, h: &EdgeSubset) -> Result<Vec<Decomposition>> {
    if !subgraph::is_even(g, h) {
        return Err(Error::NotEven);
    }
    cap("|E(H)| for decompositions", h.count(), DECOMPOSITION_EDGE_CAP)?;
    let per_vertex: Vec<Vec<StarMatching>> = (0..g.num_vertices())
        .map(|v| star_matchings(g, h, v))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|ms| ms.iter().any(|m| !m.pairs.is_empty()))
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_vertex.len()];
    loop {
        let choice: Vec<&StarMatching> = per_vertex.iter().zip(&idx).map(|(ms, &i)| &ms[i]).collect();
        out.push(follow_matchings(g, h, &choice)?);
        // odometer
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < per_vertex[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    Ok(out)
}

/// Π_{v} (deg_H(v) − 1)!!.
pub fn expected_decomposition_count(g: &EmbeddedGraph, h: &EdgeSubset) -> u64 {
    subgraph::degrees(g, h)
        .into_iter()
        .map(|d| (1..d as u64).step_by(2).product::<u64>())
        .product()
}

fn edge_product(dec: &Decomposition, k: &[f64]) -> f64 {
    dec.loops
        .iter()
        .flat_map(|l| l.darts().iter().map(|d| k[d.edge()]))
        .product()
}

/// Π_j (−1)^{si(C_j)} Π_{j<k} (−1)^{mi(C_j,C_k)} Π K.
pub fn decomposition_weight(g: &EmbeddedGraph, dec: &Decomposition, k: &[f64]) -> Result<f64> {
    let mut parity = 0;
    for (j, l) in dec.loops.iter().enumerate() {
        parity += geometry::self_crossings(g, l)?;
        for l2 in &dec.loops[j + 1..] {
            parity += geometry::mutual_crossings(g, l, l2)?;
        }
    }
    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * edge_product(dec, k))
}

/// Π_j (−1)^{τ(C_j) + ⟨α,C_j⟩ + 1} Π K.
pub fn decomposition_weight_sectored(
    g: &EmbeddedGraph,
    dec: &Decomposition,
    k: &[f64],
    alpha: &HomologyClass,
) -> Result<f64> {
    let mut sign = 1.0;
    for l in &dec.loops {
        sign *= -geometry::closed_walk_sign(g, alpha, l.darts())? as f64;
    }
    Ok(sign * edge_product(dec, k))
}

/// (1/2^g) Σ_α c(α) · decomposition_weight_sectored(dec, α).
pub fn sector_average_weight(g: &EmbeddedGraph, dec: &Decomposition, k: &[f64]) -> Result<f64> {
    let classes = HomologyClass::all(g.genus());
    let mut total = 0.0;
    for alpha in &classes {
        total += geometry::sector_sign(alpha) as f64 * decomposition_weight_sectored(g, dec, k, alpha)?;
    }
    Ok(total / (1u64 << g.genus()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, Fixture};

    #[test]
    fn star_matching_counts() {
        for (d, n) in [(2, 1), (4, 3), (6, 15), (8, 105)] {
            assert_eq!(perfect_matchings(d).len(), n);
        }
        let mut crossings: Vec<usize> = perfect_matchings(4).iter().map(|m| interleavings(m)).collect();
        crossings.sort();
        assert_eq!(crossings, vec![0, 0, 1]);
        let signed: i64 = perfect_matchings(6)
            .iter()
            .map(|m| if interleavings(m).is_multiple_of(2) { 1 } else { -1 })
            .sum();
        assert_eq!(signed, 1);
    }

    #[test]
    fn odd_degree_rejected() {
        let g = fixtures::load(Fixture::P3);
        let h = EdgeSubset::from_edges(g.num_edges(), [0]);
        assert!(matches!(star_matchings(&g, &h, 0), Err(Error::OddDegree(_))));
    }

    #[test]
    fn pfaffian_small_cases() {
        let r = pfaffian_check(&[0.3, 0.7]).unwrap();
        assert!(r.ok && (r.lhs - (0.21f64).sqrt()).abs() < 1e-15);
        let r = pfaffian_check(&[1.0; 4]).unwrap();
        assert_eq!(r.matchings, 3);
        assert!((r.lhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bow_decompositions() {
        let g = fixtures::load(Fixture::Bow);
        let h = EdgeSubset::from_edges(g.num_edges(), 0..g.num_edges());
        let decs = decompositions(&g, &h).unwrap();
        assert_eq!(decs.len(), 3);
        let mut sizes: Vec<Vec<usize>> = decs.iter().map(|d| d.loops.iter().map(|l| l.len()).collect()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![vec![3, 3], vec![6], vec![6]]);
        let k = vec![1.0; g.num_edges()];
        let total: f64 = decs.iter().map(|d| decomposition_weight(&g, d, &k).unwrap()).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn empty_and_cycle_decompositions() {
        let g = fixtures::load(Fixture::C4);
        let empty = EdgeSubset::empty(g.num_edges());
        let decs = decompositions(&g, &empty).unwrap();
        assert_eq!(decs.len(), 1);
        assert!(decs[0].loops.is_empty());
        let all = EdgeSubset::from_edges(4, 0..4);
        let decs = decompositions(&g, &all).unwrap();
        assert_eq!(decs.len(), 1);
        let w = decomposition_weight(&g, &decs[0], &[0.5; 4]).unwrap();
        assert!((w - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn figure_eight_weight_is_negative() {
        let g = fixtures::load(Fixture::Bow);
        let id = |x: i64| g.vertex_index(x).unwrap();
        // 0 -> 1 -> 2 -> 3 -> 4 -> 2 -> 0 passes straight through the centre twice
        let path = [0, 1, 2, 3, 4, 2, 0].map(id);
        let walk: Vec<Dart> = path
            .windows(2)
            .map(|w| g.rotation(w[0]).iter().copied().find(|&d| g.head(d) == w[1]).unwrap())
            .collect();
        let l = Loop::new(&g, &walk).unwrap();
        assert_eq!(geometry::self_crossings(&g, &l).unwrap(), 1);
        let dec = Decomposition { loops: vec![l] };
        let w = decomposition_weight(&g, &dec, &[0.5; 6]).unwrap();
        assert_eq!(w, -(0.5f64.powi(6)));
    }

    #[test]
    fn not_even_rejected() {
        let g = fixtures::load(Fixture::C4);
        let h = EdgeSubset::from_edges(4, [0, 1]);
        assert_eq!(decompositions(&g, &h), Err(Error::NotEven));
    }

    #[test]
    fn canonical_form_is_rooting_invariant() {
        let g = fixtures::load(Fixture::Grid3);
        for l in crate::walks::enumerate_loops(&g, 8).unwrap() {
            for t in l.traversals() {
                assert_eq!(Loop::new(&g, &t).unwrap(), l);
            }
        }
    }
}
