//! Loop erasure of closed walks, totally non-backtracking walks and their
//! correspondence with pyramids of loops.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dart, EmbeddedGraph};
use crate::heaps::{Concurrency, MarkedHeap};
use crate::loops::Loop;

use super::walk::edge_multiset;

/// Loops are concurrent when they share an edge.
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeSharing;

impl Concurrency<Loop> for EdgeSharing {
    fn tag(&self) -> u64 {
        0x6c6f_6f70_6564_6765
    }
    fn contains(&self, _: &Loop) -> bool {
        true
    }
    fn concurrent(&self, a: &Loop, b: &Loop) -> bool {
        a.shares_edge(b)
    }
}

/// A pyramid of loops whose apex carries the rooted, oriented walk.
pub type WalkPyramid = MarkedHeap<Loop, Vec<Dart>>;

/// Zero-based loop index: the last position whose undirected edge occurs
/// again later, and the position of that (necessarily unique) repeat.
fn loop_index0(darts: &[Dart]) -> Option<(usize, usize)> {
    let n = darts.len();
    let mut seen_after = std::collections::HashMap::new();
    for j in (0..n).rev() {
        let e = darts[j].edge();
        if let Some(&later) = seen_after.get(&e) {
            return Some((j, later));
        }
        seen_after.insert(e, j);
    }
    None
}

/// One-based loop index (L_b, L_e) of a closed walk, or `None` when no edge repeats.
pub fn loop_index(darts: &[Dart]) -> Option<(usize, usize)> {
    loop_index0(darts).map(|(b, e)| (b + 1, e + 1))
}

/// A walk being erased together with the heap of loops removed so far.
#[derive(Debug, Clone, Serialize)]
pub struct ErasureState {
    pub remaining: Vec<Dart>,
    pub heap: WalkPyramid,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub enum EraseOutcome {
    Continue(ErasureState),
    /// The delimited subwalk is not a loop.
    Invalid,
    Done(WalkPyramid),
}

impl ErasureState {
    pub fn start(walk: &[Dart]) -> ErasureState {
        ErasureState {
            remaining: walk.to_vec(),
            heap: MarkedHeap::empty(&EdgeSharing),
            steps: 0,
        }
    }

    /// Edge multiset of the remaining walk plus every loop in the heap.
    pub fn edge_multiset(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.remaining.iter().map(|d| d.edge()).collect();
        for (_, l) in self.heap.heap.pieces() {
            m.extend(l.darts().iter().map(|d| d.edge()));
        }
        m.sort_unstable();
        m
    }
}

/// One erasure step.
pub fn erase(state: ErasureState) -> EraseOutcome {
    let w = &state.remaining;
    match loop_index0(w) {
        None => {
            let piece = Loop::canonical(w);
            match state.heap.push_marked(&EdgeSharing, piece, w.clone()) {
                Ok(h) => EraseOutcome::Done(h),
                Err(_) => EraseOutcome::Invalid,
            }
        }
        Some((k, j)) => {
            if w[k] != w[j] {
                return EraseOutcome::Invalid;
            }
            let omega: Vec<Dart> = w[k..j].to_vec();
            let mut rest = w[..k].to_vec();
            rest.extend_from_slice(&w[j..]);
            match state.heap.push_marked(&EdgeSharing, Loop::canonical(&omega), omega) {
                Ok(heap) => EraseOutcome::Continue(ErasureState {
                    remaining: rest,
                    heap,
                    steps: state.steps + 1,
                }),
                Err(_) => EraseOutcome::Invalid,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TnbClass {
    /// Totally non-backtracking, with the number of loops it erases into.
    Tnb(usize),
    NotTnb,
}

fn run_erasure(walk: &[Dart]) -> Option<WalkPyramid> {
    let mut state = ErasureState::start(walk);
    loop {
        match erase(state) {
            EraseOutcome::Continue(s) => state = s,
            EraseOutcome::Invalid => return None,
            EraseOutcome::Done(p) => return Some(p),
        }
    }
}

pub fn classify_tnb(walk: &[Dart]) -> TnbClass {
    match run_erasure(walk) {
        Some(p) => TnbClass::Tnb(p.heap.len()),
        None => TnbClass::NotTnb,
    }
}

pub fn to_pyramid(walk: &[Dart]) -> Result<WalkPyramid> {
    run_erasure(walk).ok_or(Error::NotTnb)
}

/// Inverse of [`to_pyramid`]: reinserts the loops below the apex into the
/// apex walk, each before the last position where it meets the walk.
pub fn from_pyramid(g: &EmbeddedGraph, p: &WalkPyramid) -> Result<Vec<Dart>> {
    let sys = EdgeSharing;
    let (level, apex, mark) = p
        .apex(&sys)
        .ok_or_else(|| Error::MalformedPyramid("no unique marked maximal piece".into()))?;
    if p.marks.len() != 1 {
        return Err(Error::MalformedPyramid("marks below the apex".into()));
    }
    if Loop::new(g, &mark).ok().as_ref() != Some(&apex) {
        return Err(Error::MalformedPyramid(
            "apex mark is not a traversal of the apex loop".into(),
        ));
    }
    let idx = p
        .heap
        .pieces()
        .iter()
        .position(|x| *x == (level, apex.clone()))
        .expect("apex is a piece");
    let mut rest = p.heap.remove_maximal(&sys, idx)?;
    let mut walk = mark;
    while !rest.is_empty() {
        let maximal = rest.maximal_indices(&sys);
        let mut best: Option<(usize, usize)> = None;
        for &i in &maximal {
            let piece = &rest.pieces()[i].1;
            let rank = walk
                .iter()
                .enumerate()
                .rev()
                .find(|(_, d)| piece.contains_edge(d.edge()))
                .map(|(pos, _)| pos);
            if let Some(r) = rank {
                if best.is_none_or(|(_, br)| r < br) {
                    best = Some((i, r));
                }
            }
        }
        let (i, r) = best.ok_or_else(|| Error::MalformedPyramid("a loop does not meet the walk".into()))?;
        let piece = rest.pieces()[i].1.clone();
        let inserted = piece
            .rooted_at(walk[r])
            .ok_or_else(|| Error::MalformedPyramid("loop cannot be rooted at the walk".into()))?;
        walk.splice(r..r, inserted);
        rest = rest.remove_maximal(&sys, i)?;
    }
    Ok(walk)
}

/// Edge multiset of all loops in a pyramid.
pub fn pyramid_edge_multiset(p: &WalkPyramid) -> Vec<usize> {
    let darts: Vec<Dart> = p.heap.pieces().iter().flat_map(|(_, l)| l.darts().to_vec()).collect();
    edge_multiset(&darts)
}

/// Inserts the loop traversal `omega` (which must start with a dart of
/// `walk`) just before the first occurrence of that dart.
pub fn glue(walk: &[Dart], omega: &[Dart]) -> Option<Vec<Dart>> {
    let first = *omega.first()?;
    let pos = walk.iter().position(|&d| d == first)?;
    let mut out = walk.to_vec();
    out.splice(pos..pos, omega.iter().copied());
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, Fixture};
    use crate::walks::enumerate::enumerate_closed_nb;
    use crate::walks::walk::DirectedWalk;

    fn c4_walk(times: usize) -> (EmbeddedGraph, Vec<Dart>) {
        let g = fixtures::load(Fixture::C4);
        let once = DirectedWalk::closed_through(&g, &[0, 1, 2, 3, 0]).unwrap();
        let darts = once.darts().repeat(times);
        (g, darts)
    }

    #[test]
    fn loop_index_examples() {
        let (_, once) = c4_walk(1);
        assert_eq!(loop_index(&once), None);
        let (_, twice) = c4_walk(2);
        assert_eq!(loop_index(&twice), Some((4, 8)));
    }

    #[test]
    fn c4_classification() {
        assert_eq!(classify_tnb(&c4_walk(1).1), TnbClass::Tnb(1));
        assert_eq!(classify_tnb(&c4_walk(2).1), TnbClass::Tnb(2));
        assert_eq!(classify_tnb(&c4_walk(3).1), TnbClass::Tnb(3));
    }

    #[test]
    fn c4_double_pyramid_is_two_stacked_loops() {
        let (g, twice) = c4_walk(2);
        let p = to_pyramid(&twice).unwrap();
        let levels: Vec<usize> = p.heap.pieces().iter().map(|(l, _)| *l).collect();
        assert_eq!(levels, vec![0, 1]);
        assert_eq!(from_pyramid(&g, &p).unwrap(), twice);
    }

    #[test]
    fn non_simple_delimited_subwalk_is_invalid() {
        // In BOW, go around the left triangle, then back through it the other way.
        let g = fixtures::load(Fixture::Bow);
        let w = DirectedWalk::closed_through(&g, &[2, 0, 1, 2, 3, 4, 2, 1, 0, 2, 4, 3, 2]).unwrap();
        assert!(w.is_non_backtracking());
        assert_eq!(classify_tnb(w.darts()), TnbClass::NotTnb);
        assert_eq!(to_pyramid(w.darts()), Err(Error::NotTnb));
    }

    #[test]
    fn erasure_conserves_edges() {
        let g = fixtures::load(Fixture::Bow);
        for w in enumerate_closed_nb(&g, 10).unwrap() {
            let mut state = ErasureState::start(w.darts());
            let original = w.edge_multiset();
            loop {
                assert_eq!(state.edge_multiset(), original);
                match erase(state) {
                    EraseOutcome::Continue(s) => state = s,
                    EraseOutcome::Invalid => break,
                    EraseOutcome::Done(p) => {
                        assert_eq!(pyramid_edge_multiset(&p), original);
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn malformed_pyramids_rejected() {
        let (g, once) = c4_walk(1);
        let empty: WalkPyramid = MarkedHeap::empty(&EdgeSharing);
        assert!(matches!(from_pyramid(&g, &empty), Err(Error::MalformedPyramid(_))));
        let l = Loop::new(&g, &once).unwrap();
        let wrong_mark = empty.push_marked(&EdgeSharing, l, vec![once[0]]).unwrap();
        assert!(matches!(from_pyramid(&g, &wrong_mark), Err(Error::MalformedPyramid(_))));
    }
}
