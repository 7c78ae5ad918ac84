//! Depth-first enumeration of non-backtracking walks and of loops.

use rayon::prelude::*;

use crate::error::{cap, Error, Result};
use crate::geometry;
use crate::graph::{Dart, EmbeddedGraph};
use crate::loops::Loop;

use super::walk::DirectedWalk;

/// Largest supported walk length.
pub const MAX_LEN_CAP: usize = 32;

/// Non-backtracking successors of every dart with the exterior angle of the step.
#[derive(Debug, Clone)]
pub struct Successors {
    succ: Vec<Vec<(Dart, f64)>>,
}

impl Successors {
    pub fn new(g: &EmbeddedGraph) -> Result<Successors> {
        let succ = g
            .darts()
            .map(|d| {
                g.rotation(g.head(d))
                    .iter()
                    .filter(|&&e| e != d.rev())
                    .map(|&e| Ok((e, geometry::dart_turn(g, d, e)?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Successors { succ })
    }
    pub fn of(&self, d: Dart) -> &[(Dart, f64)] {
        &self.succ[d.index()]
    }
    pub fn turn(&self, d: Dart, e: Dart) -> Option<f64> {
        self.succ[d.index()].iter().find(|(x, _)| *x == e).map(|(_, t)| *t)
    }
}

/// Runs `f` over `items` either serially or on a pool of `workers` threads,
/// returning results in item order.
pub(crate) fn sharded<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

struct Dfs<'a, V> {
    g: &'a EmbeddedGraph,
    succ: &'a Successors,
    dist: &'a [Vec<usize>],
    max_len: usize,
    target: usize,
    stack: Vec<Dart>,
    visit: V,
}

impl<V: FnMut(&[Dart], f64, [i64; 2])> Dfs<'_, V> {
    /// Extends the walk on the stack. `turn` is the sum of the internal
    /// exterior angles so far.
    fn closed(&mut self, turn: f64, wind: [i64; 2]) {
        let last = *self.stack.last().unwrap();
        let first = self.stack[0];
        let h = self.g.head(last);
        if h == self.target {
            if let Some(close) = self.succ.turn(last, first) {
                (self.visit)(&self.stack, turn + close, wind);
            }
        }
        let len = self.stack.len();
        if len == self.max_len {
            return;
        }
        for &(e, t) in self.succ.of(last) {
            let h2 = self.g.head(e);
            if self.dist[h2][self.target] > self.max_len - len - 1 {
                continue;
            }
            let w = self.g.wrap(e);
            self.stack.push(e);
            self.closed(turn + t, [wind[0] + w[0] as i64, wind[1] + w[1] as i64]);
            self.stack.pop();
        }
    }

    fn open(&mut self, turn: f64, wind: [i64; 2]) {
        let last = *self.stack.last().unwrap();
        if self.g.head(last) == self.target {
            (self.visit)(&self.stack, turn, wind);
        }
        let len = self.stack.len();
        if len == self.max_len {
            return;
        }
        for &(e, t) in self.succ.of(last) {
            let h2 = self.g.head(e);
            if self.dist[h2][self.target] > self.max_len - len - 1 {
                continue;
            }
            let w = self.g.wrap(e);
            self.stack.push(e);
            self.open(turn + t, [wind[0] + w[0] as i64, wind[1] + w[1] as i64]);
            self.stack.pop();
        }
    }
}

/// Everything needed to enumerate walks on one graph.
#[derive(Debug, Clone)]
pub struct WalkEnumerator<'a> {
    g: &'a EmbeddedGraph,
    succ: Successors,
    dist: Vec<Vec<usize>>,
}

impl<'a> WalkEnumerator<'a> {
    pub fn new(g: &'a EmbeddedGraph) -> Result<WalkEnumerator<'a>> {
        Ok(WalkEnumerator {
            g,
            succ: Successors::new(g)?,
            dist: g.distances(),
        })
    }

    pub fn successors(&self) -> &Successors {
        &self.succ
    }

    /// Visits every closed non-backtracking walk of length ≤ `max_len`
    /// starting with dart `first`. The callback receives the darts, the
    /// total exterior angle including the closing step, and the winding.
    pub fn for_each_closed_from(&self, first: Dart, max_len: usize, visit: impl FnMut(&[Dart], f64, [i64; 2])) {
        if max_len == 0 {
            return;
        }
        let target = self.g.tail(first);
        let w = self.g.wrap(first);
        let mut dfs = Dfs {
            g: self.g,
            succ: &self.succ,
            dist: &self.dist,
            max_len,
            target,
            stack: vec![first],
            visit,
        };
        if self.dist[self.g.head(first)][target] < max_len {
            dfs.closed(0.0, [w[0] as i64, w[1] as i64]);
        }
    }

    /// Visits every non-backtracking walk from vertex `a` to vertex `b` of
    /// length 1..=`max_len` whose first dart is `first`. The callback
    /// receives the darts, the sum of internal exterior angles and the winding.
    pub fn for_each_open_from(&self, first: Dart, b: usize, max_len: usize, visit: impl FnMut(&[Dart], f64, [i64; 2])) {
        if max_len == 0 {
            return;
        }
        let w = self.g.wrap(first);
        let mut dfs = Dfs {
            g: self.g,
            succ: &self.succ,
            dist: &self.dist,
            max_len,
            target: b,
            stack: vec![first],
            visit,
        };
        if self.dist[self.g.head(first)][b] < max_len {
            dfs.open(0.0, [w[0] as i64, w[1] as i64]);
        }
    }

    /// Folds over all closed walks, one accumulator per first dart (in dart
    /// order), optionally in parallel.
    pub fn fold_closed<A, I, F>(&self, max_len: usize, workers: usize, init: I, f: F) -> Result<Vec<A>>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &[Dart], f64, [i64; 2]) + Sync,
    {
        cap("maxLen", max_len, MAX_LEN_CAP)?;
        let darts: Vec<Dart> = self.g.darts().collect();
        Ok(sharded(&darts, workers, |&d| {
            let mut acc = init();
            self.for_each_closed_from(d, max_len, |w, t, wind| f(&mut acc, w, t, wind));
            acc
        }))
    }

    /// Folds over all open walks from `a` to `b`, one accumulator per first dart.
    pub fn fold_open<A, I, F>(
        &self,
        a: usize,
        b: usize,
        max_len: usize,
        workers: usize,
        init: I,
        f: F,
    ) -> Result<Vec<A>>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &[Dart], f64, [i64; 2]) + Sync,
    {
        cap("maxLen", max_len, MAX_LEN_CAP)?;
        let darts: Vec<Dart> = self.g.rotation(a).to_vec();
        Ok(sharded(&darts, workers, |&d| {
            let mut acc = init();
            self.for_each_open_from(d, b, max_len, |w, t, wind| f(&mut acc, w, t, wind));
            acc
        }))
    }
}

/// All rooted, oriented closed non-backtracking walks of length ≤ `max_len`,
/// grouped by first dart in dart order and depth-first within a group.
pub fn enumerate_closed_nb(g: &EmbeddedGraph, max_len: usize) -> Result<Vec<DirectedWalk>> {
    cap("maxLen", max_len, MAX_LEN_CAP)?;
    let en = WalkEnumerator::new(g)?;
    let mut out = Vec::new();
    for d in g.darts() {
        en.for_each_closed_from(d, max_len, |w, _, _| {
            out.push(DirectedWalk::new(g, w.to_vec(), true).expect("enumerated walk is closed"));
        });
    }
    Ok(out)
}

/// All loops (closed edge-simple walks up to rooting and orientation) with
/// at most `max_len` edges, sorted.
pub fn enumerate_loops(g: &EmbeddedGraph, max_len: usize) -> Result<Vec<Loop>> {
    cap("maxLen", max_len, MAX_LEN_CAP)?;
    let mut out = Vec::new();
    for e in 0..g.num_edges() {
        // the loop is found once, from the forward dart of its smallest edge
        let first = Dart::new(e, false);
        let target = g.tail(first);
        let mut used = vec![false; g.num_edges()];
        used[e] = true;
        let mut stack = vec![first];
        fn rec(
            g: &EmbeddedGraph,
            e0: usize,
            target: usize,
            max_len: usize,
            used: &mut [bool],
            stack: &mut Vec<Dart>,
            out: &mut Vec<Loop>,
        ) {
            let last = *stack.last().unwrap();
            let h = g.head(last);
            if h == target && stack.len() >= 2 {
                out.push(Loop::canonical(stack));
            }
            if stack.len() == max_len {
                return;
            }
            for &d in g.rotation(h) {
                let f = d.edge();
                if f <= e0 || used[f] {
                    continue;
                }
                used[f] = true;
                stack.push(d);
                rec(g, e0, target, max_len, used, stack, out);
                stack.pop();
                used[f] = false;
            }
        }
        rec(g, e, target, max_len, &mut used, &mut stack, &mut out);
    }
    out.sort();
    let n = out.len();
    out.dedup();
    if out.len() != n {
        return Err(Error::Precondition("loop enumeration produced duplicates".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, Fixture};

    #[test]
    fn closed_walk_counts() {
        assert!(enumerate_closed_nb(&fixtures::load(Fixture::E1), 8).unwrap().is_empty());
        assert_eq!(enumerate_closed_nb(&fixtures::load(Fixture::C3), 3).unwrap().len(), 6);
        let c4 = enumerate_closed_nb(&fixtures::load(Fixture::C4), 8).unwrap();
        assert_eq!(c4.iter().filter(|w| w.len() == 4).count(), 8);
        assert_eq!(c4.iter().filter(|w| w.len() == 8).count(), 8);
        assert_eq!(c4.len(), 16);
    }

    #[test]
    fn enumerated_walks_are_non_backtracking() {
        for w in enumerate_closed_nb(&fixtures::load(Fixture::Bow), 9).unwrap() {
            assert!(w.is_non_backtracking());
        }
    }

    #[test]
    fn parallel_fold_matches_serial() {
        let g = fixtures::load(Fixture::Grid3);
        let en = WalkEnumerator::new(&g).unwrap();
        let f = |acc: &mut Vec<usize>, w: &[Dart], _: f64, _: [i64; 2]| acc.push(w.len());
        let serial = en.fold_closed(10, 1, Vec::new, f).unwrap();
        let parallel = en.fold_closed(10, 4, Vec::new, f).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn cap_enforced() {
        let g = fixtures::load(Fixture::C3);
        assert!(matches!(enumerate_closed_nb(&g, 33), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn loop_counts() {
        assert_eq!(enumerate_loops(&fixtures::load(Fixture::C4), 8).unwrap().len(), 1);
        assert_eq!(enumerate_loops(&fixtures::load(Fixture::Bow), 8).unwrap().len(), 4);
        // 13 cycles plus 4 edge-simple loops that visit the centre twice
        let grid = enumerate_loops(&fixtures::load(Fixture::Grid3), 12).unwrap();
        assert_eq!(grid.len(), 17);
    }
}
