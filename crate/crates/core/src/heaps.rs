//! Heaps of pieces over a concurrency relation: canonical level form,
//! addition, trivial heaps, pyramids and the ratio identity for generating
//! functions of heaps with restricted maximal pieces.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::Serialize;

use crate::error::{cap, Error, Result};

/// Default cap on the number of pieces for exhaustive heap enumeration.
pub const MAX_PIECES_CAP: usize = 10;
/// Cap on the truncation degree of the ratio check.
pub const RATIO_DEGREE_CAP: usize = 10;

/// A concurrency relation on some set of pieces.
pub trait Concurrency<P> {
    /// Identifies the system, so heaps built over different systems are not mixed.
    fn tag(&self) -> u64;
    fn contains(&self, p: &P) -> bool;
    fn concurrent(&self, a: &P, b: &P) -> bool;
}

/// A finite concurrency system: piece types `0..n` and a symmetric reflexive relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConcurrencySystem {
    relation: Vec<Vec<bool>>,
    tag: u64,
}

impl ConcurrencySystem {
    /// Builds a system from a relation matrix; the matrix must be symmetric
    /// with a true diagonal.
    pub fn new(relation: Vec<Vec<bool>>) -> Result<ConcurrencySystem> {
        let n = relation.len();
        for (i, row) in relation.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Precondition("relation matrix must be square".into()));
            }
            if !row[i] {
                return Err(Error::Precondition("concurrency must be reflexive".into()));
            }
            for j in 0..n {
                if row[j] != relation[j][i] {
                    return Err(Error::Precondition("concurrency must be symmetric".into()));
                }
            }
        }
        if n > 16 {
            return Err(Error::CapExceeded {
                what: "piece types",
                value: n,
                cap: 16,
            });
        }
        let mut tag = 0xcbf2_9ce4_8422_2325u64 ^ n as u64;
        for row in &relation {
            for &b in row {
                tag = (tag ^ b as u64).wrapping_mul(0x0100_0000_01b3);
            }
        }
        Ok(ConcurrencySystem { relation, tag })
    }

    /// Builds a system from the list of non-reflexive concurrent pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<ConcurrencySystem> {
        let mut r = vec![vec![false; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::UnknownPiece(a.max(b)));
            }
            r[a][b] = true;
            r[b][a] = true;
        }
        ConcurrencySystem::new(r)
    }

    pub fn len(&self) -> usize {
        self.relation.len()
    }
    pub fn is_empty(&self) -> bool {
        self.relation.is_empty()
    }
    pub fn relation(&self) -> &[Vec<bool>] {
        &self.relation
    }
    /// Bitmask of the types concurrent with `p` (including `p`).
    pub fn neighbourhood(&self, p: usize) -> u32 {
        (0..self.len())
            .filter(|&q| self.relation[p][q])
            .fold(0, |m, q| m | 1 << q)
    }
    fn neighbourhood_of_set(&self, set: u32) -> u32 {
        bits(set).fold(0, |m, p| m | self.neighbourhood(p))
    }
    /// Bitmasks of all independent (pairwise non-concurrent) sets of types.
    pub fn independent_sets(&self) -> Vec<u32> {
        let n = self.len();
        let nb: Vec<u32> = (0..n).map(|p| self.neighbourhood(p)).collect();
        (0..1u32 << n)
            .filter(|&s| bits(s).all(|p| nb[p] & s == 1 << p))
            .collect()
    }
}

impl Concurrency<usize> for ConcurrencySystem {
    fn tag(&self) -> u64 {
        self.tag
    }
    fn contains(&self, p: &usize) -> bool {
        *p < self.len()
    }
    fn concurrent(&self, a: &usize, b: &usize) -> bool {
        self.relation[*a][*b]
    }
}

fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1)
}

/// A heap in canonical level form: each piece rests one level above the
/// highest piece below it that it is concurrent with.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Heap<P> {
    system: u64,
    /// (level, label), sorted.
    levels: Vec<(usize, P)>,
}

impl<P: Clone + Ord> Heap<P> {
    pub fn empty<S: Concurrency<P>>(sys: &S) -> Heap<P> {
        Heap {
            system: sys.tag(),
            levels: Vec::new(),
        }
    }
    pub fn system_tag(&self) -> u64 {
        self.system
    }
    pub fn len(&self) -> usize {
        self.levels.len()
    }
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
    pub fn pieces(&self) -> &[(usize, P)] {
        &self.levels
    }
    pub fn height(&self) -> usize {
        self.levels.iter().map(|(l, _)| l + 1).max().unwrap_or(0)
    }
    /// Labels grouped by level, bottom first.
    pub fn level_sequence(&self) -> Vec<Vec<P>> {
        let mut out = vec![Vec::new(); self.height()];
        for (l, p) in &self.levels {
            out[*l].push(p.clone());
        }
        out
    }

    fn check<S: Concurrency<P>>(&self, sys: &S) -> Result<()> {
        if self.system != sys.tag() {
            return Err(Error::SystemMismatch);
        }
        Ok(())
    }

    /// Places `p` on top of the heap.
    pub fn push<S: Concurrency<P>>(&self, sys: &S, p: P) -> Result<Heap<P>> {
        let (h, _) = self.push_at(sys, p)?;
        Ok(h)
    }

    /// Like `push`, also returning the level the piece landed on.
    pub fn push_at<S: Concurrency<P>>(&self, sys: &S, p: P) -> Result<(Heap<P>, usize)> {
        self.check(sys)?;
        if !sys.contains(&p) {
            return Err(Error::UnknownPiece(usize::MAX));
        }
        let level = self
            .levels
            .iter()
            .filter(|(_, q)| sys.concurrent(q, &p))
            .map(|(l, _)| l + 1)
            .max()
            .unwrap_or(0);
        let mut levels = self.levels.clone();
        let pos = levels.partition_point(|x| x < &(level, p.clone()));
        levels.insert(pos, (level, p));
        Ok((
            Heap {
                system: self.system,
                levels,
            },
            level,
        ))
    }

    /// `self` with `other` placed on top of it.
    pub fn add<S: Concurrency<P>>(&self, sys: &S, other: &Heap<P>) -> Result<Heap<P>> {
        self.check(sys)?;
        other.check(sys)?;
        let mut h = self.clone();
        for (_, p) in &other.levels {
            h = h.push(sys, p.clone())?;
        }
        Ok(h)
    }

    /// Rebuilds the heap by pushing its pieces in level order.
    pub fn rebuild<S: Concurrency<P>>(&self, sys: &S) -> Result<Heap<P>> {
        Heap::empty(sys).add(sys, self)
    }

    /// Indices (into `pieces()`) of the maximal pieces.
    pub fn maximal_indices<S: Concurrency<P>>(&self, sys: &S) -> Vec<usize> {
        (0..self.levels.len())
            .filter(|&i| {
                let (l, p) = &self.levels[i];
                !self.levels[i + 1..].iter().any(|(m, q)| m > l && sys.concurrent(p, q))
            })
            .collect()
    }

    pub fn maximal_labels<S: Concurrency<P>>(&self, sys: &S) -> Vec<P> {
        self.maximal_indices(sys)
            .into_iter()
            .map(|i| self.levels[i].1.clone())
            .collect()
    }

    /// A pyramid has exactly one maximal piece.
    pub fn is_pyramid<S: Concurrency<P>>(&self, sys: &S) -> bool {
        self.maximal_indices(sys).len() == 1
    }

    /// Removes the piece at index `i` of `pieces()`, which must be maximal;
    /// the remaining pieces keep their levels.
    pub fn remove_maximal<S: Concurrency<P>>(&self, sys: &S, i: usize) -> Result<Heap<P>> {
        if !self.maximal_indices(sys).contains(&i) {
            return Err(Error::Precondition("only a maximal piece can be removed".into()));
        }
        let mut levels = self.levels.clone();
        levels.remove(i);
        Ok(Heap {
            system: self.system,
            levels,
        })
    }

    /// Whether the stored levels are the canonical ones for this set of pieces.
    pub fn is_canonical<S: Concurrency<P>>(&self, sys: &S) -> bool {
        self.rebuild(sys).map(|h| h == *self).unwrap_or(false)
    }
}

/// A heap whose maximal pieces carry an auxiliary label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MarkedHeap<P: Ord, M> {
    pub heap: Heap<P>,
    /// Marks keyed by (level, label) of a maximal piece.
    pub marks: BTreeMap<(usize, P), M>,
}

impl<P: Clone + Ord, M: Clone> MarkedHeap<P, M> {
    pub fn empty<S: Concurrency<P>>(sys: &S) -> MarkedHeap<P, M> {
        MarkedHeap {
            heap: Heap::empty(sys),
            marks: BTreeMap::new(),
        }
    }

    /// Pushes `p` carrying mark `m`; marks on pieces that stop being maximal are dropped.
    pub fn push_marked<S: Concurrency<P>>(&self, sys: &S, p: P, m: M) -> Result<MarkedHeap<P, M>> {
        let (heap, level) = self.heap.push_at(sys, p.clone())?;
        let mut marks = self.marks.clone();
        marks.retain(|(l, q), _| !(*l < level && sys.concurrent(q, &p)));
        marks.insert((level, p), m);
        Ok(MarkedHeap { heap, marks })
    }

    /// The unique maximal piece and its mark, if this is a marked pyramid.
    pub fn apex<S: Concurrency<P>>(&self, sys: &S) -> Option<(usize, P, M)> {
        let max = self.heap.maximal_indices(sys);
        if max.len() != 1 {
            return None;
        }
        let (l, p) = self.heap.pieces()[max[0]].clone();
        let m = self.marks.get(&(l, p.clone()))?.clone();
        Some((l, p, m))
    }

    /// Marks sit only on maximal pieces.
    pub fn marks_on_maximal<S: Concurrency<P>>(&self, sys: &S) -> bool {
        let max: Vec<(usize, P)> = self
            .heap
            .maximal_indices(sys)
            .into_iter()
            .map(|i| self.heap.pieces()[i].clone())
            .collect();
        self.marks.keys().all(|k| max.contains(k))
    }
}

/// All trivial heaps: independent sets of piece types, as heaps with every
/// piece at level 0.
pub fn trivial_heaps(sys: &ConcurrencySystem) -> Vec<Heap<usize>> {
    sys.independent_sets()
        .into_iter()
        .map(|s| Heap {
            system: sys.tag,
            levels: bits(s).map(|p| (0, p)).collect(),
        })
        .collect()
}

/// Depth-first walk over heaps given as level sequences: each level is a
/// nonempty independent set whose every piece is concurrent with some piece
/// of the level below. `visit` receives the levels as bitmasks.
fn for_each_heap(sys: &ConcurrencySystem, max_pieces: usize, visit: &mut dyn FnMut(&[u32])) {
    let indep: Vec<u32> = sys.independent_sets().into_iter().filter(|&s| s != 0).collect();
    let nb: Vec<u32> = (0..sys.len()).map(|p| sys.neighbourhood(p)).collect();
    fn rec(indep: &[u32], nb: &[u32], stack: &mut Vec<u32>, size: usize, max: usize, visit: &mut dyn FnMut(&[u32])) {
        visit(stack);
        let below = stack.last().copied();
        for &s in indep {
            let n = s.count_ones() as usize;
            if size + n > max {
                continue;
            }
            if let Some(b) = below {
                if !bits(s).all(|p| nb[p] & b != 0) {
                    continue;
                }
            }
            stack.push(s);
            rec(indep, nb, stack, size + n, max, visit);
            stack.pop();
        }
    }
    rec(&indep, &nb, &mut Vec::new(), 0, max_pieces, visit);
}

/// Mask of the maximal piece types of a level sequence.
fn maximal_mask(sys: &ConcurrencySystem, levels: &[u32]) -> u32 {
    let mut covered = 0u32;
    let mut max = 0u32;
    for &s in levels.iter().rev() {
        max |= s & !covered;
        covered |= sys.neighbourhood_of_set(s);
    }
    max
}

/// All heaps with at most `max_pieces` pieces whose maximal pieces have
/// labels in `restrict` (when given), in depth-first order.
pub fn enumerate_heaps(
    sys: &ConcurrencySystem,
    max_pieces: usize,
    restrict: Option<&[usize]>,
) -> Result<Vec<Heap<usize>>> {
    cap("maxPieces", max_pieces, MAX_PIECES_CAP)?;
    let allowed = match restrict {
        None => u32::MAX,
        Some(m) => {
            let mut mask = 0;
            for &p in m {
                if p >= sys.len() {
                    return Err(Error::UnknownPiece(p));
                }
                mask |= 1 << p;
            }
            mask
        }
    };
    let mut out = Vec::new();
    for_each_heap(sys, max_pieces, &mut |levels| {
        if maximal_mask(sys, levels) & !allowed == 0 {
            out.push(Heap {
                system: sys.tag,
                levels: levels
                    .iter()
                    .enumerate()
                    .flat_map(|(l, &s)| bits(s).map(move |p| (l, p)))
                    .collect(),
            });
        }
    });
    Ok(out)
}

/// Pyramids with at most `max_pieces` pieces: a heap with maximal labels
/// concurrent with `p`, topped by `p`, for every type `p`.
pub fn enumerate_pyramids(sys: &ConcurrencySystem, max_pieces: usize) -> Result<Vec<Heap<usize>>> {
    cap("maxPieces", max_pieces, MAX_PIECES_CAP)?;
    let mut out = Vec::new();
    if max_pieces == 0 {
        return Ok(out);
    }
    for p in 0..sys.len() {
        let nbr: Vec<usize> = bits(sys.neighbourhood(p)).collect();
        for h in enumerate_heaps(sys, max_pieces - 1, Some(&nbr))? {
            out.push(h.push(sys, p)?);
        }
    }
    Ok(out)
}

/// A truncated multivariate power series with integer coefficients, keyed
/// by exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Series {
    pub vars: usize,
    pub degree: usize,
    pub coeffs: HashMap<Vec<u8>, i64>,
}

impl Series {
    pub fn zero(vars: usize, degree: usize) -> Series {
        Series {
            vars,
            degree,
            coeffs: HashMap::new(),
        }
    }
    pub fn coeff(&self, e: &[u8]) -> i64 {
        self.coeffs.get(e).copied().unwrap_or(0)
    }
    fn add_term(&mut self, e: Vec<u8>, c: i64) {
        if e.iter().map(|&x| x as usize).sum::<usize>() > self.degree || c == 0 {
            return;
        }
        let v = self.coeffs.entry(e).or_insert(0);
        *v += c;
    }
    fn cleaned(mut self) -> Series {
        self.coeffs.retain(|_, c| *c != 0);
        self
    }
    /// `self / den` truncated at the common degree; `den` must have constant term 1.
    pub fn divide(&self, den: &Series) -> Result<Series> {
        let zero = vec![0u8; self.vars];
        if den.coeff(&zero) != 1 {
            return Err(Error::Precondition("denominator must have constant term 1".into()));
        }
        let mut monomials: Vec<Vec<u8>> = all_monomials(self.vars, self.degree);
        monomials.sort_by_key(|e| e.iter().map(|&x| x as usize).sum::<usize>());
        let den_terms: Vec<(&Vec<u8>, i64)> = den
            .coeffs
            .iter()
            .filter(|(e, _)| e.iter().any(|&x| x > 0))
            .map(|(e, &c)| (e, c))
            .collect();
        let mut q = Series::zero(self.vars, self.degree);
        for m in &monomials {
            let mut c = self.coeff(m);
            for (d, dc) in &den_terms {
                if d.iter().zip(m).all(|(a, b)| a <= b) {
                    let rest: Vec<u8> = m.iter().zip(d.iter()).map(|(a, b)| a - b).collect();
                    c -= dc * q.coeff(&rest);
                }
            }
            q.add_term(m.clone(), c);
        }
        Ok(q.cleaned())
    }
}

fn all_monomials(vars: usize, degree: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..vars {
        let mut next = Vec::new();
        for e in &out {
            let used: usize = e.iter().map(|&x: &u8| x as usize).sum();
            for k in 0..=degree - used {
                let mut f = e.clone();
                f.push(k as u8);
                next.push(f);
            }
        }
        out = next;
    }
    out
}

fn content(levels: &[u32], vars: usize) -> Vec<u8> {
    let mut e = vec![0u8; vars];
    for &s in levels {
        for p in bits(s) {
            e[p] += 1;
        }
    }
    e
}

/// Heaps of a system up to a degree, aggregated by content and maximal-type mask.
#[derive(Debug, Clone)]
pub struct HeapCensus {
    pub degree: usize,
    counts: HashMap<(Vec<u8>, u32), i64>,
}

impl HeapCensus {
    pub fn new(sys: &ConcurrencySystem, degree: usize) -> Result<HeapCensus> {
        cap("truncation degree", degree, RATIO_DEGREE_CAP)?;
        let mut counts = HashMap::new();
        for_each_heap(sys, degree, &mut |levels| {
            *counts
                .entry((content(levels, sys.len()), maximal_mask(sys, levels)))
                .or_insert(0) += 1;
        });
        Ok(HeapCensus { degree, counts })
    }
    /// Σ_{H ∈ 𝓗_M} w(H), truncated.
    pub fn generating_function(&self, vars: usize, m_mask: u32) -> Series {
        let mut s = Series::zero(vars, self.degree);
        for ((e, max), c) in &self.counts {
            if max & !m_mask == 0 {
                s.add_term(e.clone(), *c);
            }
        }
        s.cleaned()
    }
}

/// Σ over trivial heaps T with labels in `mask` of (−1)^{|T|} w(T).
pub fn signed_trivial_sum(sys: &ConcurrencySystem, mask: u32, degree: usize) -> Series {
    let mut s = Series::zero(sys.len(), degree);
    for t in sys.independent_sets() {
        if t & !mask == 0 {
            let e: Vec<u8> = (0..sys.len()).map(|p| (t >> p & 1) as u8).collect();
            let sign = if t.count_ones() % 2 == 0 { 1 } else { -1 };
            s.add_term(e, sign);
        }
    }
    s.cleaned()
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub m_mask: u32,
    pub degree: usize,
    pub ok: bool,
    /// First mismatching exponent vector, with (heap side, ratio side).
    pub mismatch: Option<(Vec<u8>, i64, i64)>,
}

/// Compares Σ_{H∈𝓗_M} w(H) with the ratio of signed trivial-heap sums.
pub fn check_ratio_identity(sys: &ConcurrencySystem, m: &[usize], degree: usize) -> Result<RatioReport> {
    let census = HeapCensus::new(sys, degree)?;
    let mut mask = 0u32;
    for &p in m {
        if p >= sys.len() {
            return Err(Error::UnknownPiece(p));
        }
        mask |= 1 << p;
    }
    check_ratio_with_census(sys, &census, mask)
}

/// Ratio check reusing a precomputed census.
pub fn check_ratio_with_census(sys: &ConcurrencySystem, census: &HeapCensus, m_mask: u32) -> Result<RatioReport> {
    let n = sys.len();
    let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let lhs = census.generating_function(n, m_mask);
    let num = signed_trivial_sum(sys, full & !m_mask, census.degree);
    let den = signed_trivial_sum(sys, full, census.degree);
    let rhs = num.divide(&den)?;
    let mut monomials = all_monomials(n, census.degree);
    monomials.sort_by_key(|e| (e.iter().map(|&x| x as usize).sum::<usize>(), e.clone()));
    let mismatch = monomials
        .into_iter()
        .map(|e| {
            let (a, b) = (lhs.coeff(&e), rhs.coeff(&e));
            (e, a, b)
        })
        .find(|(_, a, b)| a != b);
    Ok(RatioReport {
        m_mask,
        degree: census.degree,
        ok: mismatch.is_none(),
        mismatch,
    })
}

/// A random system with `n` types where each pair is concurrent with probability `p`.
pub fn random_system<R: rand::Rng>(rng: &mut R, n: usize, p: f64) -> ConcurrencySystem {
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                pairs.push((a, b));
            }
        }
    }
    ConcurrencySystem::from_pairs(n, &pairs).expect("valid random system")
}

/// Generic concurrency on hashable pieces given by a predicate.
pub struct PredicateSystem<F> {
    pub tag: u64,
    pub relation: F,
}

impl<P, F: Fn(&P, &P) -> bool> Concurrency<P> for PredicateSystem<F>
where
    P: Hash,
{
    fn tag(&self) -> u64 {
        self.tag
    }
    fn contains(&self, _: &P) -> bool {
        true
    }
    fn concurrent(&self, a: &P, b: &P) -> bool {
        (self.relation)(a, b)
    }
}
