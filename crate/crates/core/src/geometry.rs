//! Turning numbers, winding and homology pairings, combinatorial crossings
//! and the sector signs of the torus sum.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dart, EmbeddedGraph, Surface};
use crate::loops::Loop;

/// Tolerance on the distance of Σθ/2π from an integer.
pub const TURNING_TOL: f64 = 1e-6;

/// Signed angle from `din` to `dout`, counterclockwise positive, in (−π, π).
pub fn exterior_angle(din: [f64; 2], dout: [f64; 2]) -> Result<f64> {
    let cr = din[0] * dout[1] - din[1] * dout[0];
    let dot = din[0] * dout[0] + din[1] * dout[1];
    let scale = din[0].hypot(din[1]) * dout[0].hypot(dout[1]);
    if scale == 0.0 {
        return Err(Error::Precondition("zero direction vector".into()));
    }
    if dot < 0.0 && cr.abs() <= 1e-12 * scale {
        return Err(Error::Backtrack);
    }
    Ok(cr.atan2(dot))
}

/// Exterior angle between two consecutive darts.
pub fn dart_turn(g: &EmbeddedGraph, din: Dart, dout: Dart) -> Result<f64> {
    if g.head(din) != g.tail(dout) {
        return Err(Error::Precondition("darts are not consecutive".into()));
    }
    if din.rev() == dout {
        return Err(Error::Backtrack);
    }
    exterior_angle(g.disp(din), g.disp(dout))
}

/// Rounds Σθ/2π to the nearest integer, failing on a large residue.
pub fn round_turning(total: f64) -> Result<i64> {
    let t = total / TAU;
    let r = t.round();
    if (t - r).abs() > TURNING_TOL {
        return Err(Error::TurningResidue(t - r));
    }
    Ok(r as i64)
}

fn check_closed(g: &EmbeddedGraph, walk: &[Dart]) -> Result<()> {
    if walk.is_empty() {
        return Err(Error::Precondition("empty walk".into()));
    }
    for i in 0..walk.len() {
        if g.head(walk[i]) != g.tail(walk[(i + 1) % walk.len()]) {
            return Err(Error::Precondition("walk is not closed".into()));
        }
    }
    Ok(())
}

/// Turning number of a closed non-backtracking walk.
pub fn turning_number(g: &EmbeddedGraph, walk: &[Dart]) -> Result<i64> {
    check_closed(g, walk)?;
    let n = walk.len();
    let mut total = 0.0;
    for i in 0..n {
        total += dart_turn(g, walk[i], walk[(i + 1) % n])?;
    }
    round_turning(total)
}

/// Net period displacement of a walk.
pub fn winding(g: &EmbeddedGraph, walk: &[Dart]) -> [i64; 2] {
    walk.iter().fold([0, 0], |acc, &d| {
        let w = g.wrap(d);
        [acc[0] + w[0] as i64, acc[1] + w[1] as i64]
    })
}

/// A class in H₁(surface, Z₂): bits (⟨α,e¹_k⟩, ⟨α,e²_k⟩) for k = 1..g.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HomologyClass {
    pub bits: Vec<u8>,
}

impl HomologyClass {
    pub fn zero(genus: usize) -> HomologyClass {
        HomologyClass {
            bits: vec![0; 2 * genus],
        }
    }
    pub fn genus(&self) -> usize {
        self.bits.len() / 2
    }
    /// All 2^{2g} classes, in binary order of the bit string.
    pub fn all(genus: usize) -> Vec<HomologyClass> {
        let n = 2 * genus;
        (0..1u32 << n)
            .map(|m| HomologyClass {
                bits: (0..n).map(|i| ((m >> (n - 1 - i)) & 1) as u8).collect(),
            })
            .collect()
    }
    /// Parses a bit string such as `"01"`; the empty string is the planar class.
    pub fn parse(s: &str) -> Result<HomologyClass> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Precondition(format!("bad sector string {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if bits.len() % 2 != 0 {
            return Err(Error::Precondition("sector needs an even number of bits".into()));
        }
        Ok(HomologyClass { bits })
    }
}

impl fmt::Display for HomologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

fn check_genus(g: &EmbeddedGraph, alpha: &HomologyClass) -> Result<()> {
    if !alpha.bits.len().is_multiple_of(2) || alpha.genus() != g.genus() {
        return Err(Error::GenusMismatch {
            class: alpha.genus(),
            surface: g.genus(),
        });
    }
    Ok(())
}

/// ⟨α, γ⟩ mod 2 for a closed curve of winding `w`.
///
/// With ⟨γ,e₁⟩ = Wy and ⟨γ,e₂⟩ = Wx, the class with bits (a, b) is b·e₁ + a·e₂,
/// so the pairing is a·Wx + b·Wy.
pub fn pairing_winding(g: &EmbeddedGraph, alpha: &HomologyClass, w: [i64; 2]) -> Result<u8> {
    check_genus(g, alpha)?;
    if alpha.genus() == 0 {
        return Ok(0);
    }
    let (a, b) = (alpha.bits[0] as i64, alpha.bits[1] as i64);
    Ok(((a * w[0] + b * w[1]).rem_euclid(2)) as u8)
}

pub fn pairing(g: &EmbeddedGraph, alpha: &HomologyClass, walk: &[Dart]) -> Result<u8> {
    pairing_winding(g, alpha, winding(g, walk))
}

/// Cut lines used to define the generators: the horizontal line y = y₀ − ε
/// and the vertical line x = x₀ − ε, with ε half the smallest coordinate gap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutLines {
    pub horizontal_y: f64,
    pub vertical_x: f64,
}

pub fn cut_lines(g: &EmbeddedGraph) -> CutLines {
    let place = |mut c: Vec<f64>| {
        c.sort_by(f64::total_cmp);
        let gap = c
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&d| d > 1e-9)
            .fold(f64::INFINITY, f64::min);
        let eps = if gap.is_finite() { gap / 2.0 } else { 0.5 };
        c.first().copied().unwrap_or(0.0) - eps
    };
    CutLines {
        horizontal_y: place(g.vertices().iter().map(|v| v.y).collect()),
        vertical_x: place(g.vertices().iter().map(|v| v.x).collect()),
    }
}

/// Signed crossings of the lifted walk with the periodic copies of the cut
/// lines: `[vertical-line crossings, horizontal-line crossings]`.
pub fn cut_line_crossings(g: &EmbeddedGraph, walk: &[Dart]) -> [i64; 2] {
    let Surface::Torus { px, py } = g.surface() else {
        return [0, 0];
    };
    let cuts = cut_lines(g);
    let count = |from: f64, to: f64, c: f64, p: f64| -> i64 {
        // number of k with from < c + k p < to, signed by direction
        let (lo, hi, s) = if to >= from { (from, to, 1) } else { (to, from, -1) };
        let first = ((lo - c) / p).floor() as i64 + 1;
        let last = ((hi - c) / p).ceil() as i64 - 1;
        s * (last - first + 1).max(0)
    };
    let mut out = [0, 0];
    for &d in walk {
        let t = &g.vertices()[g.tail(d)];
        let disp = g.disp(d);
        out[0] += count(t.x, t.x + disp[0], cuts.vertical_x, px);
        out[1] += count(t.y, t.y + disp[1], cuts.horizontal_y, py);
    }
    out
}

/// Whether two passes through `v` cross: their edge slots interleave in the
/// rotation at `v`.
pub fn vertex_crossing(g: &EmbeddedGraph, v: usize, a: (usize, usize), b: (usize, usize)) -> Result<bool> {
    let slot = |e: usize| {
        g.dart_from(v, e).map(|d| g.rotation_position(d)).ok_or_else(|| {
            Error::Precondition(format!(
                "edge {} does not meet vertex {}",
                g.edges()[e].id,
                g.vertices()[v].id
            ))
        })
    };
    let ids = [a.0, a.1, b.0, b.1];
    for i in 0..4 {
        for j in i + 1..4 {
            if ids[i] == ids[j] {
                return Err(Error::SlotClash {
                    vertex: g.vertices()[v].id,
                    edge: g.edges()[ids[i]].id,
                });
            }
        }
    }
    let (p0, p1) = (slot(a.0)?, slot(a.1)?);
    let (q0, q1) = (slot(b.0)?, slot(b.1)?);
    let (lo, hi) = (p0.min(p1), p0.max(p1));
    let inside = |q: usize| lo < q && q < hi;
    Ok(inside(q0) != inside(q1))
}

/// Passes of a closed walk: (vertex, incoming edge, outgoing edge).
pub fn passes(g: &EmbeddedGraph, walk: &[Dart]) -> Vec<(usize, usize, usize)> {
    let n = walk.len();
    (0..n)
        .map(|i| {
            let (d, e) = (walk[i], walk[(i + 1) % n]);
            (g.head(d), d.edge(), e.edge())
        })
        .collect()
}

fn group_passes(g: &EmbeddedGraph, l: &Loop) -> BTreeMap<usize, Vec<(usize, usize)>> {
    let mut by_vertex: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (v, a, b) in passes(g, l.darts()) {
        by_vertex.entry(v).or_default().push((a, b));
    }
    by_vertex
}

/// Self-intersection count of a loop.
pub fn self_crossings(g: &EmbeddedGraph, l: &Loop) -> Result<usize> {
    let mut count = 0;
    for (v, ps) in group_passes(g, l) {
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                count += vertex_crossing(g, v, ps[i], ps[j])? as usize;
            }
        }
    }
    Ok(count)
}

/// Mutual intersection count of two edge-disjoint loops.
pub fn mutual_crossings(g: &EmbeddedGraph, l1: &Loop, l2: &Loop) -> Result<usize> {
    if l1.shares_edge(l2) {
        return Err(Error::NotEdgeDisjoint);
    }
    let p2 = group_passes(g, l2);
    let mut count = 0;
    for (v, ps) in group_passes(g, l1) {
        if let Some(qs) = p2.get(&v) {
            for &p in &ps {
                for &q in qs {
                    count += vertex_crossing(g, v, p, q)? as usize;
                }
            }
        }
    }
    Ok(count)
}

/// Crossing count of one loop (self) or of a pair of loops (mutual).
pub fn crossing_count(g: &EmbeddedGraph, items: &[&Loop]) -> Result<usize> {
    match items {
        [l] => self_crossings(g, l),
        [l1, l2] => mutual_crossings(g, l1, l2),
        _ => Err(Error::Precondition("crossing_count takes one loop or a pair".into())),
    }
}

/// c(α) = Π_k (−1)^{1 + a_k + b_k + a_k b_k}.
pub fn sector_sign(alpha: &HomologyClass) -> i32 {
    alpha
        .bits
        .chunks(2)
        .map(|p| {
            let (a, b) = (p[0] as i32, p[1] as i32);
            if (1 + a + b + a * b) % 2 == 0 {
                1
            } else {
                -1
            }
        })
        .product()
}

/// (−1)^{τ(γ) + ⟨α,γ⟩} for a closed non-backtracking walk.
pub fn closed_walk_sign(g: &EmbeddedGraph, alpha: &HomologyClass, walk: &[Dart]) -> Result<i32> {
    let tau = turning_number(g, walk)?;
    let p = pairing(g, alpha, walk)? as i64;
    Ok(if (tau + p).rem_euclid(2) == 0 { 1 } else { -1 })
}
