//! Open walks a → b closed up through the faces a* and b* and a dual path.
//!
//! The closing curve leaves b into the corner of b inside b*, runs along the
//! boundary of each face of the dual path (boundary on its right), crosses
//! each dual edge at the midpoint of its primal edge, and finally enters the
//! corner of a inside a* and returns to a. Its turning is the exterior angles
//! of the walk, plus a constant that depends only on the corners and the
//! dual path, plus the two joins at a and b.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{cap, Error, Result};
use crate::faces::{next_in_face, DualData, DualPath};
use crate::geometry::{round_turning, HomologyClass};
use crate::graph::{Dart, EmbeddedGraph, Surface};

use super::enumerate::{WalkEnumerator, MAX_LEN_CAP};
use super::operator::{dart_phase, transfer_operator, C64, RESIDUE_TOL};
use super::series::{alpha_bits, walk_sign};

/// Signed angle from direction angle `from` to direction angle `to`, in (−π, π].
fn turn_between(from: f64, to: f64) -> f64 {
    let t = (to - from).rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Closure {
    pub a: usize,
    pub b: usize,
    pub a_star: usize,
    pub b_star: usize,
    /// Corners are named by the dart arriving at them.
    pub corner_a: Dart,
    pub corner_b: Dart,
    /// Direction angles of the corner bisectors, pointing into the faces.
    pub bisector_a: f64,
    pub bisector_b: f64,
    /// Turning of the closing curve between the two corners.
    pub constant_turn: f64,
    /// Period displacement of the closing curve from b back to a.
    pub hug_winding: [i64; 2],
    pub eta: DualPath,
}

impl Closure {
    /// Builds the closing curve through the given corners along `eta`, a
    /// dual path from the face of `corner_a` to the face of `corner_b`.
    pub fn new(g: &EmbeddedGraph, dual: &DualData, corner_a: Dart, corner_b: Dart, eta: DualPath) -> Result<Closure> {
        let (a, b) = (g.head(corner_a), g.head(corner_b));
        if a == b {
            return Err(Error::Precondition("correlation endpoints must differ".into()));
        }
        let a_star = dual.face_of[corner_a.index()];
        let b_star = dual.face_of[corner_b.index()];
        if eta.faces.first() != Some(&a_star) || eta.faces.last() != Some(&b_star) {
            return Err(Error::Precondition("dual path does not join the corner faces".into()));
        }
        let theta = |d: Dart| dual.corner_angle[d.index()];
        let bisector = |d: Dart| g.angle(next_in_face(g, d)) + theta(d) / 2.0;

        let m = eta.crossings.len();
        let mut total = -theta(corner_b) / 2.0;
        let vb = &g.vertices()[b];
        let mut pos = [vb.x, vb.y];
        let mut cur = next_in_face(g, corner_b);
        let mut i = m;
        let limit = g.num_darts() * (m + 2) + 2;
        let mut steps = 0;
        loop {
            steps += 1;
            if steps > limit {
                return Err(Error::Precondition(
                    "closing curve did not reach the corner of a".into(),
                ));
            }
            if i > 0 && cur == eta.crossings[i - 1].rev() {
                // out across the edge midpoint and back along the other side
                total -= 2.0 * FRAC_PI_2;
                cur = eta.crossings[i - 1];
                i -= 1;
            } else {
                let d = g.disp(cur);
                pos = [pos[0] + d[0], pos[1] + d[1]];
            }
            if i == 0 && cur == corner_a {
                total -= theta(corner_a) / 2.0;
                break;
            }
            total += PI - theta(cur);
            cur = next_in_face(g, cur);
        }
        let va = &g.vertices()[a];
        let hug_winding = match g.surface() {
            Surface::Plane => [0, 0],
            Surface::Torus { px, py } => {
                let wx = (pos[0] - va.x) / px;
                let wy = (pos[1] - va.y) / py;
                if (wx - wx.round()).abs() > 1e-6 || (wy - wy.round()).abs() > 1e-6 {
                    return Err(Error::Precondition("closing curve does not end at a lift of a".into()));
                }
                [wx.round() as i64, wy.round() as i64]
            }
        };
        Ok(Closure {
            a,
            b,
            a_star,
            b_star,
            corner_a,
            corner_b,
            bisector_a: bisector(corner_a),
            bisector_b: bisector(corner_b),
            constant_turn: total,
            hug_winding,
            eta,
        })
    }

    /// Default closure: a* and b* are the smallest faces at a and b, the
    /// corners are the first corners of a and b in them, and the dual path is
    /// the shortest one, avoiding the edges at a and b when `avoid` is set.
    pub fn default_for(g: &EmbeddedGraph, dual: &DualData, a: usize, b: usize, avoid: bool) -> Result<Closure> {
        if a == b {
            return Err(Error::Precondition("correlation endpoints must differ".into()));
        }
        let a_star = *dual
            .faces_at(g, a)
            .first()
            .ok_or_else(|| Error::Precondition("vertex a has no incident edge".into()))?;
        let b_star = *dual
            .faces_at(g, b)
            .first()
            .ok_or_else(|| Error::Precondition("vertex b has no incident edge".into()))?;
        let corner_a = dual.corner_in_face(g, a, a_star).expect("face at a");
        let corner_b = dual.corner_in_face(g, b, b_star).expect("face at b");
        let eta = if a_star == b_star {
            DualPath::trivial(g, a_star)
        } else {
            crate::faces::dual_path(g, dual, a_star, b_star, avoid.then_some((a, b)))?
        };
        Closure::new(g, dual, corner_a, corner_b, eta)
    }

    /// Turning at b: from the last dart into the corner bisector.
    pub fn join_b(&self, g: &EmbeddedGraph, last: Dart) -> f64 {
        turn_between(g.angle(last), self.bisector_b)
    }
    /// Turning at a: from the reversed bisector onto the first dart.
    pub fn join_a(&self, g: &EmbeddedGraph, first: Dart) -> f64 {
        turn_between(self.bisector_a + PI, g.angle(first))
    }
    /// Total exterior angle of the closed curve made from a walk with the
    /// given internal turning and end darts.
    pub fn total_turn(&self, g: &EmbeddedGraph, internal: f64, first: Dart, last: Dart) -> f64 {
        internal + self.join_b(g, last) + self.constant_turn + self.join_a(g, first)
    }
    pub fn winding(&self, walk_winding: [i64; 2]) -> [i64; 2] {
        [
            walk_winding[0] + self.hug_winding[0],
            walk_winding[1] + self.hug_winding[1],
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OpenSum {
    /// `terms[n]` is the contribution of walks of length n.
    pub terms: Vec<f64>,
    pub backend: &'static str,
}

impl OpenSum {
    pub fn total(&self) -> f64 {
        self.terms.iter().sum()
    }
}

/// −Σ_γ (−1)^{τ(closure) + ⟨α, closure⟩} Π K̃ over non-backtracking walks
/// a → b of length ≤ `max_len`, by enumeration.
pub fn open_walk_sum_enumerate(
    g: &EmbeddedGraph,
    k_tilde: &[f64],
    closure: &Closure,
    alpha: &HomologyClass,
    max_len: usize,
    workers: usize,
) -> Result<OpenSum> {
    if k_tilde.len() != g.num_edges() {
        return Err(Error::Precondition("one coupling per edge required".into()));
    }
    let bits = alpha_bits(g, alpha)?;
    let en = WalkEnumerator::new(g)?;
    let shards = en.fold_open(
        closure.a,
        closure.b,
        max_len,
        workers,
        || (vec![0.0; max_len + 1], None),
        |acc: &mut (Vec<f64>, Option<Error>), w: &[Dart], internal, wind| {
            let total = closure.total_turn(g, internal, w[0], *w.last().unwrap());
            match walk_sign(total, bits, closure.winding(wind)) {
                Ok(s) => {
                    let p: f64 = w.iter().map(|d| k_tilde[d.edge()]).product();
                    acc.0[w.len()] -= s as f64 * p;
                }
                Err(e) => acc.1 = Some(e),
            }
        },
    )?;
    let mut terms = vec![0.0; max_len + 1];
    for (t, err) in shards {
        if let Some(e) = err {
            return Err(e);
        }
        for (x, y) in terms.iter_mut().zip(t) {
            *x += y;
        }
    }
    Ok(OpenSum {
        terms,
        backend: "enumerate",
    })
}

/// The same sum from powers of the transition operator.
pub fn open_walk_sum_operator(
    g: &EmbeddedGraph,
    k_tilde: &[f64],
    closure: &Closure,
    alpha: &HomologyClass,
    max_len: usize,
) -> Result<OpenSum> {
    cap("maxLen", max_len, MAX_LEN_CAP)?;
    let bits = alpha_bits(g, alpha)?;
    let m = transfer_operator(g, k_tilde, alpha)?;
    let abs = m.map(|z| C64::new(z.norm(), 0.0));
    let n = g.num_darts();
    let mut v = DMatrix::from_element(1, n, C64::new(0.0, 0.0));
    let mut va = DMatrix::from_element(1, n, C64::new(0.0, 0.0));
    for &e in g.rotation(closure.a) {
        let w = k_tilde[e.edge()] * dart_phase(g, bits, e);
        v[(0, e.index())] = C64::from_polar(1.0, closure.join_a(g, e) / 2.0) * w;
        va[(0, e.index())] = C64::new(w.abs(), 0.0);
    }
    let hw = closure.hug_winding;
    let hug_phase = if (bits.0 * hw[0] + bits.1 * hw[1]).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let constant = C64::from_polar(1.0, closure.constant_turn / 2.0) * hug_phase;
    let ends: Vec<(Dart, C64)> = g
        .rotation(closure.b)
        .iter()
        .map(|d| {
            let f = d.rev();
            (f, C64::from_polar(1.0, closure.join_b(g, f) / 2.0))
        })
        .collect();
    let mut terms = vec![0.0; max_len + 1];
    for (len, term) in terms.iter_mut().enumerate().skip(1) {
        if len > 1 {
            v = &v * &m;
            va = &va * &abs;
        }
        let mut s = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for &(f, phase) in &ends {
            s += v[(0, f.index())] * phase;
            scale += va[(0, f.index())].re;
        }
        let s = s * constant;
        if s.im.abs() > RESIDUE_TOL * scale.max(1.0) {
            return Err(Error::Residue {
                length: len,
                residue: s.im,
            });
        }
        *term = -s.re;
    }
    Ok(OpenSum {
        terms,
        backend: "operator",
    })
}

/// (−1)^{τ} of the closure of a single walk, for inspection.
pub fn closure_turning(g: &EmbeddedGraph, closure: &Closure, walk: &[Dart]) -> Result<i64> {
    if walk.is_empty() || g.tail(walk[0]) != closure.a || g.head(*walk.last().unwrap()) != closure.b {
        return Err(Error::Precondition("walk does not run from a to b".into()));
    }
    let mut internal = 0.0;
    for w in walk.windows(2) {
        internal += crate::geometry::dart_turn(g, w[0], w[1])?;
    }
    round_turning(closure.total_turn(g, internal, walk[0], *walk.last().unwrap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faces::face_trace;
    use crate::fixtures::{self, Fixture};

    #[test]
    fn single_edge_and_path_sums() {
        let alpha = HomologyClass::zero(0);
        let g = fixtures::load(Fixture::E1);
        let dual = face_trace(&g).unwrap();
        let cl = Closure::default_for(&g, &dual, 0, 1, true).unwrap();
        assert_eq!(cl.a_star, cl.b_star);
        let s = open_walk_sum_enumerate(&g, &[0.3], &cl, &alpha, 6, 1).unwrap();
        assert!((s.total() - 0.3).abs() < 1e-15);

        let g = fixtures::load(Fixture::P3);
        let dual = face_trace(&g).unwrap();
        let cl = Closure::default_for(&g, &dual, 0, 2, true).unwrap();
        let s = open_walk_sum_enumerate(&g, &[0.3, 0.5], &cl, &alpha, 6, 1).unwrap();
        assert!((s.total() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn backends_agree_on_grid() {
        let g = fixtures::load(Fixture::Grid3);
        let dual = face_trace(&g).unwrap();
        let k: Vec<f64> = (0..g.num_edges()).map(|e| 0.2 + 0.01 * e as f64).collect();
        for (a, b) in [(0, 8), (0, 4), (1, 7), (0, 1)] {
            let cl = Closure::default_for(&g, &dual, a, b, true).unwrap();
            let mut kt = k.clone();
            for e in cl.eta.flipped.iter() {
                kt[e] = -kt[e];
            }
            let alpha = HomologyClass::zero(0);
            let x = open_walk_sum_enumerate(&g, &kt, &cl, &alpha, 12, 1).unwrap();
            let y = open_walk_sum_operator(&g, &kt, &cl, &alpha, 12).unwrap();
            for n in 0..=12 {
                assert!((x.terms[n] - y.terms[n]).abs() < 1e-13, "({a},{b}) n={n}");
            }
        }
    }

    #[test]
    fn torus_backends_agree() {
        let g = fixtures::load(Fixture::T33);
        let dual = face_trace(&g).unwrap();
        let k = vec![0.2; g.num_edges()];
        let cl = Closure::default_for(&g, &dual, 0, 4, true).unwrap();
        let mut kt = k.clone();
        for e in cl.eta.flipped.iter() {
            kt[e] = -kt[e];
        }
        for alpha in HomologyClass::all(1) {
            let x = open_walk_sum_enumerate(&g, &kt, &cl, &alpha, 9, 1).unwrap();
            let y = open_walk_sum_operator(&g, &kt, &cl, &alpha, 9).unwrap();
            assert!((x.total() - y.total()).abs() < 1e-13, "{alpha}");
        }
    }
}
