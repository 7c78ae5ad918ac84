//! Face tracing, the dual graph and dual paths.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dart, EmbeddedGraph};
use crate::subgraph::EdgeSubset;

/// Faces of an embedded graph. Every face lies to the left of its darts.
///
/// A *corner* is named by the dart arriving at it: corner `d` sits at
/// `head(d)` inside `face_of[d]`, between `d` and the next dart of the face.
#[derive(Debug, Clone)]
pub struct DualData {
    pub faces: Vec<Vec<Dart>>,
    pub face_of: Vec<usize>,
    pub pos_in_face: Vec<usize>,
    /// For each primal edge: (face of the forward dart, face of the reverse dart).
    pub dual_edges: Vec<(usize, usize)>,
    /// Angle of each corner measured inside its face, in (0, 2π].
    pub corner_angle: Vec<f64>,
}

/// Successor of `d` along its face.
pub fn next_in_face(g: &EmbeddedGraph, d: Dart) -> Dart {
    let r = d.rev();
    let v = g.tail(r);
    let rot = g.rotation(v);
    rot[(g.rotation_position(r) + rot.len() - 1) % rot.len()]
}

/// Counterclockwise angle from direction `from` to direction `to`, in (0, 2π].
pub(crate) fn ccw_gap(from: f64, to: f64) -> f64 {
    let a = (to - from).rem_euclid(TAU);
    if a < 1e-15 {
        TAU
    } else {
        a
    }
}

pub fn face_trace(g: &EmbeddedGraph) -> Result<DualData> {
    if g.num_vertices() == 0 {
        return Err(Error::Embedding("empty graph".into()));
    }
    if g.components() != 1 {
        return Err(Error::Embedding("face tracing needs a connected graph".into()));
    }
    let nd = g.num_darts();
    let mut face_of = vec![usize::MAX; nd];
    let mut pos_in_face = vec![0; nd];
    let mut faces = Vec::new();
    for start in g.darts() {
        if face_of[start.index()] != usize::MAX {
            continue;
        }
        let f = faces.len();
        let mut trace = Vec::new();
        let mut d = start;
        loop {
            face_of[d.index()] = f;
            pos_in_face[d.index()] = trace.len();
            trace.push(d);
            d = next_in_face(g, d);
            if d == start {
                break;
            }
        }
        faces.push(trace);
    }
    let (v, e, f) = (g.num_vertices() as i64, g.num_edges() as i64, faces.len() as i64);
    let chi = 2 - 2 * g.genus() as i64;
    if v - e + f != chi {
        return Err(Error::Embedding(format!(
            "Euler check failed: V - E + F = {} but the surface needs {} (non-cellular embedding?)",
            v - e + f,
            chi
        )));
    }
    let dual_edges = (0..g.num_edges())
        .map(|e| (face_of[2 * e], face_of[2 * e + 1]))
        .collect();
    let corner_angle = g
        .darts()
        .map(|d| ccw_gap(g.angle(next_in_face(g, d)), g.angle(d.rev())))
        .collect();
    Ok(DualData {
        faces,
        face_of,
        pos_in_face,
        dual_edges,
        corner_angle,
    })
}

impl DualData {
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
    /// Corners at vertex `v`, in dart order.
    pub fn corners_at(&self, g: &EmbeddedGraph, v: usize) -> Vec<Dart> {
        let mut c: Vec<Dart> = g.rotation(v).iter().map(|d| d.rev()).collect();
        c.sort();
        c
    }
    /// Faces containing `v` on their boundary, sorted and deduplicated.
    pub fn faces_at(&self, g: &EmbeddedGraph, v: usize) -> Vec<usize> {
        let mut f: Vec<usize> = self.corners_at(g, v).iter().map(|d| self.face_of[d.index()]).collect();
        f.sort();
        f.dedup();
        f
    }
    /// First corner of `v` lying in face `f`.
    pub fn corner_in_face(&self, g: &EmbeddedGraph, v: usize, f: usize) -> Option<Dart> {
        self.corners_at(g, v).into_iter().find(|d| self.face_of[d.index()] == f)
    }
}

/// A path in the dual graph, stored as the primal darts it crosses.
#[derive(Debug, Clone, Serialize)]
pub struct DualPath {
    pub faces: Vec<usize>,
    /// `crossings[i]` is the dart of face `faces[i]` whose edge is crossed
    /// to reach `faces[i + 1]`.
    pub crossings: Vec<Dart>,
    pub flipped: EdgeSubset,
    /// True when no path avoiding the edges at the correlation endpoints existed.
    pub fallback: bool,
}

impl DualPath {
    pub fn trivial(g: &EmbeddedGraph, face: usize) -> DualPath {
        DualPath {
            faces: vec![face],
            crossings: Vec::new(),
            flipped: EdgeSubset::empty(g.num_edges()),
            fallback: false,
        }
    }
    pub fn edges(&self) -> Vec<usize> {
        self.crossings.iter().map(|d| d.edge()).collect()
    }
}

/// Shortest dual path from `a_star` to `b_star`; among shortest paths the
/// crossed edge ids are lexicographically smallest. With `avoid = Some((a, b))`
/// edges incident to a or b are avoided when possible.
pub fn dual_path(
    g: &EmbeddedGraph,
    dual: &DualData,
    a_star: usize,
    b_star: usize,
    avoid: Option<(usize, usize)>,
) -> Result<DualPath> {
    let nf = dual.num_faces();
    if a_star >= nf || b_star >= nf {
        return Err(Error::Precondition("face index out of range".into()));
    }
    if a_star == b_star {
        return Err(Error::Precondition("dual path endpoints must differ".into()));
    }
    if let Some((a, b)) = avoid {
        let touches = |e: usize| {
            let ed = &g.edges()[e];
            ed.u == a || ed.v == a || ed.u == b || ed.v == b
        };
        if let Some(p) = shortest(g, dual, a_star, b_star, &touches) {
            return Ok(p);
        }
        let mut p = shortest(g, dual, a_star, b_star, &|_| false).ok_or(Error::NoPath(a_star, b_star))?;
        p.fallback = true;
        return Ok(p);
    }
    shortest(g, dual, a_star, b_star, &|_| false).ok_or(Error::NoPath(a_star, b_star))
}

fn shortest(
    g: &EmbeddedGraph,
    dual: &DualData,
    a_star: usize,
    b_star: usize,
    banned: &dyn Fn(usize) -> bool,
) -> Option<DualPath> {
    let nf = dual.num_faces();
    // adjacency: (edge id, dart on this side, other face), sorted by edge id
    let mut adj: Vec<Vec<(usize, Dart, usize)>> = vec![Vec::new(); nf];
    for (e, &(f1, f2)) in dual.dual_edges.iter().enumerate() {
        if f1 == f2 || banned(e) {
            continue;
        }
        adj[f1].push((e, Dart::new(e, false), f2));
        adj[f2].push((e, Dart::new(e, true), f1));
    }
    let mut dist = vec![usize::MAX; nf];
    dist[b_star] = 0;
    let mut queue = VecDeque::from([b_star]);
    while let Some(f) = queue.pop_front() {
        for &(_, _, h) in &adj[f] {
            if dist[h] == usize::MAX {
                dist[h] = dist[f] + 1;
                queue.push_back(h);
            }
        }
    }
    if dist[a_star] == usize::MAX {
        return None;
    }
    let mut faces = vec![a_star];
    let mut crossings = Vec::new();
    let mut flipped = EdgeSubset::empty(g.num_edges());
    let mut f = a_star;
    while f != b_star {
        let &(e, d, h) = adj[f]
            .iter()
            .filter(|(_, _, h)| dist[*h] + 1 == dist[f])
            .min_by_key(|(e, _, _)| *e)
            .expect("BFS layer has a predecessor");
        crossings.push(d);
        flipped.insert(e);
        faces.push(h);
        f = h;
    }
    Some(DualPath {
        faces,
        crossings,
        flipped,
        fallback: false,
    })
}

/// Couplings with the sign flipped on the edges crossed by a dual path.
#[derive(Debug, Clone)]
pub struct SignedCouplings {
    pub k: Vec<f64>,
    pub flipped: EdgeSubset,
}

impl SignedCouplings {
    pub fn new(k: Vec<f64>, flipped: EdgeSubset) -> SignedCouplings {
        assert_eq!(k.len(), flipped.universe());
        SignedCouplings { k, flipped }
    }
    pub fn unflipped(k: Vec<f64>) -> SignedCouplings {
        let n = k.len();
        SignedCouplings {
            k,
            flipped: EdgeSubset::empty(n),
        }
    }
    pub fn k_tilde(&self) -> Vec<f64> {
        self.k
            .iter()
            .enumerate()
            .map(|(e, &k)| if self.flipped.contains(e) { -k } else { k })
            .collect()
    }
}
