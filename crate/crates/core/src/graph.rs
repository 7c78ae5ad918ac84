//! Embedded graphs: loading, validation of the straight-line embedding and
//! the rotation system derived from it.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate tolerance for the embedding checks.
pub const SEGMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    Plane,
    Torus { px: f64, py: f64 },
}

impl Surface {
    pub fn genus(&self) -> usize {
        match self {
            Surface::Plane => 0,
            Surface::Torus { .. } => 1,
        }
    }

    fn period(&self) -> [f64; 2] {
        match *self {
            Surface::Plane => [0.0, 0.0],
            Surface::Torus { px, py } => [px, py],
        }
    }
}

/// A directed edge. Index `2e` runs `u -> v`, `2e + 1` runs `v -> u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Dart(pub u32);

impl Dart {
    pub fn new(edge: usize, reversed: bool) -> Dart {
        Dart((2 * edge + reversed as usize) as u32)
    }
    pub fn edge(self) -> usize {
        (self.0 >> 1) as usize
    }
    pub fn reversed(self) -> bool {
        self.0 & 1 == 1
    }
    pub fn rev(self) -> Dart {
        Dart(self.0 ^ 1)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: i64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: i64,
    pub u: usize,
    pub v: usize,
    /// Coupling L (not tanh L).
    pub coupling: f64,
    /// Period displacement from u to v; zero on the plane.
    pub wrap: [i32; 2],
}

/// Serialized graph document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub surface: SurfaceDoc,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SurfaceDoc {
    Plane,
    Torus { period: [f64; 2] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: i64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: i64,
    pub u: i64,
    pub v: i64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wrap: Option<[i32; 2]>,
}

#[derive(Debug, Clone)]
pub struct EmbeddedGraph {
    surface: Surface,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    /// Outgoing darts at each vertex, counterclockwise from angle 0.
    rotation: Vec<Vec<Dart>>,
    /// Position of each dart in the rotation at its tail.
    rot_pos: Vec<usize>,
    angle: Vec<f64>,
}

/// Parse and validate a graph document from JSON text.
pub fn load_graph(text: &str) -> Result<EmbeddedGraph> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    EmbeddedGraph::from_document(&doc)
}

impl EmbeddedGraph {
    pub fn from_document(doc: &GraphDocument) -> Result<EmbeddedGraph> {
        let surface = match doc.surface {
            SurfaceDoc::Plane => Surface::Plane,
            SurfaceDoc::Torus { period } => {
                if !(period[0] > 0.0 && period[1] > 0.0 && period.iter().all(|p| p.is_finite())) {
                    return Err(Error::Schema("torus period must be positive".into()));
                }
                Surface::Torus {
                    px: period[0],
                    py: period[1],
                }
            }
        };

        let mut vdocs: Vec<&VertexDoc> = doc.vertices.iter().collect();
        vdocs.sort_by_key(|v| v.id);
        let mut index = BTreeMap::new();
        let mut vertices = Vec::with_capacity(vdocs.len());
        for v in vdocs {
            if !(v.x.is_finite() && v.y.is_finite()) {
                return Err(Error::Schema(format!("vertex {} has non-finite coordinates", v.id)));
            }
            if index.insert(v.id, vertices.len()).is_some() {
                return Err(Error::Schema(format!("duplicate vertex id {}", v.id)));
            }
            vertices.push(Vertex {
                id: v.id,
                x: v.x,
                y: v.y,
            });
        }

        let mut edocs: Vec<&EdgeDoc> = doc.edges.iter().collect();
        edocs.sort_by_key(|e| e.id);
        let mut edges = Vec::with_capacity(edocs.len());
        let mut seen = BTreeSet::new();
        for e in edocs {
            if !seen.insert(e.id) {
                return Err(Error::Schema(format!("duplicate edge id {}", e.id)));
            }
            if !e.l.is_finite() {
                return Err(Error::Schema(format!("edge {} has a non-finite coupling", e.id)));
            }
            let look = |id: i64| {
                index
                    .get(&id)
                    .copied()
                    .ok_or_else(|| Error::Schema(format!("edge {} references unknown vertex {}", e.id, id)))
            };
            let (u, v) = (look(e.u)?, look(e.v)?);
            let wrap = e.wrap.unwrap_or([0, 0]);
            if surface == Surface::Plane && wrap != [0, 0] {
                return Err(Error::Surface(format!("edge {} carries a wrap on the plane", e.id)));
            }
            if u == v {
                return Err(Error::Embedding(format!("edge {} is a self-loop", e.id)));
            }
            edges.push(Edge {
                id: e.id,
                u,
                v,
                coupling: e.l,
                wrap,
            });
        }
        EmbeddedGraph::build(surface, vertices, edges)
    }

    fn build(surface: Surface, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<EmbeddedGraph> {
        let mut g = EmbeddedGraph {
            surface,
            vertices,
            edges,
            rotation: Vec::new(),
            rot_pos: Vec::new(),
            angle: Vec::new(),
        };
        g.check_duplicates()?;
        g.check_embedding()?;
        g.compute_rotation()?;
        Ok(g)
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            surface: match self.surface {
                Surface::Plane => SurfaceDoc::Plane,
                Surface::Torus { px, py } => SurfaceDoc::Torus { period: [px, py] },
            },
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexDoc {
                    id: v.id,
                    x: v.x,
                    y: v.y,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id,
                    u: self.vertices[e.u].id,
                    v: self.vertices[e.v].id,
                    l: e.coupling,
                    wrap: (e.wrap != [0, 0]).then_some(e.wrap),
                })
                .collect(),
        }
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }
    pub fn genus(&self) -> usize {
        self.surface.genus()
    }
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_darts(&self) -> usize {
        2 * self.edges.len()
    }
    pub fn darts(&self) -> impl Iterator<Item = Dart> {
        (0..self.num_darts() as u32).map(Dart)
    }
    pub fn vertex_index(&self, id: i64) -> Option<usize> {
        self.vertices.binary_search_by_key(&id, |v| v.id).ok()
    }
    pub fn edge_index(&self, id: i64) -> Option<usize> {
        self.edges.binary_search_by_key(&id, |e| e.id).ok()
    }

    pub fn tail(&self, d: Dart) -> usize {
        let e = &self.edges[d.edge()];
        if d.reversed() {
            e.v
        } else {
            e.u
        }
    }
    pub fn head(&self, d: Dart) -> usize {
        self.tail(d.rev())
    }
    pub fn wrap(&self, d: Dart) -> [i32; 2] {
        let w = self.edges[d.edge()].wrap;
        if d.reversed() {
            [-w[0], -w[1]]
        } else {
            w
        }
    }
    /// Displacement of the dart in the universal cover.
    pub fn disp(&self, d: Dart) -> [f64; 2] {
        let e = &self.edges[d.edge()];
        let p = self.surface.period();
        let (a, b) = (&self.vertices[e.u], &self.vertices[e.v]);
        let dx = b.x + e.wrap[0] as f64 * p[0] - a.x;
        let dy = b.y + e.wrap[1] as f64 * p[1] - a.y;
        if d.reversed() {
            [-dx, -dy]
        } else {
            [dx, dy]
        }
    }
    /// Direction angle of the dart in `[0, 2π)`.
    pub fn angle(&self, d: Dart) -> f64 {
        self.angle[d.index()]
    }
    pub fn rotation(&self, v: usize) -> &[Dart] {
        &self.rotation[v]
    }
    pub fn rotation_position(&self, d: Dart) -> usize {
        self.rot_pos[d.index()]
    }
    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }
    /// The dart leaving `v` along edge `e`.
    pub fn dart_from(&self, v: usize, e: usize) -> Option<Dart> {
        let edge = self.edges.get(e)?;
        if edge.u == v {
            Some(Dart::new(e, false))
        } else if edge.v == v {
            Some(Dart::new(e, true))
        } else {
            None
        }
    }
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.rotation[a].iter().any(|&d| self.head(d) == b)
    }

    /// Per-edge couplings L.
    pub fn couplings(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.coupling).collect()
    }
    /// Per-edge K = tanh L.
    pub fn tanh_couplings(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.coupling.tanh()).collect()
    }
    pub fn with_couplings(&self, l: &[f64]) -> EmbeddedGraph {
        assert_eq!(l.len(), self.edges.len());
        let mut g = self.clone();
        for (e, &x) in g.edges.iter_mut().zip(l) {
            e.coupling = x;
        }
        g
    }
    pub fn with_uniform_coupling(&self, l: f64) -> EmbeddedGraph {
        self.with_couplings(&vec![l; self.edges.len()])
    }
    /// Returns a copy with an extra straight edge; the embedding is revalidated.
    pub fn with_extra_edge(&self, id: i64, u: usize, v: usize, l: f64, wrap: [i32; 2]) -> Result<EmbeddedGraph> {
        let mut doc = self.to_document();
        doc.edges.push(EdgeDoc {
            id,
            u: self.vertices[u].id,
            v: self.vertices[v].id,
            l,
            wrap: (wrap != [0, 0]).then_some(wrap),
        });
        EmbeddedGraph::from_document(&doc)
    }

    /// Number of connected components (isolated vertices count).
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.num_vertices()];
        let mut count = 0;
        for s in 0..self.num_vertices() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &d in &self.rotation[v] {
                    let w = self.head(d);
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// All-pairs graph distances (BFS); `usize::MAX` when disconnected.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        (0..self.num_vertices())
            .map(|s| {
                let mut dist = vec![usize::MAX; self.num_vertices()];
                dist[s] = 0;
                let mut queue = std::collections::VecDeque::from([s]);
                while let Some(v) = queue.pop_front() {
                    for &d in &self.rotation[v] {
                        let w = self.head(d);
                        if dist[w] == usize::MAX {
                            dist[w] = dist[v] + 1;
                            queue.push_back(w);
                        }
                    }
                }
                dist
            })
            .collect()
    }

    fn check_duplicates(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            let key = if e.u < e.v {
                (e.u, e.v, e.wrap)
            } else {
                (e.v, e.u, [-e.wrap[0], -e.wrap[1]])
            };
            if !seen.insert(key) {
                return Err(Error::Embedding(format!("edge {} duplicates an earlier edge", e.id)));
            }
        }
        Ok(())
    }

    fn shifts(&self) -> Vec<[f64; 2]> {
        match self.surface {
            Surface::Plane => vec![[0.0, 0.0]],
            Surface::Torus { px, py } => {
                let reach = self
                    .edges
                    .iter()
                    .map(|e| e.wrap[0].abs().max(e.wrap[1].abs()))
                    .max()
                    .unwrap_or(0)
                    + 2;
                let mut out = Vec::new();
                for i in -reach..=reach {
                    for j in -reach..=reach {
                        out.push([i as f64 * px, j as f64 * py]);
                    }
                }
                out
            }
        }
    }

    fn check_embedding(&self) -> Result<()> {
        let shifts = self.shifts();
        let segs: Vec<([f64; 2], [f64; 2])> = (0..self.edges.len())
            .map(|e| {
                let a = &self.vertices[self.edges[e].u];
                let d = self.disp(Dart::new(e, false));
                ([a.x, a.y], [a.x + d[0], a.y + d[1]])
            })
            .collect();
        for (e, s) in segs.iter().enumerate() {
            if (s.1[0] - s.0[0]).hypot(s.1[1] - s.0[1]) <= SEGMENT_EPS {
                return Err(Error::Embedding(format!("edge {} has zero length", self.edges[e].id)));
            }
        }
        // Vertices must be distinct points of the surface.
        for i in 0..self.vertices.len() {
            for j in i..self.vertices.len() {
                let (a, b) = (&self.vertices[i], &self.vertices[j]);
                for s in &shifts {
                    if i == j && s == &[0.0, 0.0] {
                        continue;
                    }
                    if (a.x - b.x - s[0]).abs() <= SEGMENT_EPS && (a.y - b.y - s[1]).abs() <= SEGMENT_EPS {
                        return Err(Error::Embedding(format!("vertices {} and {} coincide", a.id, b.id)));
                    }
                }
            }
        }
        // No vertex in the relative interior of a segment.
        for (e, seg) in segs.iter().enumerate() {
            for v in &self.vertices {
                for s in &shifts {
                    let p = [v.x + s[0], v.y + s[1]];
                    if point_in_segment_interior(p, seg.0, seg.1) {
                        return Err(Error::Embedding(format!(
                            "vertex {} lies on edge {}",
                            v.id, self.edges[e].id
                        )));
                    }
                }
            }
        }
        // Segments meet only at shared endpoints.
        for i in 0..segs.len() {
            for j in i..segs.len() {
                for s in &shifts {
                    if i == j && s == &[0.0, 0.0] {
                        continue;
                    }
                    let (p0, p1) = segs[i];
                    let q0 = [segs[j].0[0] + s[0], segs[j].0[1] + s[1]];
                    let q1 = [segs[j].1[0] + s[0], segs[j].1[1] + s[1]];
                    if segments_conflict(p0, p1, q0, q1) {
                        return Err(Error::Embedding(format!(
                            "edges {} and {} intersect away from a shared endpoint",
                            self.edges[i].id, self.edges[j].id
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn compute_rotation(&mut self) -> Result<()> {
        let n = self.vertices.len();
        self.angle = (0..self.num_darts())
            .map(|i| {
                let d = self.disp(Dart(i as u32));
                d[1].atan2(d[0]).rem_euclid(TAU)
            })
            .collect();
        let mut rotation = vec![Vec::new(); n];
        for d in self.darts() {
            rotation[self.tail(d)].push(d);
        }
        for (v, rot) in rotation.iter_mut().enumerate() {
            rot.sort_by(|a, b| self.angle[a.index()].total_cmp(&self.angle[b.index()]));
            for w in rot.windows(2) {
                if (self.angle[w[1].index()] - self.angle[w[0].index()]).abs() < 1e-12 {
                    return Err(Error::Embedding(format!(
                        "two edges leave vertex {} in the same direction",
                        self.vertices[v].id
                    )));
                }
            }
        }
        let mut rot_pos = vec![0; self.num_darts()];
        for rot in &rotation {
            for (i, d) in rot.iter().enumerate() {
                rot_pos[d.index()] = i;
            }
        }
        self.rotation = rotation;
        self.rot_pos = rot_pos;
        Ok(())
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn close(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] - b[0]).abs() <= SEGMENT_EPS && (a[1] - b[1]).abs() <= SEGMENT_EPS
}

fn point_in_segment_interior(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    if close(p, a) || close(p, b) {
        return false;
    }
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    if cross(a, b, p).abs() / len > SEGMENT_EPS {
        return false;
    }
    let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
    t > 0.0 && t < 1.0
}

/// True when the closed segments share anything other than a common endpoint.
fn segments_conflict(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> bool {
    let lo = |a: f64, b: f64| a.min(b) - SEGMENT_EPS;
    let hi = |a: f64, b: f64| a.max(b) + SEGMENT_EPS;
    if hi(p0[0], p1[0]) < lo(q0[0], q1[0])
        || hi(q0[0], q1[0]) < lo(p0[0], p1[0])
        || hi(p0[1], p1[1]) < lo(q0[1], q1[1])
        || hi(q0[1], q1[1]) < lo(p0[1], p1[1])
    {
        return false;
    }
    let r = [p1[0] - p0[0], p1[1] - p0[1]];
    let s = [q1[0] - q0[0], q1[1] - q0[1]];
    let rl = r[0].hypot(r[1]);
    let sl = s[0].hypot(s[1]);
    let denom = r[0] * s[1] - r[1] * s[0];
    let qp = [q0[0] - p0[0], q0[1] - p0[1]];
    if denom.abs() <= SEGMENT_EPS * rl * sl {
        // Parallel: conflict only if collinear with an overlap of positive length.
        if (qp[0] * r[1] - qp[1] * r[0]).abs() / rl > SEGMENT_EPS {
            return false;
        }
        let proj = |q: [f64; 2]| ((q[0] - p0[0]) * r[0] + (q[1] - p0[1]) * r[1]) / (rl * rl);
        let (t0, t1) = (proj(q0), proj(q1));
        let (a, b) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
        return (b - a) * rl > SEGMENT_EPS;
    }
    let t = (qp[0] * s[1] - qp[1] * s[0]) / denom;
    let u = (qp[0] * r[1] - qp[1] * r[0]) / denom;
    let et = SEGMENT_EPS / rl;
    let eu = SEGMENT_EPS / sl;
    if t < -et || t > 1.0 + et || u < -eu || u > 1.0 + eu {
        return false;
    }
    let p_end = t.abs() <= et || (t - 1.0).abs() <= et;
    let q_end = u.abs() <= eu || (u - 1.0).abs() <= eu;
    !(p_end && q_end)
}
