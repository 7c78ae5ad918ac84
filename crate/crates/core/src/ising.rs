//! Ising evaluators: brute force, the high- and low-temperature expansions,
//! the walk formulas for Z and ⟨σ_a σ_b⟩, and planar duality.
//!
//! Values marked "even" are at the even-subgraph normalization, i.e. Z
//! divided by 2^|V| Π cosh L.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::faces::{dual_path, face_trace, DualData, SignedCouplings};
use crate::geometry::{sector_sign, HomologyClass};
use crate::graph::EmbeddedGraph;
use crate::methods::SeriesBackend;
use crate::subgraph::even_subgraph_gf;
use crate::walks::{Closure, WalkSeries};

/// Largest vertex count accepted by the brute-force evaluators.
pub const BRUTE_VERTEX_CAP: usize = 20;

/// An Ising model on an abstract multigraph. Self-loops are allowed and
/// contribute a constant factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsingSystem {
    pub n: usize,
    /// (u, v, L) per edge.
    pub edges: Vec<(usize, usize, f64)>,
}

impl IsingSystem {
    pub fn from_graph(g: &EmbeddedGraph) -> IsingSystem {
        IsingSystem {
            n: g.num_vertices(),
            edges: g.edges().iter().map(|e| (e.u, e.v, e.coupling)).collect(),
        }
    }

    /// Calls `f(σ, weight)` for every configuration with σ_0 = +1; the other
    /// half follows by global spin flip.
    fn for_each_state(&self, mut f: impl FnMut(u64, f64)) -> Result<()> {
        crate::error::cap("|V|", self.n, BRUTE_VERTEX_CAP)?;
        if self.n == 0 {
            f(0, 1.0);
            return Ok(());
        }
        let spin = |s: u64, v: usize| if s >> v & 1 == 0 { 1.0 } else { -1.0 };
        for s in 0..1u64 << (self.n - 1) {
            let s = s << 1;
            let energy: f64 = self.edges.iter().map(|&(u, v, l)| l * spin(s, u) * spin(s, v)).sum();
            f(s, energy.exp());
        }
        Ok(())
    }

    /// Z = Σ_σ exp(Σ L σ_u σ_v).
    pub fn partition(&self) -> Result<f64> {
        let mut z = 0.0;
        self.for_each_state(|_, w| z += w)?;
        Ok(if self.n == 0 { z } else { 2.0 * z })
    }

    /// ⟨σ_a σ_b⟩ by direct summation.
    pub fn correlation(&self, a: usize, b: usize) -> Result<f64> {
        if a >= self.n || b >= self.n {
            return Err(Error::Precondition("vertex out of range".into()));
        }
        if a == b {
            return Ok(1.0);
        }
        let (mut num, mut den) = (0.0, 0.0);
        self.for_each_state(|s, w| {
            let same = (s >> a & 1) == (s >> b & 1);
            num += if same { w } else { -w };
            den += w;
        })?;
        Ok(num / den)
    }

    /// 2^|V| Π cosh L.
    pub fn prefactor(&self) -> f64 {
        2f64.powi(self.n as i32) * self.edges.iter().map(|e| e.2.cosh()).product::<f64>()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorTerm {
    pub alpha: HomologyClass,
    pub sign: i32,
    pub series: WalkSeries,
    /// exp(−Σ_{n≤maxLen} S_n).
    pub exp_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Truncation {
    pub max_len: usize,
    pub backend: &'static str,
    /// Bound on |value − limit| at the even normalization.
    pub error_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub method: &'static str,
    /// Z / (2^|V| Π cosh L).
    pub value: f64,
    pub prefactor: f64,
    /// Z itself.
    pub full_value: f64,
    pub normalization: &'static str,
    pub truncation: Option<Truncation>,
    pub sectors: Vec<SectorTerm>,
}

const EVEN_NORMALIZATION: &str = "value is Z / (2^|V| prod cosh L); full_value is Z";

fn report(method: &'static str, value: f64, prefactor: f64) -> PartitionReport {
    PartitionReport {
        method,
        value,
        prefactor,
        full_value: value * prefactor,
        normalization: EVEN_NORMALIZATION,
        truncation: None,
        sectors: Vec::new(),
    }
}

pub fn partition_bruteforce(g: &EmbeddedGraph) -> Result<PartitionReport> {
    let sys = IsingSystem::from_graph(g);
    let z = sys.partition()?;
    let pre = sys.prefactor();
    let mut r = report("bruteforce", z / pre, pre);
    r.full_value = z;
    Ok(r)
}

/// 2^|V| Π cosh L · Σ_{H even} Π tanh L.
pub fn partition_hte(g: &EmbeddedGraph) -> Result<PartitionReport> {
    let gf = even_subgraph_gf(g, &g.tanh_couplings())?;
    Ok(report("hte", gf, IsingSystem::from_graph(g).prefactor()))
}

/// (1/2^g) Σ_α c(α) exp(−Σ_{n≤L} S_n(α)) for arbitrary weights K, with the
/// per-sector data and a bound on the truncation error.
pub fn walk_partition_even(
    g: &EmbeddedGraph,
    k: &[f64],
    max_len: usize,
    backend: &dyn SeriesBackend,
) -> Result<(f64, f64, Vec<SectorTerm>)> {
    let sectors_all = HomologyClass::all(g.genus());
    let norm = 2f64.powi(g.genus() as i32);
    let mut value = 0.0;
    let mut bound = 0.0;
    let mut sectors = Vec::new();
    for alpha in sectors_all {
        let series = backend.closed_series(g, k, &alpha, max_len)?;
        let sign = sector_sign(&alpha);
        let exp_value = (-series.total()).exp();
        value += sign as f64 * exp_value;
        let tail = series.bound.as_ref().map_or(f64::INFINITY, |b| b.tail);
        bound += exp_value * tail.exp_m1();
        sectors.push(SectorTerm {
            alpha,
            sign,
            series,
            exp_value,
        });
    }
    Ok((value / norm, bound / norm, sectors))
}

pub fn partition_walks(g: &EmbeddedGraph, max_len: usize, backend: &dyn SeriesBackend) -> Result<PartitionReport> {
    let (value, bound, sectors) = walk_partition_even(g, &g.tanh_couplings(), max_len, backend)?;
    let mut r = report("walks", value, IsingSystem::from_graph(g).prefactor());
    r.truncation = Some(Truncation {
        max_len,
        backend: backend.name(),
        error_bound: bound,
    });
    r.sectors = sectors;
    Ok(r)
}

pub fn correlation_bruteforce(g: &EmbeddedGraph, a: usize, b: usize) -> Result<f64> {
    IsingSystem::from_graph(g).correlation(a, b)
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationSector {
    pub alpha: HomologyClass,
    pub sign: i32,
    /// Open-walk sum with the flipped couplings K̃.
    pub open_sum: f64,
    /// Σ S̃_n and Σ S_n over n ≤ maxLen.
    pub closed_flipped: f64,
    pub closed_plain: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationReport {
    pub a: i64,
    pub b: i64,
    pub value: f64,
    pub max_len: usize,
    pub backend: &'static str,
    pub a_star: usize,
    pub b_star: usize,
    /// Ids of the primal edges crossed by the dual path η.
    pub eta_edges: Vec<i64>,
    /// True when η had to use an edge at a or b.
    pub eta_fallback: bool,
    /// Even-normalized Z used on the torus.
    pub partition_even: Option<f64>,
    pub sectors: Vec<CorrelationSector>,
}

fn check_pair(g: &EmbeddedGraph, a: usize, b: usize) -> Result<()> {
    if a >= g.num_vertices() || b >= g.num_vertices() {
        return Err(Error::Precondition("vertex out of range".into()));
    }
    if a == b {
        return Err(Error::Precondition("correlation endpoints must differ".into()));
    }
    Ok(())
}

/// Closure with the default corners and dual path, and the couplings K̃.
pub fn default_closure(g: &EmbeddedGraph, dual: &DualData, a: usize, b: usize) -> Result<(Closure, Vec<f64>)> {
    let closure = Closure::default_for(g, dual, a, b, true)?;
    let kt = SignedCouplings::new(g.tanh_couplings(), closure.eta.flipped.clone()).k_tilde();
    Ok((closure, kt))
}

/// ⟨σ_a σ_b⟩ from walk sums through an explicit closure.
pub fn correlation_with_closure(
    g: &EmbeddedGraph,
    closure: &Closure,
    max_len: usize,
    backend: &dyn SeriesBackend,
) -> Result<CorrelationReport> {
    let (a, b) = (closure.a, closure.b);
    let k = g.tanh_couplings();
    let kt = SignedCouplings::new(k.clone(), closure.eta.flipped.clone()).k_tilde();
    let planar = g.genus() == 0;
    let mut sectors = Vec::new();
    let mut total = 0.0;
    for beta in HomologyClass::all(g.genus()) {
        let open = backend.open_sum(g, &kt, closure, &beta, max_len)?.total();
        let flipped = backend.closed_series(g, &kt, &beta, max_len)?.total();
        let plain = if planar {
            Some(backend.closed_series(g, &k, &beta, max_len)?.total())
        } else {
            None
        };
        let sign = sector_sign(&beta);
        total += sign as f64 * open * (-(flipped - plain.unwrap_or(0.0))).exp();
        sectors.push(CorrelationSector {
            alpha: beta,
            sign,
            open_sum: open,
            closed_flipped: flipped,
            closed_plain: plain,
        });
    }
    let (value, partition_even) = if planar {
        (total, None)
    } else {
        let z = even_subgraph_gf(g, &k)?;
        (total / (2f64.powi(g.genus() as i32) * z), Some(z))
    };
    Ok(CorrelationReport {
        a: g.vertices()[a].id,
        b: g.vertices()[b].id,
        value,
        max_len,
        backend: backend.name(),
        a_star: closure.a_star,
        b_star: closure.b_star,
        eta_edges: closure.eta.edges().iter().map(|&e| g.edges()[e].id).collect(),
        eta_fallback: closure.eta.fallback,
        partition_even,
        sectors,
    })
}

/// ⟨σ_a σ_b⟩ from the walk formulas. Adjacent pairs are rejected.
pub fn correlation_walks(
    g: &EmbeddedGraph,
    a: usize,
    b: usize,
    max_len: usize,
    backend: &dyn SeriesBackend,
) -> Result<CorrelationReport> {
    check_pair(g, a, b)?;
    if g.adjacent(a, b) {
        return Err(Error::AdjacentUnsupported(g.vertices()[a].id, g.vertices()[b].id));
    }
    let dual = face_trace(g)?;
    let closure = Closure::default_for(g, &dual, a, b, true)?;
    correlation_with_closure(g, &closure, max_len, backend)
}

/// The dual Ising system: one spin per face, one edge per primal edge
/// joining the faces on its two sides, with L* = −½ log tanh L.
pub fn dual_system(g: &EmbeddedGraph, dual: &DualData) -> Result<IsingSystem> {
    let mut edges = Vec::with_capacity(g.num_edges());
    for (e, edge) in g.edges().iter().enumerate() {
        if edge.coupling <= 0.0 {
            return Err(Error::NonpositiveCoupling(edge.id));
        }
        let (f1, f2) = dual.dual_edges[e];
        edges.push((f1, f2, -0.5 * edge.coupling.tanh().ln()));
    }
    Ok(IsingSystem {
        n: dual.num_faces(),
        edges,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LteReport {
    /// exp(−Σ (S̃_n − S_n)) with K = e^{−2L*}.
    pub walk_value: f64,
    /// Σ_H Π K̃ / Σ_H Π K over even primal subgraphs.
    pub exact_value: f64,
    pub eta_edges: Vec<i64>,
}

/// Low-temperature weights K = e^{−2L*} from dual couplings, one per primal edge.
pub fn lte_weights(dual_couplings: &[f64]) -> Vec<f64> {
    dual_couplings.iter().map(|l| (-2.0 * l).exp()).collect()
}

/// Σ_H Π K̃ / Σ_H Π K, the dual correlation ⟨σ_{a*} σ_{b*}⟩ written on the primal graph.
pub fn lte_exact(g: &EmbeddedGraph, sc: &SignedCouplings) -> Result<f64> {
    Ok(even_subgraph_gf(g, &sc.k_tilde())? / even_subgraph_gf(g, &sc.k)?)
}

/// ⟨σ_{a*} σ_{b*}⟩ on the dual system from closed-walk series on the
/// planar primal graph, for dual couplings `dual_couplings` (one per primal edge).
pub fn lte_dual_correlation(
    g: &EmbeddedGraph,
    dual_couplings: &[f64],
    a_star: usize,
    b_star: usize,
    max_len: usize,
    backend: &dyn SeriesBackend,
) -> Result<LteReport> {
    if g.genus() != 0 {
        return Err(Error::Surface(
            "the low-temperature expansion needs a planar graph".into(),
        ));
    }
    if dual_couplings.len() != g.num_edges() {
        return Err(Error::Precondition("one dual coupling per edge required".into()));
    }
    let dual = face_trace(g)?;
    let eta = if a_star == b_star {
        crate::faces::DualPath::trivial(g, a_star)
    } else {
        dual_path(g, &dual, a_star, b_star, None)?
    };
    let sc = SignedCouplings::new(lte_weights(dual_couplings), eta.flipped.clone());
    let alpha = HomologyClass::zero(0);
    let flipped = backend.closed_series(g, &sc.k_tilde(), &alpha, max_len)?.total();
    let plain = backend.closed_series(g, &sc.k, &alpha, max_len)?.total();
    Ok(LteReport {
        walk_value: (-(flipped - plain)).exp(),
        exact_value: lte_exact(g, &sc)?,
        eta_edges: eta.edges().iter().map(|&e| g.edges()[e].id).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub a: i64,
    pub b: i64,
    pub a_star: usize,
    pub b_star: usize,
    pub eta_edges: Vec<i64>,
    /// Σ w̃(γ) over non-backtracking walks a → b, truncated.
    pub walk_sum: f64,
    pub primal_correlation: f64,
    pub dual_correlation: f64,
    /// primal_correlation / dual_correlation.
    pub ratio: f64,
    /// ratio / walk_sum, the modulus-one constant for this corner choice.
    pub constant: f64,
    pub discrepancy: f64,
}

/// Compares the truncated open-walk sum with ⟨σ_a σ_b⟩_G / ⟨σ_{a*} σ_{b*}⟩_{G*}.
pub fn duality_ratio(
    g: &EmbeddedGraph,
    a: usize,
    b: usize,
    max_len: usize,
    backend: &dyn SeriesBackend,
) -> Result<DualityReport> {
    if g.genus() != 0 {
        return Err(Error::Surface("duality needs a planar graph".into()));
    }
    check_pair(g, a, b)?;
    let dual = face_trace(g)?;
    let dual_sys = dual_system(g, &dual)?;
    let (closure, kt) = default_closure(g, &dual, a, b)?;
    let walk_sum = backend
        .open_sum(g, &kt, &closure, &HomologyClass::zero(0), max_len)?
        .total();
    let primal = correlation_bruteforce(g, a, b)?;
    let dual_corr = dual_sys.correlation(closure.a_star, closure.b_star)?;
    let ratio = primal / dual_corr;
    Ok(DualityReport {
        a: g.vertices()[a].id,
        b: g.vertices()[b].id,
        a_star: closure.a_star,
        b_star: closure.b_star,
        eta_edges: closure.eta.edges().iter().map(|&e| g.edges()[e].id).collect(),
        walk_sum,
        primal_correlation: primal,
        dual_correlation: dual_corr,
        ratio,
        constant: ratio / walk_sum,
        discrepancy: (ratio - walk_sum).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteDifferenceReport {
    pub derivative: f64,
    pub bruteforce: f64,
    pub error: f64,
    pub step: f64,
}

/// Central difference of log Z_walks(G_ab) in K_ab at 0, where G_ab is `g`
/// with an extra straight edge a–b, compared with ⟨σ_a σ_b⟩ on `g`.
pub fn fundamental_identity_check(
    g: &EmbeddedGraph,
    a: usize,
    b: usize,
    h: f64,
    max_len: usize,
    backend: &dyn SeriesBackend,
) -> Result<FiniteDifferenceReport> {
    check_pair(g, a, b)?;
    let new_id = g.edges().iter().map(|e| e.id).max().map_or(0, |m| m + 1);
    let gab = g.with_extra_edge(new_id, a, b, 0.0, [0, 0])?;
    let ab = gab.edge_index(new_id).expect("edge just added");
    let mut k = gab.tanh_couplings();
    let mut log_z = |x: f64| -> Result<f64> {
        k[ab] = x;
        Ok(walk_partition_even(&gab, &k, max_len, backend)?.0.ln())
    };
    let derivative = (log_z(h)? - log_z(-h)?) / (2.0 * h);
    let bruteforce = correlation_bruteforce(g, a, b)?;
    Ok(FiniteDifferenceReport {
        derivative,
        bruteforce,
        error: (derivative - bruteforce).abs(),
        step: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, Fixture};
    use crate::methods::{EnumerateBackend, OperatorBackend};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_edge_partition() {
        let l = 0.37;
        let g = fixtures::load(Fixture::E1).with_uniform_coupling(l);
        let z = partition_bruteforce(&g).unwrap();
        assert!(rel(z.full_value, 4.0 * l.cosh()) < 1e-14);
        let h = partition_hte(&g).unwrap();
        assert!(rel(h.full_value, 4.0 * l.cosh()) < 1e-14);
        assert!((h.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn isolated_couplings_factorize() {
        let sys = IsingSystem {
            n: 4,
            edges: vec![(0, 1, 0.3), (2, 3, -0.2)],
        };
        let expected = 4.0 * 0.3f64.cosh() * 4.0 * 0.2f64.cosh();
        assert!(rel(sys.partition().unwrap(), expected) < 1e-14);
    }

    #[test]
    fn triangle_closed_form() {
        let l = 0.25f64;
        let g = fixtures::load(Fixture::C3).with_uniform_coupling(l);
        let expected = 8.0 * l.cosh().powi(3) * (1.0 + l.tanh().powi(3));
        assert!(rel(partition_hte(&g).unwrap().full_value, expected) < 1e-14);
    }

    #[test]
    fn torus_bruteforce_matches_hte() {
        let g = fixtures::load(Fixture::T22);
        let a = partition_bruteforce(&g).unwrap();
        let b = partition_hte(&g).unwrap();
        assert!(rel(a.full_value, b.full_value) < 1e-12);
    }

    #[test]
    fn walks_partition_on_c4_and_t22() {
        let k = 0.2f64;
        let g = fixtures::load(Fixture::C4).with_uniform_coupling(k.atanh());
        let r = partition_walks(&g, 24, &EnumerateBackend { workers: 1 }).unwrap();
        assert!((r.value - (1.0 + k.powi(4))).abs() < 1e-12);
        assert_eq!(r.sectors.len(), 1);
        assert_eq!(r.sectors[0].sign, 1);

        let g = fixtures::load(Fixture::T22).with_uniform_coupling(0.05f64.atanh());
        let r = partition_walks(&g, 20, &OperatorBackend).unwrap();
        let exact = partition_hte(&g).unwrap().value;
        let signs: Vec<i32> = r.sectors.iter().map(|s| s.sign).collect();
        assert_eq!(signs, vec![-1, 1, 1, 1]);
        assert!((r.value - exact).abs() <= r.truncation.as_ref().unwrap().error_bound + 1e-12);
    }

    #[test]
    fn bruteforce_correlations() {
        let g = fixtures::load(Fixture::P3).with_couplings(&[0.3, 0.5]);
        assert!((correlation_bruteforce(&g, 0, 2).unwrap() - 0.3f64.tanh() * 0.5f64.tanh()).abs() < 1e-14);
        assert_eq!(correlation_bruteforce(&g, 1, 1).unwrap(), 1.0);
        let g = fixtures::load(Fixture::E1).with_uniform_coupling(0.4);
        assert!((correlation_bruteforce(&g, 0, 1).unwrap() - 0.4f64.tanh()).abs() < 1e-14);
    }

    #[test]
    fn walk_correlation_on_path() {
        let g = fixtures::load(Fixture::P3).with_couplings(&[0.1, 0.15]);
        let r = correlation_walks(&g, 0, 2, 12, &EnumerateBackend { workers: 1 }).unwrap();
        assert!((r.value - correlation_bruteforce(&g, 0, 2).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn walk_correlation_rejects_bad_pairs() {
        let g = fixtures::load(Fixture::P3);
        let b = EnumerateBackend { workers: 1 };
        assert!(matches!(
            correlation_walks(&g, 0, 1, 8, &b),
            Err(Error::AdjacentUnsupported(0, 1))
        ));
        assert!(matches!(
            correlation_walks(&g, 2, 2, 8, &b),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn frozen_dual_spins() {
        let g = fixtures::load(Fixture::C4);
        let r = lte_dual_correlation(&g, &[40.0; 4], 0, 1, 12, &OperatorBackend).unwrap();
        assert!((r.walk_value - 1.0).abs() < 1e-12);
        assert!((r.exact_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn c4_lte_ratio() {
        let g = fixtures::load(Fixture::C4);
        let ls = 0.4f64;
        let k = (-2.0 * ls).exp();
        let r = lte_dual_correlation(&g, &[ls; 4], 0, 1, 24, &OperatorBackend).unwrap();
        let expected = (1.0 - k.powi(4)) / (1.0 + k.powi(4));
        assert!((r.exact_value - expected).abs() < 1e-12);
        assert!((r.walk_value - expected).abs() < 1e-10);
        assert_eq!(r.eta_edges.len(), 1);
    }

    #[test]
    fn dual_of_c4_is_a_double_edge() {
        let g = fixtures::load(Fixture::C4).with_uniform_coupling(0.3);
        let dual = face_trace(&g).unwrap();
        let sys = dual_system(&g, &dual).unwrap();
        assert_eq!(sys.n, 2);
        assert_eq!(sys.edges.len(), 4);
        assert!(matches!(
            dual_system(&g.with_uniform_coupling(0.0), &dual),
            Err(Error::NonpositiveCoupling(_))
        ));
    }

    #[test]
    fn path_duality() {
        let g = fixtures::load(Fixture::P3).with_uniform_coupling(0.2);
        let r = duality_ratio(&g, 0, 2, 16, &EnumerateBackend { workers: 1 }).unwrap();
        assert!(r.discrepancy < 1e-4, "{r:?}");
    }
}
