//! Invariant suites run against brute-force oracles, each producing one
//! pass/fail item per check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixtures::{self, Fixture};
use crate::geometry::{self, HomologyClass};
use crate::graph::EmbeddedGraph;
use crate::heaps::{check_ratio_with_census, random_system, HeapCensus};
use crate::ising;
use crate::loops;
use crate::methods::{EnumerateBackend, OperatorBackend};
use crate::subgraph;
use crate::walks::{self, TnbClass};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteContext {
    pub seed: u64,
    /// Drops the turning signs in the cancellation suite (negative control).
    pub inject_sign_bug: bool,
    /// Replaces every numeric tolerance when set.
    pub tolerance: Option<f64>,
    pub workers: usize,
}

impl Default for SuiteContext {
    fn default() -> Self {
        SuiteContext {
            seed: 0,
            inject_sign_bug: false,
            tolerance: None,
            workers: 1,
        }
    }
}

impl SuiteContext {
    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &SuiteContext) -> Vec<CheckResult>;
}

/// Collects check outcomes for one suite; errors count as failures.
struct Recorder {
    suite: &'static str,
    out: Vec<CheckResult>,
}

impl Recorder {
    fn new(suite: &'static str) -> Recorder {
        Recorder { suite, out: Vec::new() }
    }
    fn check(&mut self, name: impl Into<String>, f: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = match f() {
            Ok(x) => x,
            Err(e) => (false, format!("{}: {e}", e.kind())),
        };
        self.out.push(CheckResult {
            suite: self.suite,
            name: name.into(),
            passed,
            detail,
        });
    }
}

fn parity(x: i64) -> i64 {
    x.rem_euclid(2)
}

struct GeometrySuite;

impl GeometrySuite {
    fn whitney(g: &EmbeddedGraph, max_len: usize) -> Result<(bool, String)> {
        let loops = walks::enumerate_loops(g, max_len)?;
        let mut bad = 0;
        for l in &loops {
            let tau = geometry::turning_number(g, l.darts())?;
            let cr = geometry::self_crossings(g, l)? as i64;
            if parity(cr) != parity(tau + 1) {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{} loops, {bad} violations", loops.len())))
    }

    fn torus(g: &EmbeddedGraph, max_len: usize) -> Result<(bool, String)> {
        let loops = walks::enumerate_loops(g, max_len)?;
        let mut bad = 0;
        for l in &loops {
            let tau = geometry::turning_number(g, l.darts())?;
            let cr = geometry::self_crossings(g, l)? as i64;
            let w = geometry::winding(g, l.darts());
            let (a, b) = (parity(w[0]), parity(w[1]));
            if parity(cr) != parity(tau + a * b + a + b + 1) {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{} loops, {bad} violations", loops.len())))
    }

    fn mutual(g: &EmbeddedGraph, max_len: usize) -> Result<(bool, String)> {
        let loops = walks::enumerate_loops(g, max_len)?;
        let (mut pairs, mut bad) = (0, 0);
        for (i, a) in loops.iter().enumerate() {
            for b in &loops[i + 1..] {
                if a.shares_edge(b) {
                    continue;
                }
                pairs += 1;
                if geometry::mutual_crossings(g, a, b)? % 2 != 0 {
                    bad += 1;
                }
            }
        }
        Ok((bad == 0, format!("{pairs} disjoint pairs, {bad} odd")))
    }

    fn sector_resolution(g: &EmbeddedGraph, tol: f64) -> Result<(bool, String)> {
        let k = vec![1.0; g.num_edges()];
        let (mut decs, mut bad) = (0, 0);
        for h in subgraph::even_subgraphs(g, subgraph::EVEN_EDGE_CAP)? {
            for dec in loops::decompositions(g, &h)? {
                decs += 1;
                let lhs = loops::sector_average_weight(g, &dec, &k)?;
                let rhs = loops::decomposition_weight(g, &dec, &k)?;
                if (lhs - rhs).abs() > tol {
                    bad += 1;
                }
            }
        }
        Ok((bad == 0, format!("{decs} decompositions, {bad} mismatches")))
    }
}

impl Suite for GeometrySuite {
    fn name(&self) -> &'static str {
        "geometry"
    }
    fn run(&self, ctx: &SuiteContext) -> Vec<CheckResult> {
        let mut r = Recorder::new(self.name());
        r.check("exterior angle antisymmetry", || {
            let mut rng = ctx.rng(1);
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let u = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let (Ok(x), Ok(y)) = (geometry::exterior_angle(u, v), geometry::exterior_angle(v, u)) else {
                    continue;
                };
                worst = worst.max((x + y).abs());
            }
            Ok((worst <= ctx.tol(1e-12), format!("max |θ(u,v)+θ(v,u)| = {worst:e}")))
        });
        for f in [Fixture::C4, Fixture::Bow, Fixture::Grid3] {
            r.check(format!("whitney parity {}", f.name()), || {
                Self::whitney(&fixtures::load(f), 16)
            });
        }
        for f in [Fixture::T22, Fixture::T33] {
            r.check(format!("torus parity {}", f.name()), || {
                Self::torus(&fixtures::load(f), 14)
            });
        }
        r.check("planar mutual parity grid3", || {
            Self::mutual(&fixtures::load(Fixture::Grid3), 12)
        });
        for f in [Fixture::T22, Fixture::T33] {
            r.check(format!("sector resolution {}", f.name()), || {
                Self::sector_resolution(&fixtures::load(f), ctx.tol(1e-12))
            });
        }
        r.out
    }
}

struct PfaffianSuite;

impl Suite for PfaffianSuite {
    fn name(&self) -> &'static str {
        "pfaffian"
    }
    fn run(&self, ctx: &SuiteContext) -> Vec<CheckResult> {
        let mut r = Recorder::new(self.name());
        let mut rng = ctx.rng(2);
        for d in [2, 4, 6, 8] {
            let k: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..2.0)).collect();
            r.check(format!("degree {d}"), || {
                let p = loops::pfaffian_check(&k)?;
                Ok((
                    p.relative_error <= ctx.tol(1e-12),
                    format!("{} matchings, relative error {:e}", p.matchings, p.relative_error),
                ))
            });
        }
        r.out
    }
}

struct DecompositionSuite;

impl DecompositionSuite {
    fn check(g: &EmbeddedGraph, k: &[f64], max_edges: usize, tol: f64) -> Result<(bool, String)> {
        let (mut subgraphs, mut bad) = (0, 0);
        let mut worst: f64 = 0.0;
        for h in subgraph::even_subgraphs(g, subgraph::EVEN_EDGE_CAP)? {
            if h.count() > max_edges {
                continue;
            }
            subgraphs += 1;
            let decs = loops::decompositions(g, &h)?;
            if decs.len() as u64 != loops::expected_decomposition_count(g, &h) {
                bad += 1;
            }
            let mut total = 0.0;
            for dec in &decs {
                total += loops::decomposition_weight(g, dec, k)?;
            }
            let product: f64 = h.iter().map(|e| k[e]).product();
            let err = (total - product).abs() / product.abs();
            worst = worst.max(err);
            if err > tol {
                bad += 1;
            }
        }
        Ok((
            bad == 0,
            format!("{subgraphs} even subgraphs, worst relative error {worst:e}"),
        ))
    }
}

impl Suite for DecompositionSuite {
    fn name(&self) -> &'static str {
        "decompositions"
    }
    fn run(&self, ctx: &SuiteContext) -> Vec<CheckResult> {
        let mut r = Recorder::new(self.name());
        let mut rng = ctx.rng(3);
        for f in [Fixture::C4, Fixture::Bow, Fixture::Grid3] {
            let g = fixtures::load(f);
            let k: Vec<f64> = (0..g.num_edges()).map(|_| rng.gen_range(0.1..0.9)).collect();
            r.check(format!("decomposition sum {}", f.name()), || {
                Self::check(&g, &k, 14, ctx.tol(1e-12))
            });
        }
        r.out
    }
}

/// Classifies every closed NB walk up to `max_len` and checks both round trips.
pub fn bijection_check(g: &EmbeddedGraph, max_len: usize) -> Result<(bool, String)> {
    let (mut tnb, mut not_tnb, mut bad) = (0usize, 0usize, 0usize);
    for w in walks::enumerate_closed_nb(g, max_len)? {
        match walks::classify_tnb(w.darts()) {
            TnbClass::NotTnb => {
                not_tnb += 1;
                if walks::to_pyramid(w.darts()) != Err(Error::NotTnb) {
                    bad += 1;
                }
            }
            TnbClass::Tnb(n) => {
                tnb += 1;
                let p = walks::to_pyramid(w.darts())?;
                let back = walks::from_pyramid(g, &p)?;
                let again = walks::to_pyramid(&back)?;
                let conserved = walks::erasure::pyramid_edge_multiset(&p) == w.edge_multiset();
                if back != w.darts() || again != p || p.heap.len() != n || !conserved {
                    bad += 1;
                }
            }
        }
    }
    Ok((bad == 0, format!("{tnb} TNB, {not_tnb} not TNB, {bad} failures")))
}

struct BijectionSuite;

impl Suite for BijectionSuite {
    fn name(&self) -> &'static str {
        "bijection"
    }
    fn run(&self, _: &SuiteContext) -> Vec<CheckResult> {
        let mut r = Recorder::new(self.name());
        for f in [Fixture::C4, Fixture::Bow] {
            r.check(format!("pyramid round trips {}", f.name()), || {
                bijection_check(&fixtures::load(f), 12)
            });
        }
        r.out
    }
}

struct CancellationSuite;

impl Suite for CancellationSuite {
    fn name(&self) -> &'static str {
        "cancellation"
    }
    fn run(&self, ctx: &SuiteContext) -> Vec<CheckResult> {
        let mut r = Recorder::new(self.name());
        let mut rng = ctx.rng(4);
        for (f, len) in [(Fixture::Bow, 12), (Fixture::Grid3, 14)] {
            let g = fixtures::load(f);
            let k: Vec<f64> = (0..g.num_edges()).map(|_| rng.gen_range(0.1..0.9)).collect();
            r.check(format!("not-TNB sums vanish {} up to {len}", f.name()), || {
                let rep = walks::not_tnb_sums(&g, &k, len, ctx.inject_sign_bug)?;
                let nonzero = rep.per_length.iter().filter(|&&x| x != 0.0).count();
                Ok((
                    nonzero == 0,
                    format!(
                        "{} walks in {} groups, {nonzero} nonzero lengths",
                        rep.not_tnb_walks, rep.groups
                    ),
                ))
            });
        }
        r.out
    }
}

struct HeapsSuite;

impl Suite for HeapsSuite {
    fn name(&self) -> &'static str {
        "heaps"
    }
    fn run(&self, ctx: &SuiteContext) -> Vec<CheckResult> {
        let mut r = Recorder::new(self.name());
        let mut rng = ctx.rng(5);
        for i in 0..50 {
            let n = rng.gen_range(1..=5);
            let p = rng.gen_range(0.0..1.0);
            let sys = random_system(&mut rng, n, p);
            r.check(format!("ratio identity system {i} ({n} types)"), || {
                let census = HeapCensus::new(&sys, 8)?;
                let mut failed = Vec::new();
                for m in 0..1u32 << n {
                    if !check_ratio_with_census(&sys, &census, m)?.ok {
                        failed.push(m);
                    }
                }
                Ok((failed.is_empty(), format!("{} subsets, failing {failed:?}", 1u32 << n)))
            });
        }
        r.out
    }
}

struct PartitionSuite;

impl Suite for PartitionSuite {
    fn name(&self) -> &'static str {
        "partition"
    }
    fn run(&self, ctx: &SuiteContext) -> Vec<CheckResult> {
        let mut r = Recorder::new(self.name());
        let mut rng = ctx.rng(6);
        for f in Fixture::ALL {
            let base = fixtures::load(f);
            let l: Vec<f64> = (0..base.num_edges()).map(|_| rng.gen_range(-0.3..=0.3)).collect();
            let g = base.with_couplings(&l);
            r.check(format!("bruteforce = hte {}", f.name()), || {
                let a = ising::partition_bruteforce(&g)?.full_value;
                let b = ising::partition_hte(&g)?.full_value;
                let rel = (a - b).abs() / b.abs();
                Ok((rel <= ctx.tol(1e-12), format!("relative difference {rel:e}")))
            });
        }
        for f in Fixture::ALL {
            let g = fixtures::load(f).with_uniform_coupling(0.1);
            r.check(format!("walks within bound {}", f.name()), || {
                let w = ising::partition_walks(&g, 20, &OperatorBackend)?;
                let exact = ising::partition_hte(&g)?.value;
                let bound = w.truncation.as_ref().map_or(0.0, |t| t.error_bound);
                let err = (w.value - exact).abs();
                Ok((err <= bound + ctx.tol(1e-12), format!("error {err:e}, bound {bound:e}")))
            });
        }
        r.check("torus sector signs at K = 0", || {
            let s: i32 = HomologyClass::all(1).iter().map(geometry::sector_sign).sum();
            Ok((s == 2, format!("sum of signs {s}")))
        });
        r.out
    }
}

struct CorrelationSuite;

impl Suite for CorrelationSuite {
    fn name(&self) -> &'static str {
        "correlation"
    }
    fn run(&self, ctx: &SuiteContext) -> Vec<CheckResult> {
        let mut r = Recorder::new(self.name());
        let cases = [
            (Fixture::P3, 0, 2),
            (Fixture::Grid3, 0, 8),
            (Fixture::Grid3, 1, 7),
            (Fixture::T33, 0, 4),
        ];
        for (f, a, b) in cases {
            let g = fixtures::load(f).with_uniform_coupling(0.1);
            r.check(format!("walks vs bruteforce {} ({a},{b})", f.name()), || {
                let w = ising::correlation_walks(&g, a, b, 24, &OperatorBackend)?.value;
                let bf = ising::correlation_bruteforce(&g, a, b)?;
                let err = (w - bf).abs();
                Ok((err <= ctx.tol(1e-5), format!("walks {w:.12e}, bruteforce {bf:.12e}")))
            });
        }
        r.check("finite difference p3", || {
            let g = fixtures::load(Fixture::P3);
            let rep =
                ising::fundamental_identity_check(&g, 0, 2, 1e-6, 24, &EnumerateBackend { workers: ctx.workers })?;
            Ok((rep.error <= ctx.tol(1e-4), format!("error {:e}", rep.error)))
        });
        r.out
    }
}

struct DualitySuite;

impl Suite for DualitySuite {
    fn name(&self) -> &'static str {
        "duality"
    }
    fn run(&self, ctx: &SuiteContext) -> Vec<CheckResult> {
        let mut r = Recorder::new(self.name());
        for (f, a, b) in [(Fixture::P3, 0, 2), (Fixture::Grid3, 0, 8), (Fixture::Grid3, 0, 1)] {
            let g = fixtures::load(f).with_uniform_coupling(0.2);
            r.check(format!("walk sum = correlation ratio {} ({a},{b})", f.name()), || {
                let d = ising::duality_ratio(&g, a, b, 24, &OperatorBackend)?;
                Ok((
                    d.discrepancy <= ctx.tol(1e-4),
                    format!("walk sum {:.12e}, ratio {:.12e}", d.walk_sum, d.ratio),
                ))
            });
        }
        r.check("low-temperature dual correlation grid3", || {
            let g = fixtures::load(Fixture::Grid3);
            let dual = crate::faces::face_trace(&g)?;
            let ls = vec![1.5; g.num_edges()];
            let primal_l: Vec<f64> = ls.iter().map(|&x: &f64| (-2.0 * x).exp().atanh()).collect();
            let sys = ising::dual_system(&g.with_couplings(&primal_l), &dual)?;
            let (fa, fb) = (0, dual.num_faces() - 1);
            let lte = ising::lte_dual_correlation(&g, &ls, fa, fb, 24, &OperatorBackend)?;
            let bf = sys.correlation(fa, fb)?;
            let err = (lte.walk_value - bf).abs().max((lte.exact_value - bf).abs());
            Ok((
                err <= ctx.tol(1e-5),
                format!("walks {:.12e}, bruteforce {bf:.12e}", lte.walk_value),
            ))
        });
        r.out
    }
}

pub struct SuiteRegistry {
    suites: Vec<Box<dyn Suite>>,
}

impl SuiteRegistry {
    pub fn standard() -> SuiteRegistry {
        SuiteRegistry {
            suites: vec![
                Box::new(GeometrySuite),
                Box::new(PfaffianSuite),
                Box::new(DecompositionSuite),
                Box::new(BijectionSuite),
                Box::new(CancellationSuite),
                Box::new(HeapsSuite),
                Box::new(PartitionSuite),
                Box::new(CorrelationSuite),
                Box::new(DualitySuite),
            ],
        }
    }
    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }
    /// Runs the named suites (all when `names` is empty) in registry order.
    pub fn run(&self, names: &[String], ctx: &SuiteContext) -> Result<Vec<CheckResult>> {
        for n in names {
            if !self.suites.iter().any(|s| s.name() == n) {
                return Err(Error::Precondition(format!("unknown suite {n:?}")));
            }
        }
        Ok(self
            .suites
            .iter()
            .filter(|s| names.is_empty() || names.iter().any(|n| n == s.name()))
            .flat_map(|s| s.run(ctx))
            .collect())
    }
}
