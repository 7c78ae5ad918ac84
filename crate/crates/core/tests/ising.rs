use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ising_nbw::faces::{dual_path, face_trace, DualPath};
use ising_nbw::fixtures::{self, Fixture};
use ising_nbw::ising;
use ising_nbw::methods::{backend, EvalContext, MethodRegistry, OperatorBackend};
use ising_nbw::walks::Closure;
use ising_nbw::{EmbeddedGraph, Error};

/// Every choice of corners at a and b, each with its shortest dual path.
fn all_closures(g: &EmbeddedGraph, a: usize, b: usize) -> Vec<Closure> {
    let dual = face_trace(g).unwrap();
    let mut out = Vec::new();
    for ca in dual.corners_at(g, a) {
        for cb in dual.corners_at(g, b) {
            let (fa, fb) = (dual.face_of[ca.index()], dual.face_of[cb.index()]);
            let eta = if fa == fb {
                DualPath::trivial(g, fa)
            } else {
                dual_path(g, &dual, fa, fb, None).unwrap()
            };
            out.push(Closure::new(g, &dual, ca, cb, eta).unwrap());
        }
    }
    out
}

#[test]
fn correlation_does_not_depend_on_the_closure() {
    for (f, a, b) in [
        (Fixture::Grid3, 0, 8),
        (Fixture::Grid3, 1, 7),
        (Fixture::Bow, 0, 4),
        (Fixture::T33, 0, 4),
    ] {
        let g = fixtures::load(f).with_uniform_coupling(0.15);
        let bf = ising::correlation_bruteforce(&g, a, b).unwrap();
        let closures = all_closures(&g, a, b);
        assert!(closures.len() >= 4);
        for cl in &closures {
            let r = ising::correlation_with_closure(&g, cl, 24, &OperatorBackend).unwrap();
            assert!(
                (r.value - bf).abs() < 1e-9,
                "{f:?} corners {:?}/{:?}",
                cl.corner_a,
                cl.corner_b
            );
        }
    }
}

#[test]
fn correlations_are_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let base = fixtures::load(Fixture::Grid3);
    let l: Vec<f64> = (0..base.num_edges()).map(|_| rng.gen_range(0.05..0.2)).collect();
    let g = base.with_couplings(&l);
    for (a, b) in [(0, 8), (2, 6), (0, 4), (1, 5)] {
        let ab = ising::correlation_walks(&g, a, b, 24, &OperatorBackend).unwrap().value;
        let ba = ising::correlation_walks(&g, b, a, 24, &OperatorBackend).unwrap().value;
        assert!((ab - ba).abs() < 1e-12);
        let bf_ab = ising::correlation_bruteforce(&g, a, b).unwrap();
        assert_eq!(bf_ab, ising::correlation_bruteforce(&g, b, a).unwrap());
        assert!((ab - bf_ab).abs() < 1e-9);
    }
}

#[test]
fn grid_random_couplings_hte_equals_bruteforce() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = fixtures::load(Fixture::Grid3);
    let l: Vec<f64> = (0..base.num_edges()).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let g = base.with_couplings(&l);
    let a = ising::partition_bruteforce(&g).unwrap().full_value;
    let b = ising::partition_hte(&g).unwrap().full_value;
    assert!((a - b).abs() / b < 1e-12);
}

#[test]
fn registry_methods_agree_on_the_square() {
    let g = fixtures::load(Fixture::C4);
    let reg = MethodRegistry::standard();
    let be = backend("enumerate", 1).unwrap();
    let ctx = EvalContext {
        max_len: 24,
        backend: be.as_ref(),
    };
    let values: Vec<f64> = reg
        .select("all")
        .unwrap()
        .iter()
        .map(|m| m.evaluate(&g, &ctx).unwrap().full_value)
        .collect();
    assert_eq!(values.len(), 3);
    for v in &values {
        assert!((v - values[0]).abs() / values[0] < 1e-12);
    }
}

#[test]
fn single_edge_walk_partition_is_the_prefactor() {
    let g = fixtures::load(Fixture::E1);
    let r = ising::partition_walks(&g, 8, &OperatorBackend).unwrap();
    assert_eq!(r.value, 1.0);
    assert!((r.full_value - 4.0 * 0.1f64.cosh()).abs() < 1e-14);
}

#[test]
fn vertex_cap_is_enforced() {
    let sys = ising::IsingSystem {
        n: 21,
        edges: vec![(0, 1, 0.1)],
    };
    assert!(matches!(sys.partition(), Err(Error::CapExceeded { .. })));
}

#[test]
fn low_temperature_walks_match_the_dual_system() {
    let g = fixtures::load(Fixture::Grid3);
    let dual = face_trace(&g).unwrap();
    let dual_l: Vec<f64> = (0..g.num_edges()).map(|e| 1.2 + 0.05 * e as f64).collect();
    let primal_l: Vec<f64> = dual_l.iter().map(|&x: &f64| (-2.0 * x).exp().atanh()).collect();
    let sys = ising::dual_system(&g.with_couplings(&primal_l), &dual).unwrap();
    for (fa, fb) in [(0, 1), (0, dual.num_faces() - 1), (1, 3)] {
        let r = ising::lte_dual_correlation(&g, &dual_l, fa, fb, 24, &OperatorBackend).unwrap();
        let bf = sys.correlation(fa, fb).unwrap();
        assert!((r.walk_value - bf).abs() < 1e-5, "faces ({fa},{fb})");
        assert!((r.exact_value - bf).abs() < 1e-12);
    }
}

#[test]
fn duality_for_adjacent_grid_vertices() {
    let g = fixtures::load(Fixture::Grid3).with_uniform_coupling(0.2);
    for (a, b) in [(0, 1), (4, 5), (3, 4)] {
        let r = ising::duality_ratio(&g, a, b, 24, &OperatorBackend).unwrap();
        assert!(r.discrepancy < 1e-4, "({a},{b}) {r:?}");
        assert!((r.constant - 1.0).abs() < 1e-4);
    }
}

#[test]
fn duality_rejects_nonpositive_couplings() {
    let g = fixtures::load(Fixture::P3).with_couplings(&[0.2, -0.1]);
    assert!(matches!(
        ising::duality_ratio(&g, 0, 2, 8, &OperatorBackend),
        Err(Error::NonpositiveCoupling(1))
    ));
}

#[test]
fn torus_partition_sector_combination() {
    let g = fixtures::load(Fixture::T22).with_uniform_coupling(0.05f64.atanh());
    let r = ising::partition_walks(&g, 20, &OperatorBackend).unwrap();
    let z: Vec<f64> = r.sectors.iter().map(|s| s.exp_value).collect();
    let combined = 0.5 * (-z[0] + z[1] + z[2] + z[3]);
    assert!((combined - r.value).abs() < 1e-15);
    let exact = ising::partition_hte(&g).unwrap().value;
    let bound = r.truncation.unwrap().error_bound;
    assert!(bound.is_finite() && bound < 1e-6);
    assert!((r.value - exact).abs() <= bound + 1e-12);
}
