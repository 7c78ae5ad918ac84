use proptest::collection::vec;
use proptest::prelude::*;

use ising_nbw::faces::SignedCouplings;
use ising_nbw::fixtures::{self, Fixture};
use ising_nbw::geometry::{self, HomologyClass};
use ising_nbw::heaps::{check_ratio_identity, ConcurrencySystem, Heap};
use ising_nbw::loops::{reverse_walk, Loop};
use ising_nbw::methods::{EnumerateBackend, OperatorBackend, SeriesBackend};
use ising_nbw::subgraph::{self, EdgeSubset};
use ising_nbw::walks;
use ising_nbw::EmbeddedGraph;

/// Direct sum over every edge subset, keeping those with even degrees.
fn gf_oracle(g: &EmbeddedGraph, k: &[f64]) -> f64 {
    let m = g.num_edges();
    let mut total = 0.0;
    for mask in 0u64..1 << m {
        let mut degree = vec![0usize; g.num_vertices()];
        let mut w = 1.0;
        for (i, e) in g.edges().iter().enumerate() {
            if mask >> i & 1 == 1 {
                degree[e.u] += 1;
                degree[e.v] += 1;
                w *= k[i];
            }
        }
        if degree.iter().all(|d| d % 2 == 0) {
            total += w;
        }
    }
    total
}

fn system(n: usize, bits: &[bool]) -> ConcurrencySystem {
    let mut pairs = Vec::new();
    let mut it = bits.iter();
    for i in 0..n {
        for j in i + 1..n {
            if *it.next().unwrap() {
                pairs.push((i, j));
            }
        }
    }
    ConcurrencySystem::from_pairs(n, &pairs).unwrap()
}

fn heap_of(sys: &ConcurrencySystem, pieces: &[usize]) -> Heap<usize> {
    let mut h = Heap::empty(sys);
    for &p in pieces {
        h = h.push(sys, p % sys.len()).unwrap();
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn even_subgraph_gf_matches_subset_sum(k in vec(-0.9f64..0.9, 12), which in 0usize..4) {
        let f = [Fixture::C3, Fixture::C4, Fixture::Bow, Fixture::Grid3][which];
        let g = fixtures::load(f);
        let k = &k[..g.num_edges()];
        let a = subgraph::even_subgraph_gf(&g, k).unwrap();
        let b = gf_oracle(&g, k);
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn flipped_products_pick_up_parity(k in vec(0.01f64..1.0, 8), flip in 0u64..256, sub in 0u64..256) {
        let sc = SignedCouplings::new(k.clone(), EdgeSubset::from_mask(8, flip));
        let kt = sc.k_tilde();
        let h = EdgeSubset::from_mask(8, sub);
        let plain: f64 = h.iter().map(|e| k[e]).product();
        let signed: f64 = h.iter().map(|e| kt[e]).product();
        let parity = (flip & sub).count_ones() % 2;
        prop_assert_eq!(signed, if parity == 1 { -plain } else { plain });
    }

    #[test]
    fn exterior_angle_is_antisymmetric(a in -3.0f64..3.0, b in -3.0f64..3.0, r in 0.1f64..5.0, s in 0.1f64..5.0) {
        prop_assume!((a - b).abs() > 1e-6 && ((a - b).abs() - std::f64::consts::PI).abs() > 1e-6);
        let u = [r * a.cos(), r * a.sin()];
        let v = [s * b.cos(), s * b.sin()];
        let uv = geometry::exterior_angle(u, v).unwrap();
        let vu = geometry::exterior_angle(v, u).unwrap();
        prop_assert!((uv + vu).abs() < 1e-12);
        prop_assert!(uv.abs() < std::f64::consts::PI);
    }

    #[test]
    fn heap_addition_is_associative(
        n in 1usize..6,
        bits in vec(any::<bool>(), 10),
        a in vec(0usize..6, 0..5),
        b in vec(0usize..6, 0..5),
        c in vec(0usize..6, 0..5),
    ) {
        let sys = system(n, &bits);
        let (ha, hb, hc) = (heap_of(&sys, &a), heap_of(&sys, &b), heap_of(&sys, &c));
        let left = ha.add(&sys, &hb).unwrap().add(&sys, &hc).unwrap();
        let right = ha.add(&sys, &hb.add(&sys, &hc).unwrap()).unwrap();
        prop_assert!(left.is_canonical(&sys));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn heap_ratio_identity_holds(n in 1usize..5, bits in vec(any::<bool>(), 6), m in 0u32..16) {
        let sys = system(n, &bits);
        let m: Vec<usize> = (0..n).filter(|&i| m >> i & 1 == 1).collect();
        let r = check_ratio_identity(&sys, &m, 6).unwrap();
        prop_assert!(r.ok, "{:?}", r.mismatch);
    }

    #[test]
    fn loop_canonical_form_ignores_root_and_direction(which in 0usize..3, pick in any::<prop::sample::Index>(), shift in 0usize..16) {
        let f = [Fixture::Bow, Fixture::Grid3, Fixture::T22][which];
        let g = fixtures::load(f);
        let loops = walks::enumerate_loops(&g, 8).unwrap();
        let l = pick.get(&loops);
        prop_assert_eq!(&Loop::new(&g, l.darts()).unwrap(), l);
        let d = l.darts();
        let s = shift % d.len();
        let shifted: Vec<_> = d[s..].iter().chain(&d[..s]).copied().collect();
        prop_assert_eq!(&Loop::new(&g, &shifted).unwrap(), l);
        prop_assert_eq!(&Loop::new(&g, &reverse_walk(&shifted)).unwrap(), l);
    }

    #[test]
    fn series_backends_agree(k in vec(0.0f64..0.4, 12), which in 0usize..4, sector in 0usize..4) {
        let f = [Fixture::C4, Fixture::Bow, Fixture::Grid3, Fixture::T22][which];
        let g = fixtures::load(f);
        let k = &k[..g.num_edges().min(12)];
        prop_assume!(k.len() == g.num_edges());
        let classes = HomologyClass::all(g.genus());
        let alpha = &classes[sector % classes.len()];
        let a = EnumerateBackend { workers: 2 }.closed_series(&g, k, alpha, 10).unwrap();
        let b = OperatorBackend.closed_series(&g, k, alpha, 10).unwrap();
        for n in 0..=10 {
            prop_assert!((a.terms[n] - b.terms[n]).abs() <= 1e-12, "n = {}", n);
        }
    }
}
