use ising_nbw::faces::face_trace;
use ising_nbw::fixtures::{self, Fixture};
use ising_nbw::geometry::{self, HomologyClass};
use ising_nbw::heaps::MarkedHeap;
use ising_nbw::loops::Loop;
use ising_nbw::precise::planar_truncation_errors;
use ising_nbw::walks::{self, Closure, DirectedWalk, EdgeSharing, TnbClass, WalkPyramid};
use ising_nbw::{Dart, EmbeddedGraph, Error};

fn is_cyclically_nb(w: &[Dart]) -> bool {
    (0..w.len()).all(|i| w[(i + 1) % w.len()] != w[i].rev())
}

#[test]
fn closed_walk_counts() {
    assert!(walks::enumerate_closed_nb(&fixtures::load(Fixture::E1), 8)
        .unwrap()
        .is_empty());
    assert_eq!(
        walks::enumerate_closed_nb(&fixtures::load(Fixture::C3), 3)
            .unwrap()
            .len(),
        6
    );
    let c4 = walks::enumerate_closed_nb(&fixtures::load(Fixture::C4), 8).unwrap();
    assert_eq!(c4.iter().filter(|w| w.len() == 4).count(), 8);
    assert_eq!(c4.iter().filter(|w| w.len() == 8).count(), 8);
    assert!(matches!(
        walks::enumerate_closed_nb(&fixtures::load(Fixture::C4), 33),
        Err(Error::CapExceeded { .. })
    ));
}

fn tnb_anywhere(w: &DirectedWalk) -> Vec<bool> {
    let rev = w.reversed();
    (0..w.len())
        .flat_map(|s| [w.shifted(s), rev.shifted(s)])
        .map(|r| walks::classify_tnb(r.darts()) != TnbClass::NotTnb)
        .collect()
}

fn visits_each_vertex_once(g: &EmbeddedGraph, l: &Loop) -> bool {
    let mut seen: Vec<usize> = l.darts().iter().map(|&d| g.tail(d)).collect();
    seen.sort_unstable();
    seen.windows(2).all(|p| p[0] != p[1])
}

/// When a walk erases into cycles, every rooting and orientation of it
/// erases too.
#[test]
fn tnb_status_is_invariant_under_rerooting_for_cycle_erasures() {
    for f in [Fixture::C4, Fixture::Bow, Fixture::Grid3] {
        let g = fixtures::load(f);
        let mut checked = 0;
        for w in walks::enumerate_closed_nb(&g, 12).unwrap() {
            let Ok(p) = walks::to_pyramid(w.darts()) else { continue };
            if !p.heap.pieces().iter().all(|(_, l)| visits_each_vertex_once(&g, l)) {
                continue;
            }
            checked += 1;
            assert!(tnb_anywhere(&w).iter().all(|&t| t), "{f:?} {:?}", w.darts());
        }
        assert!(checked > 0);
    }
    // on a single cycle every closed NB walk qualifies
    let g = fixtures::load(Fixture::C4);
    for w in walks::enumerate_closed_nb(&g, 12).unwrap() {
        let status = tnb_anywhere(&w);
        assert!(status.iter().all(|&t| t == status[0]));
    }
}

/// Figure-eight loops are edge-simple, and a walk made of two of them can
/// erase from one root but not from another.
#[test]
fn figure_eight_erasure_depends_on_the_root() {
    let g = fixtures::load(Fixture::Bow);
    let w = DirectedWalk::closed_through(&g, &[0, 1, 2, 3, 4, 2, 0, 1, 2, 4, 3, 2, 0]).unwrap();
    assert_eq!(walks::classify_tnb(w.darts()), TnbClass::Tnb(2));
    assert_eq!(walks::classify_tnb(w.shifted(3).darts()), TnbClass::NotTnb);
    let status = tnb_anywhere(&w);
    assert_eq!(status.iter().filter(|&&t| t).count(), 12);
}

fn weight(g: &EmbeddedGraph, k: &[f64], w: &[Dart]) -> f64 {
    let sign = geometry::closed_walk_sign(g, &HomologyClass::zero(0), w).unwrap() as f64;
    sign * w.iter().map(|d| k[d.edge()]).product::<f64>()
}

#[test]
fn gluing_is_multiplicative() {
    for f in [Fixture::Bow, Fixture::Grid3] {
        let g = fixtures::load(f);
        let k: Vec<f64> = (0..g.num_edges()).map(|e| 0.3 + 0.05 * e as f64).collect();
        let loops = walks::enumerate_loops(&g, 8).unwrap();
        let mut glued_pairs = 0;
        for w in walks::enumerate_closed_nb(&g, 8).unwrap() {
            for l in &loops {
                if w.len() + l.len() > 10 {
                    continue;
                }
                for omega in l.traversals() {
                    let Some(glued) = walks::glue(w.darts(), &omega) else {
                        continue;
                    };
                    if !is_cyclically_nb(&glued) {
                        continue;
                    }
                    glued_pairs += 1;
                    let lhs = weight(&g, &k, &glued);
                    let rhs = weight(&g, &k, w.darts()) * weight(&g, &k, &omega);
                    assert!((lhs - rhs).abs() < 1e-15);
                }
            }
        }
        assert!(glued_pairs > 0);
    }
}

#[test]
fn single_loop_pyramid_gives_its_walk() {
    let g = fixtures::load(Fixture::C3);
    let w = DirectedWalk::closed_through(&g, &[1, 2, 0, 1]).unwrap();
    let l = Loop::new(&g, w.darts()).unwrap();
    let p: WalkPyramid = MarkedHeap::empty(&EdgeSharing)
        .push_marked(&EdgeSharing, l, w.darts().to_vec())
        .unwrap();
    assert_eq!(walks::from_pyramid(&g, &p).unwrap(), w.darts());
    assert_eq!(walks::to_pyramid(w.darts()).unwrap(), p);
}

#[test]
fn truncation_error_shrinks_on_the_grid() {
    let g = fixtures::load(Fixture::Grid3);
    let lengths: Vec<usize> = (4..=24).step_by(2).collect();
    let errors = planar_truncation_errors(&g, 3, 20, &lengths, 1).unwrap();
    for w in errors.windows(2) {
        assert!(w[1].error < w[0].error, "{:?}", w);
    }
}

#[test]
fn parallel_enumeration_is_bit_identical() {
    let g = fixtures::load(Fixture::Grid3);
    let k: Vec<f64> = (0..g.num_edges()).map(|e| 0.1 + 0.01 * e as f64).collect();
    let alpha = HomologyClass::zero(0);
    let a = walks::walk_series(&g, &k, &alpha, 14, 1).unwrap();
    let b = walks::walk_series(&g, &k, &alpha, 14, 4).unwrap();
    assert_eq!(a.terms, b.terms);
}

#[test]
fn open_sum_rejects_equal_endpoints() {
    let g = fixtures::load(Fixture::P3);
    let dual = face_trace(&g).unwrap();
    assert!(matches!(
        Closure::default_for(&g, &dual, 1, 1, true),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn single_edge_open_sum_matches_correlation() {
    let g = fixtures::load(Fixture::E1).with_uniform_coupling(0.3);
    let dual = face_trace(&g).unwrap();
    let cl = Closure::default_for(&g, &dual, 0, 1, true).unwrap();
    let k = g.tanh_couplings();
    let s = walks::open_walk_sum_enumerate(&g, &k, &cl, &HomologyClass::zero(0), 8, 1).unwrap();
    let bf = ising_nbw::ising::correlation_bruteforce(&g, 0, 1).unwrap();
    assert!((s.total() - bf).abs() < 1e-15);
}

#[test]
fn operator_matches_enumeration_to_length_16() {
    for f in [Fixture::C3, Fixture::C4, Fixture::Grid3, Fixture::T22] {
        let g = fixtures::load(f);
        let k: Vec<f64> = (0..g.num_edges()).map(|e| 0.15 + 0.01 * e as f64).collect();
        for alpha in HomologyClass::all(g.genus()) {
            let a = walks::walk_series(&g, &k, &alpha, 16, 4).unwrap();
            let b = walks::walk_series_operator(&g, &k, &alpha, 16).unwrap();
            for n in 0..=16 {
                assert!((a.terms[n] - b.terms[n]).abs() <= 1e-12, "{f:?} {alpha} n={n}");
            }
        }
    }
}
