//! Closed-walk series from traces of the directed-edge transition operator.

use nalgebra::{Complex, DMatrix};

use crate::error::{cap, Error, Result};
use crate::geometry::HomologyClass;
use crate::graph::{Dart, EmbeddedGraph};

use super::enumerate::{Successors, MAX_LEN_CAP};
use super::series::{alpha_bits, TailBound, WalkSeries};

pub type C64 = Complex<f64>;

/// Relative tolerance on the imaginary part of a trace.
pub const RESIDUE_TOL: f64 = 1e-9;

/// (−1)^{a·wrap_x + b·wrap_y} for one dart.
pub(crate) fn dart_phase(g: &EmbeddedGraph, bits: (i64, i64), d: Dart) -> f64 {
    let w = g.wrap(d);
    if (bits.0 * w[0] as i64 + bits.1 * w[1] as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// M[d][e] = K_e · exp(iθ(d,e)/2) · phase(e) for every non-backtracking step d → e.
pub fn transfer_operator(g: &EmbeddedGraph, k: &[f64], alpha: &HomologyClass) -> Result<DMatrix<C64>> {
    if k.len() != g.num_edges() {
        return Err(Error::Precondition("one coupling per edge required".into()));
    }
    let bits = alpha_bits(g, alpha)?;
    let succ = Successors::new(g)?;
    let n = g.num_darts();
    let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for d in g.darts() {
        for &(e, theta) in succ.of(d) {
            let w = k[e.edge()] * dart_phase(g, bits, e);
            m[(d.index(), e.index())] = C64::from_polar(1.0, theta / 2.0) * w;
        }
    }
    Ok(m)
}

fn frobenius(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral radius from the eigenvalues of the complex Schur form, falling
/// back to the Gelfand estimate ‖M^n‖^{1/n}.
pub fn spectral_radius(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if let Some(ev) = m.clone().schur().eigenvalues() {
        return ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let mut p = m.clone();
    for _ in 0..5 {
        p = &p * &p;
    }
    frobenius(&p).powf(1.0 / 32.0)
}

/// Bound on Σ_{n>L} |tr(M^n)|/(2n).
///
/// For any block length p with c = ‖M^p‖_F < 1 and B = max_{s<p} ‖M^s‖_F,
/// |tr M^n| ≤ √dim · B · c^{⌊n/p⌋}, so the tail is at most
/// √dim · B · p · c^{⌊(L+1)/p⌋} / (2(L+1)(1−c)). The best p ≤ 64 is used.
pub fn tail_bound_of(m: &DMatrix<C64>, max_len: usize) -> f64 {
    let dim = m.nrows();
    if dim == 0 {
        return 0.0;
    }
    let sq = (dim as f64).sqrt();
    let mut best = f64::INFINITY;
    let mut power = DMatrix::identity(dim, dim);
    let mut b = frobenius(&power);
    for p in 1..=64usize {
        power = &power * m;
        let c = frobenius(&power);
        if c == 0.0 {
            return 0.0;
        }
        if c < 1.0 {
            let q0 = ((max_len + 1) / p) as i32;
            let t = sq * b * p as f64 * c.powi(q0) / (2.0 * (max_len + 1) as f64 * (1.0 - c));
            best = best.min(t);
        }
        b = b.max(c);
    }
    best
}

pub fn tail_bound(g: &EmbeddedGraph, k: &[f64], alpha: &HomologyClass, max_len: usize) -> Result<TailBound> {
    let m = transfer_operator(g, k, alpha)?;
    Ok(TailBound {
        spectral_radius: spectral_radius(&m),
        tail: tail_bound_of(&m, max_len),
    })
}

/// S_n = tr(M^n)/(2n) for n ≤ `max_len`.
pub fn walk_series_operator(g: &EmbeddedGraph, k: &[f64], alpha: &HomologyClass, max_len: usize) -> Result<WalkSeries> {
    cap("maxLen", max_len, MAX_LEN_CAP)?;
    let m = transfer_operator(g, k, alpha)?;
    let abs = m.map(|z| C64::new(z.norm(), 0.0));
    let dim = m.nrows();
    let mut terms = vec![0.0; max_len + 1];
    let mut p = DMatrix::identity(dim, dim);
    let mut pa = DMatrix::identity(dim, dim);
    for (n, term) in terms.iter_mut().enumerate().skip(1) {
        p = &p * &m;
        pa = &pa * &abs;
        let tr = p.trace();
        let scale = pa.trace().re.max(1.0);
        if tr.im.abs() > RESIDUE_TOL * scale {
            return Err(Error::Residue {
                length: n,
                residue: tr.im,
            });
        }
        *term = tr.re / (2 * n) as f64;
    }
    Ok(WalkSeries {
        alpha: alpha.clone(),
        max_len,
        terms,
        backend: "operator",
        bound: Some(TailBound {
            spectral_radius: spectral_radius(&m),
            tail: tail_bound_of(&m, max_len),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, Fixture};
    use crate::walks::series::walk_series;

    #[test]
    fn matches_enumeration() {
        for (f, genus) in [
            (Fixture::C3, 0),
            (Fixture::C4, 0),
            (Fixture::Grid3, 0),
            (Fixture::T22, 1),
        ] {
            let g = fixtures::load(f);
            let k: Vec<f64> = (0..g.num_edges()).map(|e| 0.1 + 0.02 * e as f64).collect();
            for alpha in HomologyClass::all(genus) {
                let a = walk_series(&g, &k, &alpha, 12, 1).unwrap();
                let b = walk_series_operator(&g, &k, &alpha, 12).unwrap();
                for n in 0..=12 {
                    assert!((a.terms[n] - b.terms[n]).abs() <= 1e-12, "{f:?} {alpha} n={n}");
                }
            }
        }
    }

    #[test]
    fn e1_operator_vanishes() {
        let g = fixtures::load(Fixture::E1);
        let s = walk_series_operator(&g, &[0.7], &HomologyClass::zero(0), 6).unwrap();
        assert!(s.terms.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn tail_bound_dominates_omitted_terms() {
        let g = fixtures::load(Fixture::Grid3);
        let k = vec![0.3; g.num_edges()];
        let alpha = HomologyClass::zero(0);
        let long = walk_series_operator(&g, &k, &alpha, 32).unwrap();
        let short = walk_series_operator(&g, &k, &alpha, 10).unwrap();
        let omitted: f64 = long.terms[11..].iter().map(|x| x.abs()).sum();
        assert!(omitted <= short.bound.unwrap().tail);
    }

    #[test]
    fn grid_spectral_radius() {
        let g = fixtures::load(Fixture::Grid3);
        let m = transfer_operator(&g, &vec![0.1; g.num_edges()], &HomologyClass::zero(0)).unwrap();
        let r = spectral_radius(&m);
        assert!(r > 0.0 && r < 0.1 * 3f64.sqrt() + 1e-9);
    }
}
