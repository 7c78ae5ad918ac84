//! Exact-arithmetic check of exp(−Σ S_n) against the even-subgraph
//! generating function, for truncation errors far below f64 resolution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::geometry::HomologyClass;
use crate::graph::EmbeddedGraph;
use crate::subgraph::even_subgraph_counts;
use crate::walks::signed_counts;

/// Fractional bits of the fixed-point evaluation.
pub const FIXED_BITS: u64 = 320;

fn to_fixed(x: &BigRational, bits: u64) -> BigInt {
    (x.numer() << bits) / x.denom()
}

/// exp(−x) in fixed point with `bits` fractional bits (Taylor series).
fn exp_neg_fixed(x: &BigRational, bits: u64) -> BigInt {
    let one = BigInt::one() << bits;
    let xf = to_fixed(x, bits);
    let mut term = one.clone();
    let mut sum = one;
    let mut i = 1u32;
    while !term.is_zero() {
        term = (&term * -&xf) / (BigInt::from(i) << bits);
        sum += &term;
        i += 1;
    }
    sum
}

#[derive(Debug, Clone, Serialize)]
pub struct PreciseError {
    pub max_len: usize,
    /// |exp(−Σ_{n≤maxLen} S_n) − Σ_H k^|H||.
    pub error: f64,
}

/// Truncation errors of the planar identity at uniform weight k = num/den,
/// one per requested truncation length, from exact signed walk counts.
pub fn planar_truncation_errors(
    g: &EmbeddedGraph,
    num: i64,
    den: i64,
    lengths: &[usize],
    workers: usize,
) -> Result<Vec<PreciseError>> {
    let max = lengths.iter().copied().max().unwrap_or(0);
    let counts = signed_counts(g, &HomologyClass::zero(g.genus()), max, workers)?;
    let even = even_subgraph_counts(g)?;
    let k = BigRational::new(BigInt::from(num), BigInt::from(den));
    let mut gf = BigRational::zero();
    let mut kp = BigRational::one();
    for &c in &even {
        gf += &kp * BigInt::from(c);
        kp *= &k;
    }
    let gf_fixed = to_fixed(&gf, FIXED_BITS);
    let scale = 2f64.powi(FIXED_BITS as i32);
    let mut out = Vec::new();
    for &len in lengths {
        let mut x = BigRational::zero();
        let mut kp = BigRational::one();
        for (n, &c) in counts.iter().enumerate().take(len + 1) {
            if n > 0 && c != 0 {
                x += &kp * BigRational::new(BigInt::from(c), BigInt::from(2 * n as i64));
            }
            kp *= &k;
        }
        let diff = (exp_neg_fixed(&x, FIXED_BITS) - &gf_fixed).abs();
        out.push(PreciseError {
            max_len: len,
            error: diff.to_f64().unwrap_or(f64::INFINITY) / scale,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, Fixture};

    #[test]
    fn fixed_point_exp() {
        let x = BigRational::new(BigInt::from(1), BigInt::from(3));
        let v = exp_neg_fixed(&x, 200).to_f64().unwrap() / 2f64.powi(200);
        assert!((v - (-1.0f64 / 3.0).exp()).abs() < 1e-16);
    }

    #[test]
    fn square_errors_shrink() {
        let g = fixtures::load(Fixture::C4);
        let e = planar_truncation_errors(&g, 1, 5, &[4, 8, 12], 1).unwrap();
        assert!(e[0].error > e[1].error && e[1].error > e[2].error && e[2].error > 0.0);
    }
}
