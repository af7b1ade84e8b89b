use serde::{Deserialize, Serialize};

use super::point::{mul_unchecked, HPoint};
use crate::error::{Error, Result};
use crate::rng;

/// Which homogeneous norm to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    /// `|x|₂ + |x̄|^{1/2}`.
    Sum,
    /// Carnot–Carathéodory distance to the origin.
    CC,
}

pub fn sum_norm(p: &HPoint) -> f64 {
    p.x.iter().map(|v| v * v).sum::<f64>().sqrt() + p.xbar.abs().sqrt()
}

pub fn hnorm(p: &HPoint, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Sum => Ok(sum_norm(p)),
        NormKind::CC => crate::cc::cc_norm(p),
    }
}

/// Distance `|p⁻¹q|` induced by a homogeneous norm.
pub fn hdist(p: &HPoint, q: &HPoint, kind: NormKind) -> Result<f64> {
    if p.x.len() != q.x.len() {
        return Err(Error::DimensionMismatch { expected: p.x.len(), got: q.x.len() });
    }
    hnorm(&mul_unchecked(&super::point::group_inv(p), q), kind)
}

/// Empirical maximum of `|pq| / (|p| + |q|)` over `sample_count` seeded pairs with
/// coordinates uniform in `[-1, 1]`. Pairs with `|p| + |q| = 0` contribute 0.
pub fn quasi_triangle_constant(kind: NormKind, n: usize, sample_count: usize, seed: u64) -> Result<f64> {
    if sample_count == 0 {
        return Err(Error::param("sample_count", "must be at least 1"));
    }
    if n == 0 {
        return Err(Error::param("n", "must be positive"));
    }
    let mut r = rng::seeded(seed);
    let lo = vec![-1.0; 2 * n + 1];
    let hi = vec![1.0; 2 * n + 1];
    let mut best: f64 = 0.0;
    for _ in 0..sample_count {
        let p = HPoint::from_coords(&rng::uniform_vec(&mut r, &lo, &hi))?;
        let q = HPoint::from_coords(&rng::uniform_vec(&mut r, &lo, &hi))?;
        best = best.max(triangle_ratio(&p, &q, kind)?);
    }
    Ok(best)
}

pub(crate) fn triangle_ratio(p: &HPoint, q: &HPoint, kind: NormKind) -> Result<f64> {
    let denom = hnorm(p, kind)? + hnorm(q, kind)?;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(hnorm(&mul_unchecked(p, q), kind)? / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heis::point::{dilate, group_inv};

    #[test]
    fn sum_norm_value() {
        let p = HPoint::new(vec![3.0, 4.0], 25.0).unwrap();
        assert_eq!(hnorm(&p, NormKind::Sum).unwrap(), 10.0);
    }

    #[test]
    fn sum_norm_axioms() {
        let p = HPoint::new(vec![0.3, -1.1], 0.7).unwrap();
        let np = sum_norm(&p);
        assert!((sum_norm(&group_inv(&p)) - np).abs() < 1e-15);
        for eps in [0.1, 0.5, 3.0] {
            assert!((sum_norm(&dilate(eps, &p).unwrap()) - eps * np).abs() < 1e-13);
        }
        assert_eq!(sum_norm(&HPoint::identity(2)), 0.0);
    }

    #[test]
    fn degenerate_pair_contributes_zero() {
        let z = HPoint::identity(1);
        assert_eq!(triangle_ratio(&z, &z, NormKind::Sum).unwrap(), 0.0);
        assert!(quasi_triangle_constant(NormKind::Sum, 1, 0, 0).is_err());
    }
}
