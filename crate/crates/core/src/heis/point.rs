use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard symplectic form on R^{2n} with coordinates ordered (q₁..qₙ, p₁..pₙ).
///
/// `ω(x, y) = ⟨Jx, y⟩ = Σ qᵢp'ᵢ − pᵢq'ᵢ` where `J(q, p) = (−p, q)`, so that
/// `ω(eᵢ, e_{n+i}) = 1`.
#[inline]
pub fn omega(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() / 2;
    let mut s = 0.0;
    for i in 0..n {
        s += x[i] * y[n + i] - x[n + i] * y[i];
    }
    s
}

/// `J(q, p) = (−p, q)`.
pub fn apply_j(x: &[f64]) -> Vec<f64> {
    let n = x.len() / 2;
    let mut out = vec![0.0; x.len()];
    for i in 0..n {
        out[i] = -x[n + i];
        out[n + i] = x[i];
    }
    out
}

/// `J⁻¹ = −J`, i.e. `(q, p) ↦ (p, −q)`.
pub fn apply_j_inv(x: &[f64]) -> Vec<f64> {
    let n = x.len() / 2;
    let mut out = vec![0.0; x.len()];
    for i in 0..n {
        out[i] = x[n + i];
        out[n + i] = -x[i];
    }
    out
}

/// The matrix of `J` (so that `Jx` is `j_matrix(n) * x`).
pub fn j_matrix(n: usize) -> nalgebra::DMatrix<f64> {
    let mut j = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// Gram matrix `Ω` of ω, `ω(x, y) = xᵀΩy`. Equals `Jᵀ`.
pub fn omega_matrix(n: usize) -> nalgebra::DMatrix<f64> {
    j_matrix(n).transpose()
}

/// A point `(x, x̄)` of the Heisenberg group H(n), `x ∈ R^{2n}`, `x̄ ∈ R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: Vec<f64>,
    pub xbar: f64,
}

impl HPoint {
    pub fn new(x: Vec<f64>, xbar: f64) -> Result<Self> {
        if x.is_empty() || x.len() % 2 != 0 {
            return Err(Error::param(
                "x",
                format!("horizontal part must have even positive length, got {}", x.len()),
            ));
        }
        if !x.iter().all(|v| v.is_finite()) || !xbar.is_finite() {
            return Err(Error::NonFinite("HPoint"));
        }
        Ok(HPoint { x, xbar })
    }

    pub fn identity(n: usize) -> Self {
        HPoint {
            x: vec![0.0; 2 * n],
            xbar: 0.0,
        }
    }

    pub fn horizontal(x: Vec<f64>) -> Self {
        HPoint { x, xbar: 0.0 }
    }

    pub fn central(n: usize, xbar: f64) -> Self {
        HPoint {
            x: vec![0.0; 2 * n],
            xbar,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len() / 2
    }

    /// Flat coordinates `(x₁..x₂ₙ, x̄)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.x.clone();
        c.push(self.xbar);
        c
    }

    pub fn from_coords(c: &[f64]) -> Result<Self> {
        match c.split_last() {
            Some((xbar, x)) => HPoint::new(x.to_vec(), *xbar),
            None => Err(Error::param("coords", "empty")),
        }
    }

    /// Max-norm distance between coordinate vectors.
    pub fn coord_dist(&self, other: &HPoint) -> f64 {
        self.x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a - b).abs())
            .fold((self.xbar - other.xbar).abs(), f64::max)
    }
}

fn check_same_n(p: &HPoint, q: &HPoint) -> Result<()> {
    if p.x.len() != q.x.len() {
        return Err(Error::DimensionMismatch {
            expected: p.x.len(),
            got: q.x.len(),
        });
    }
    Ok(())
}

/// `(x, x̄)(y, ȳ) = (x + y, x̄ + ȳ + ½ω(x, y))`.
pub fn group_mul(p: &HPoint, q: &HPoint) -> Result<HPoint> {
    check_same_n(p, q)?;
    Ok(mul_unchecked(p, q))
}

pub(crate) fn mul_unchecked(p: &HPoint, q: &HPoint) -> HPoint {
    HPoint {
        x: p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect(),
        xbar: p.xbar + q.xbar + 0.5 * omega(&p.x, &q.x),
    }
}

pub fn group_inv(p: &HPoint) -> HPoint {
    HPoint {
        x: p.x.iter().map(|v| -v).collect(),
        xbar: -p.xbar,
    }
}

/// Lie bracket `[(x, x̄), (y, ȳ)] = (0, ω(x, y))`.
pub fn bracket(p: &HPoint, q: &HPoint) -> Result<HPoint> {
    check_same_n(p, q)?;
    Ok(HPoint::central(p.n(), omega(&p.x, &q.x)))
}

/// Group commutator `p q p⁻¹ q⁻¹`.
pub fn commutator(p: &HPoint, q: &HPoint) -> Result<HPoint> {
    let pq = group_mul(p, q)?;
    let pqp = group_mul(&pq, &group_inv(p))?;
    group_mul(&pqp, &group_inv(q))
}

/// `δ_ε(x, x̄) = (εx, ε²x̄)`.
pub fn dilate(eps: f64, p: &HPoint) -> Result<HPoint> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param("eps", format!("dilation factor must be positive, got {eps}")));
    }
    Ok(dilate_unchecked(eps, p))
}

pub(crate) fn dilate_unchecked(eps: f64, p: &HPoint) -> HPoint {
    HPoint {
        x: p.x.iter().map(|v| eps * v).collect(),
        xbar: eps * eps * p.xbar,
    }
}

/// Homogeneous dimension `Q = 2n + 2`.
pub fn homogeneous_dimension(n: usize) -> usize {
    2 * n + 2
}

/// Axis-aligned box in R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::param("box", "bounds must be finite with lo <= hi"));
        }
        Ok(AxisBox { lo, hi })
    }

    pub fn cube(dim: usize, half: f64) -> Self {
        AxisBox {
            lo: vec![-half; dim],
            hi: vec![half; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        self.dim() == other.dim()
            && self
                .lo
                .iter()
                .zip(&other.lo)
                .all(|(a, b)| *a <= *b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| *a >= *b)
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Image of an H(n) box (last coordinate central) under `δ_ε`.
    pub fn dilate_heisenberg(&self, eps: f64) -> AxisBox {
        let d = self.dim();
        let scale = |i: usize| if i + 1 == d { eps * eps } else { eps };
        AxisBox {
            lo: (0..d).map(|i| self.lo[i] * scale(i)).collect(),
            hi: (0..d).map(|i| self.hi[i] * scale(i)).collect(),
        }
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: &[f64], xbar: f64) -> HPoint {
        HPoint::new(x.to_vec(), xbar).unwrap()
    }

    #[test]
    fn mul_basic() {
        let r = group_mul(&p(&[1.0, 0.0], 0.0), &p(&[0.0, 1.0], 0.0)).unwrap();
        assert_eq!(r, p(&[1.0, 1.0], 0.5));
        let a = p(&[0.3, -2.0], 1.5);
        assert_eq!(group_mul(&a, &HPoint::identity(1)).unwrap(), a);
    }

    #[test]
    fn mul_dimension_mismatch() {
        let err = group_mul(&HPoint::identity(1), &HPoint::identity(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn inverse_and_bracket() {
        assert_eq!(group_inv(&p(&[1.0, 2.0], 3.0)), p(&[-1.0, -2.0], -3.0));
        assert_eq!(group_inv(&HPoint::identity(1)), HPoint::identity(1));
        let b = bracket(&p(&[1.0, 0.0], 5.0), &p(&[0.0, 1.0], 7.0)).unwrap();
        assert_eq!(b, p(&[0.0, 0.0], 1.0));
        let q = p(&[0.4, 0.9], -1.0);
        assert_eq!(bracket(&q, &q).unwrap(), HPoint::identity(1));
        assert_eq!(bracket(&HPoint::central(1, 1.0), &q).unwrap(), HPoint::identity(1));
    }

    #[test]
    fn dilation() {
        assert_eq!(dilate(2.0, &p(&[1.0, 1.0], 1.0)).unwrap(), p(&[2.0, 2.0], 4.0));
        let a = p(&[0.3, 0.2], -0.7);
        assert_eq!(dilate(1.0, &a).unwrap(), a);
        assert!(dilate(0.0, &a).is_err());
        assert!(dilate(-1.0, &a).is_err());
    }

    #[test]
    fn omega_convention() {
        assert_eq!(omega(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        // ω(e_i, e_{n+i}) = 1 in H(2)
        assert_eq!(omega(&[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0]), 1.0);
        let x = [0.3, -1.2, 0.5, 2.0];
        let y = [1.1, 0.4, -0.6, 0.2];
        let jx = apply_j(&x);
        let direct: f64 = jx.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((omega(&x, &y) - direct).abs() < 1e-15);
        assert_eq!(apply_j_inv(&apply_j(&x)), x.to_vec());
    }

    #[test]
    fn rejects_bad_points() {
        assert!(HPoint::new(vec![1.0], 0.0).is_err());
        assert!(HPoint::new(vec![], 0.0).is_err());
        assert!(HPoint::new(vec![f64::NAN, 0.0], 0.0).is_err());
    }

    #[test]
    fn box_dilation_volume() {
        let b = AxisBox::new(vec![0.0, -1.0, 0.5], vec![1.0, 2.0, 1.5]).unwrap();
        let d = b.dilate_heisenberg(0.5);
        assert_eq!(d.volume(), 0.5f64.powi(4) * b.volume());
        assert_eq!(b.corners().len(), 8);
    }
}
