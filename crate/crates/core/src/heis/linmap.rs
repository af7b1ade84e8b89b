use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::point::{omega_matrix, HPoint};
use crate::error::{Error, Result};

/// Residual threshold for matrix-group membership.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Graded linear map `(x, x̄) ↦ (Ax, a·x̄)` of H(n).
#[derive(Debug, Clone, PartialEq)]
pub struct HLinMap {
    pub a_mat: DMatrix<f64>,
    pub center: f64,
}

impl HLinMap {
    pub fn new(a_mat: DMatrix<f64>, center: f64) -> Result<Self> {
        if a_mat.nrows() != a_mat.ncols() || a_mat.nrows() % 2 != 0 || a_mat.nrows() == 0 {
            return Err(Error::param("A", "must be a square 2n×2n matrix"));
        }
        Ok(HLinMap { a_mat, center })
    }

    pub fn identity(n: usize) -> Self {
        HLinMap {
            a_mat: DMatrix::identity(2 * n, 2 * n),
            center: 1.0,
        }
    }

    pub fn n(&self) -> usize {
        self.a_mat.nrows() / 2
    }

    pub fn apply(&self, p: &HPoint) -> HPoint {
        let x = nalgebra::DVector::from_column_slice(&p.x);
        HPoint {
            x: (&self.a_mat * x).as_slice().to_vec(),
            xbar: self.center * p.xbar,
        }
    }

    pub fn compose(&self, inner: &HLinMap) -> HLinMap {
        HLinMap {
            a_mat: &self.a_mat * &inner.a_mat,
            center: self.center * inner.center,
        }
    }

    pub fn max_abs_diff(&self, other: &HLinMap) -> f64 {
        (&self.a_mat - &other.a_mat)
            .iter()
            .fold((self.center - other.center).abs(), |m, v| m.max(v.abs()))
    }
}

/// Wire form: `{ "A": row-major, "a": center multiplier }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HLinMapWire {
    #[serde(rename = "A")]
    pub a_rows: Vec<Vec<f64>>,
    pub a: f64,
}

impl From<&HLinMap> for HLinMapWire {
    fn from(m: &HLinMap) -> Self {
        HLinMapWire {
            a_rows: m
                .a_mat
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            a: m.center,
        }
    }
}

impl TryFrom<HLinMapWire> for HLinMap {
    type Error = Error;
    fn try_from(w: HLinMapWire) -> Result<Self> {
        let rows = w.a_rows.len();
        if w.a_rows.iter().any(|r| r.len() != rows) {
            return Err(Error::param("A", "ragged or non-square rows"));
        }
        let flat: Vec<f64> = w.a_rows.into_iter().flatten().collect();
        HLinMap::new(DMatrix::from_row_slice(rows, rows, &flat), w.a)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LinMapClassification {
    pub is_morphism: bool,
    pub is_dilation_equivariant: bool,
    pub is_csp: bool,
    pub is_sp: bool,
    pub is_volume_preserving: bool,
    /// `max |ω(Ax, Ay) − a ω(x, y)|` over basis pairs.
    pub morphism_residual: f64,
    /// `max |δ_ε(m(p)) − m(δ_ε p)|` on basis vectors at ε = 2.
    pub dilation_residual: f64,
    /// `|aⁿ − det A|`.
    pub det_residual: f64,
    /// `max |AᵀJA − J|`.
    pub sp_residual: f64,
    pub center_residual: f64,
}

/// Classify `(A, a)` against the conformal symplectic / symplectic groups.
pub fn classify_linmap(m: &HLinMap) -> LinMapClassification {
    let n = m.n();
    let omega = omega_matrix(n);
    let pulled = m.a_mat.transpose() * &omega * &m.a_mat;
    let morphism_residual = max_abs(&(&pulled - &omega * m.center));
    let sp_residual = max_abs(&(&pulled - &omega));

    let mut dilation_residual: f64 = 0.0;
    let eps = 2.0;
    for k in 0..=2 * n {
        let mut c = vec![0.0; 2 * n + 1];
        c[k] = 1.0;
        let p = HPoint::from_coords(&c).expect("basis vector");
        let lhs = super::point::dilate_unchecked(eps, &m.apply(&p));
        let rhs = m.apply(&super::point::dilate_unchecked(eps, &p));
        dilation_residual = dilation_residual.max(lhs.coord_dist(&rhs));
    }

    let det = m.a_mat.determinant();
    let det_residual = (m.center.powi(n as i32) - det).abs();
    let det_scale = det.abs().max(1.0);
    let is_morphism = morphism_residual <= MEMBERSHIP_TOL && det.abs() > MEMBERSHIP_TOL;
    let is_dilation_equivariant = dilation_residual <= MEMBERSHIP_TOL;
    let is_csp = is_morphism && m.center > 0.0 && det_residual <= MEMBERSHIP_TOL * det_scale;
    let is_sp = sp_residual <= MEMBERSHIP_TOL;
    let center_residual = (m.center - 1.0).abs();
    LinMapClassification {
        is_morphism,
        is_dilation_equivariant,
        is_csp,
        is_sp,
        is_volume_preserving: is_sp && center_residual <= MEMBERSHIP_TOL,
        morphism_residual,
        dilation_residual,
        det_residual,
        sp_residual,
        center_residual,
    }
}

/// Classification of a linear map of H(n)×R in coordinates `(x, x̄, t)`,
/// written in blocks `[[A, b], [c, d]]` with `A` acting on H(n).
#[derive(Debug, Clone, Serialize)]
pub struct NxrClassification {
    pub accepted: bool,
    /// (i) `c` orthogonal to the center `[N, N]`.
    pub cond_i_c_orthogonal_center: f64,
    /// (ii) `[b, Ay] = 0` for all `y`.
    pub cond_ii_b_commutes: f64,
    /// (iii) `A` is a Lie algebra morphism of H(n).
    pub cond_iii_a_algebra_morphism: f64,
    /// (iv) `b ∈ V₁`; together with (ii) this forces `b = 0`, which is what is measured.
    pub cond_iv_b_zero: f64,
    /// (v) `A` preserves the grading `V₁ ⊕ center`.
    pub cond_v_a_graded: f64,
    pub determinant: f64,
}

pub fn classify_linmap_nxr(m: &DMatrix<f64>) -> Result<NxrClassification> {
    let size = m.nrows();
    if m.ncols() != size || size < 4 || size % 2 != 0 {
        return Err(Error::param("M", "must be square of size 2n+2"));
    }
    let n = (size - 2) / 2;
    let h = 2 * n; // horizontal dims
    let zc = h; // center index
    let tc = h + 1; // extra R index

    let a = m.view((0, 0), (h + 1, h + 1)).into_owned();
    let b: Vec<f64> = (0..=h).map(|i| m[(i, tc)]).collect();
    let c: Vec<f64> = (0..=h).map(|j| m[(tc, j)]).collect();

    let cond_i = c[zc].abs();

    let col_x = |j: usize| -> Vec<f64> { (0..h).map(|i| a[(i, j)]).collect() };
    let mut cond_ii: f64 = 0.0;
    for j in 0..=h {
        cond_ii = cond_ii.max(super::point::omega(&b[..h], &col_x(j)).abs());
    }

    // A[y, z] = [Ay, Az] on basis pairs; bracket of e_j, e_k is ω(e_j, e_k)·e_center.
    let omega_m = omega_matrix(n);
    let mut cond_iii: f64 = 0.0;
    for j in 0..=h {
        for k in 0..=h {
            let bracket_jk = if j < h && k < h { omega_m[(j, k)] } else { 0.0 };
            let lhs_x: Vec<f64> = (0..h).map(|i| a[(i, zc)] * bracket_jk).collect();
            let lhs_z = a[(zc, zc)] * bracket_jk;
            let rhs_z = super::point::omega(&col_x(j), &col_x(k));
            let r = lhs_x
                .iter()
                .fold((lhs_z - rhs_z).abs(), |acc, v| acc.max(v.abs()));
            cond_iii = cond_iii.max(r);
        }
    }

    let cond_iv = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    let mut cond_v: f64 = 0.0;
    for j in 0..h {
        cond_v = cond_v.max(a[(zc, j)].abs());
    }
    for i in 0..h {
        cond_v = cond_v.max(a[(i, zc)].abs());
    }

    let determinant = m.determinant();
    let accepted = [cond_i, cond_ii, cond_iii, cond_iv, cond_v]
        .iter()
        .all(|r| *r <= MEMBERSHIP_TOL)
        && determinant.abs() > MEMBERSHIP_TOL;
    Ok(NxrClassification {
        accepted,
        cond_i_c_orthogonal_center: cond_i,
        cond_ii_b_commutes: cond_ii,
        cond_iii_a_algebra_morphism: cond_iii,
        cond_iv_b_zero: cond_iv,
        cond_v_a_graded: cond_v,
        determinant,
    })
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heis::point::j_matrix;

    #[test]
    fn j_is_symplectic() {
        let c = classify_linmap(&HLinMap::new(j_matrix(1), 1.0).unwrap());
        assert!(c.is_sp && c.is_volume_preserving && c.is_csp);
        let c2 = classify_linmap(&HLinMap::new(j_matrix(3), 1.0).unwrap());
        assert!(c2.is_sp);
    }

    #[test]
    fn conformal_scaling() {
        let m = HLinMap::new(DMatrix::identity(2, 2) * 2.0, 4.0).unwrap();
        let c = classify_linmap(&m);
        assert!(c.is_morphism && c.is_csp);
        assert!(!c.is_sp && !c.is_volume_preserving);
        assert!(c.det_residual < 1e-12);
        // wrong center multiplier breaks the morphism property
        let bad = classify_linmap(&HLinMap::new(DMatrix::identity(2, 2) * 2.0, 3.0).unwrap());
        assert!(!bad.is_morphism);
    }

    #[test]
    fn non_symplectic_diag() {
        let m = HLinMap::new(DMatrix::from_diagonal(&nalgebra::dvector![1.0, 2.0]), 1.0).unwrap();
        let c = classify_linmap(&m);
        assert!(!c.is_sp);
        assert!((c.sp_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wire_roundtrip() {
        let m = HLinMap::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]), 0.5).unwrap();
        let w = HLinMapWire::from(&m);
        assert_eq!(w.a_rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let back = HLinMap::try_from(w).unwrap();
        assert_eq!(back, m);
    }

    fn nxr_block(n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::identity(2 * n + 2, 2 * n + 2);
        // symplectic shear p₁ += 0.7 q₁ on the horizontal block
        m[(n, 0)] = 0.7;
        m
    }

    #[test]
    fn nxr_accepts_block_diagonal() {
        let c = classify_linmap_nxr(&nxr_block(1)).unwrap();
        assert!(c.accepted, "{c:?}");
        // c supported on V₁ is allowed
        let mut m = nxr_block(1);
        m[(3, 0)] = 2.5;
        assert!(classify_linmap_nxr(&m).unwrap().accepted);
    }

    #[test]
    fn nxr_rejects_b_block() {
        let mut m = nxr_block(1);
        m[(0, 3)] = 0.25;
        let c = classify_linmap_nxr(&m).unwrap();
        assert!(!c.accepted);
        assert!(c.cond_iv_b_zero > 0.0);
    }

    #[test]
    fn nxr_rejects_central_c() {
        let mut m = nxr_block(1);
        m[(3, 2)] = 1.0;
        let c = classify_linmap_nxr(&m).unwrap();
        assert!(!c.accepted);
        assert!(c.cond_i_c_orthogonal_center > 0.0);
    }

    #[test]
    fn nxr_rejects_ungraded() {
        let mut m = nxr_block(2);
        m[(4, 1)] = 0.3;
        let c = classify_linmap_nxr(&m).unwrap();
        assert!(!c.accepted);
        assert!(c.cond_v_a_graded > 0.0);
    }
}
