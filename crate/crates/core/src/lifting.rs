//! Horizontal lifts of planar curves and lifts of symplectomorphisms to
//! volume-preserving diffeomorphisms `(x, x̄) ↦ (f(x), x̄ + F(x))` of H(n).
//!
//! With `λ_x(v) = ½ω(x, v)` the vertical part solves `dF = f*λ − λ`, i.e.
//! `∇F(x) = ½[Dfᵀ J f(x) − J x]`. `F` is integrated along the straight segment from
//! an anchor; an axis staircase path between the same endpoints is the witness of
//! path independence, which holds exactly when `f` is symplectic.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cc::HorizontalCurve;
use crate::error::{Error, Result};
use crate::heis::{j_matrix, omega, AxisBox, HPoint};
use crate::quad::composite_unit;
use crate::rng;

/// Tolerance on the straight-vs-staircase discrepancy of the vertical part.
pub const SYMPLECTICITY_TOL: f64 = 1e-8;
/// Relative central-difference step for Jacobians.
pub const FD_STEP: f64 = 1e-5;

type VecFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type InvFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;

/// A map of R^{2n}, optionally with an analytic Jacobian, inverse, and a box
/// outside which it is the identity.
#[derive(Clone)]
pub struct PlanarMap {
    dim: usize,
    f: Arc<VecFn>,
    jac: Option<Arc<JacFn>>,
    inv: Option<Arc<InvFn>>,
    support: Option<AxisBox>,
}

impl std::fmt::Debug for PlanarMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlanarMap")
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jac.is_some())
            .field("analytic_inverse", &self.inv.is_some())
            .field("support", &self.support)
            .finish()
    }
}

impl PlanarMap {
    pub fn new<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::param("dim", "must be a positive even number"));
        }
        Ok(PlanarMap { dim, f: Arc::new(f), jac: None, inv: None, support: None })
    }

    pub fn identity(dim: usize) -> Self {
        PlanarMap {
            dim,
            f: Arc::new(|x: &[f64]| x.to_vec()),
            jac: Some(Arc::new(move |_: &[f64]| DMatrix::identity(dim, dim))),
            inv: Some(Arc::new(|x: &[f64]| Ok(x.to_vec()))),
            support: None,
        }
    }

    /// `x ↦ Ax`; the inverse is taken from an LU factorization.
    pub fn linear(a: DMatrix<f64>) -> Result<Self> {
        let dim = a.nrows();
        if a.ncols() != dim || dim == 0 || dim % 2 != 0 {
            return Err(Error::param("A", "must be a square 2n×2n matrix"));
        }
        let a_inv = a.clone().try_inverse().ok_or_else(|| Error::Degenerate("singular matrix".into()))?;
        let fwd = a.clone();
        Ok(PlanarMap {
            dim,
            f: Arc::new(move |x: &[f64]| (&fwd * DVector::from_column_slice(x)).as_slice().to_vec()),
            jac: Some(Arc::new(move |_: &[f64]| a.clone())),
            inv: Some(Arc::new(move |y: &[f64]| {
                Ok((&a_inv * DVector::from_column_slice(y)).as_slice().to_vec())
            })),
            support: None,
        })
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jac = Some(Arc::new(jac));
        self
    }

    pub fn with_inverse<I>(mut self, inv: I) -> Self
    where
        I: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        self.inv = Some(Arc::new(inv));
        self
    }

    pub fn with_support(mut self, support: AxisBox) -> Result<Self> {
        if support.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: support.dim() });
        }
        self.support = Some(support);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> Option<&AxisBox> {
        self.support.as_ref()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    /// Analytic Jacobian if declared, else central differences.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        if let Some(j) = &self.jac {
            return j(x);
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        let mut xp = x.to_vec();
        for i in 0..self.dim {
            let h = FD_STEP * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let a = self.apply(&xp);
            xp[i] = x[i] - h;
            let b = self.apply(&xp);
            xp[i] = x[i];
            for r in 0..self.dim {
                m[(r, i)] = (a[r] - b[r]) / (2.0 * h);
            }
        }
        m
    }

    /// `Df(x)·v`.
    pub fn directional(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        if let Some(j) = &self.jac {
            return (j(x) * DVector::from_column_slice(v)).as_slice().to_vec();
        }
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if vn == 0.0 {
            return vec![0.0; self.dim];
        }
        let xn = x.iter().fold(1.0f64, |m, a| m.max(a.abs()));
        let h = FD_STEP * xn / vn;
        let a: Vec<f64> = x.iter().zip(v).map(|(p, d)| p + h * d).collect();
        let b: Vec<f64> = x.iter().zip(v).map(|(p, d)| p - h * d).collect();
        self.apply(&a)
            .iter()
            .zip(self.apply(&b))
            .map(|(p, q)| (p - q) / (2.0 * h))
            .collect()
    }

    /// `f⁻¹(y)`: declared inverse, identity outside the support, else Newton.
    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        if let Some(inv) = &self.inv {
            return inv(y);
        }
        if let Some(b) = &self.support {
            if !b.contains(y) {
                return Ok(y.to_vec());
            }
        }
        let mut x = y.to_vec();
        let mut res = f64::INFINITY;
        for _ in 0..60 {
            let fx = self.apply(&x);
            let r: Vec<f64> = fx.iter().zip(y).map(|(a, b)| a - b).collect();
            res = r.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            if res <= 1e-13 * y.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
                return Ok(x);
            }
            let step = self
                .jacobian(&x)
                .lu()
                .solve(&DVector::from_vec(r))
                .ok_or_else(|| Error::InversionFailed { point: y.to_vec(), residual: res })?;
            for (xi, si) in x.iter_mut().zip(step.iter()) {
                *xi -= si;
            }
        }
        if res <= 1e-10 {
            Ok(x)
        } else {
            Err(Error::InversionFailed { point: y.to_vec(), residual: res })
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PlanarMap) -> Result<PlanarMap> {
        if self.dim != inner.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: inner.dim });
        }
        let (a, b) = (self.clone(), inner.clone());
        let (a2, b2) = (self.clone(), inner.clone());
        let support = match (&self.support, &inner.support) {
            (Some(p), Some(q)) => Some(AxisBox::new(
                p.lo.iter().zip(&q.lo).map(|(u, v)| u.min(*v)).collect(),
                p.hi.iter().zip(&q.hi).map(|(u, v)| u.max(*v)).collect(),
            )?),
            _ => None,
        };
        let mut out = PlanarMap::new(self.dim, move |x: &[f64]| a.apply(&b.apply(x)))?
            .with_inverse(move |y: &[f64]| b2.inverse(&a2.inverse(y)?));
        if self.jac.is_some() && inner.jac.is_some() {
            let (a, b) = (self.clone(), inner.clone());
            out = out.with_jacobian(move |x: &[f64]| a.jacobian(&b.apply(x)) * b.jacobian(x));
        }
        out.support = support;
        Ok(out)
    }

    /// `f⁻¹` as a map; points where inversion fails map to NaN.
    pub fn inverse_map(&self) -> PlanarMap {
        let (a, b) = (self.clone(), self.clone());
        let dim = self.dim;
        PlanarMap {
            dim,
            f: Arc::new(move |y: &[f64]| a.inverse(y).unwrap_or_else(|_| vec![f64::NAN; dim])),
            jac: None,
            inv: Some(Arc::new(move |x: &[f64]| Ok(b.apply(x)))),
            support: self.support.clone(),
        }
    }

    /// Largest `|f(x) − x|` over points sampled on a thin shell just outside the
    /// declared support; 0 when no support is declared.
    pub fn support_violation(&self, samples: usize, seed: u64) -> f64 {
        let Some(b) = &self.support else { return 0.0 };
        let mut r = rng::seeded(seed);
        let pad: Vec<f64> = b.lo.iter().zip(&b.hi).map(|(l, h)| 0.05 * (h - l).max(1e-3)).collect();
        let mut worst = 0.0f64;
        for k in 0..samples {
            let mut x: Vec<f64> = (0..self.dim)
                .map(|i| rng::uniform_in(&mut r, b.lo[i] - pad[i], b.hi[i] + pad[i]))
                .collect();
            let axis = k % self.dim;
            x[axis] = if k / self.dim % 2 == 0 {
                b.lo[axis] - rng::uniform_in(&mut r, 0.0, pad[axis])
            } else {
                b.hi[axis] + rng::uniform_in(&mut r, 0.0, pad[axis])
            };
            let fx = self.apply(&x);
            worst = fx.iter().zip(&x).fold(worst, |m, (a, b)| m.max((a - b).abs()));
        }
        worst
    }
}

/// `|DᵀJD − J|_max`.
pub fn symplectic_defect(d: &DMatrix<f64>) -> f64 {
    let j = j_matrix(d.nrows() / 2);
    (d.transpose() * &j * d - j).amax()
}

/// Horizontal lift of a sampled planar curve: `x̄_{k+1} = x̄_k + ½ω(c_k, c_{k+1})`,
/// the midpoint rule for `x̄̇ = ½ω(c, ċ)` on the piecewise-linear interpolant.
pub fn horizontal_lift(times: &[f64], xs: &[Vec<f64>], xbar0: f64) -> Result<HorizontalCurve> {
    if times.len() != xs.len() || xs.len() < 2 {
        return Err(Error::param("curve", "need at least two samples with matching times"));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(Error::param("curve", "samples differ in dimension"));
    }
    if xs.iter().flatten().any(|v| !v.is_finite()) || !xbar0.is_finite() {
        return Err(Error::NonFinite("curve samples"));
    }
    let mut points = Vec::with_capacity(xs.len());
    let mut z = xbar0;
    points.push(HPoint { x: xs[0].clone(), xbar: z });
    for w in xs.windows(2) {
        z += 0.5 * omega(&w[0], &w[1]);
        points.push(HPoint { x: w[1].clone(), xbar: z });
    }
    HorizontalCurve::new(times.to_vec(), points)
}

#[derive(Debug, Clone)]
pub struct LiftOptions {
    /// Quadrature panels of 16 Gauss nodes on each straight leg.
    pub panels: usize,
    pub tol: f64,
    /// Points where the staircase witness is evaluated at construction.
    pub witness_count: usize,
    pub seed: u64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { panels: 4, tol: SYMPLECTICITY_TOL, witness_count: 16, seed: 0 }
    }
}

/// The lift `(x, x̄) ↦ (f(x), x̄ + F(x))` with `F(anchor) = a`.
#[derive(Debug, Clone)]
pub struct LiftedMap {
    base: PlanarMap,
    pub a: f64,
    pub anchor: Vec<f64>,
    pub symplecticity_residual: f64,
    nodes: Arc<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftedMapMeta {
    pub a: f64,
    pub anchor: Vec<f64>,
    pub symplecticity_residual: f64,
}

/// `∫_γ (f*λ − λ)` along the segment `from → to`.
fn segment_integral(f: &PlanarMap, nodes: &[(f64, f64)], from: &[f64], to: &[f64]) -> f64 {
    let v: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
    if v.iter().all(|c| *c == 0.0) {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut y = vec![0.0; from.len()];
    for &(s, w) in nodes {
        for i in 0..y.len() {
            y[i] = from[i] + s * v[i];
        }
        let fy = f.apply(&y);
        let dfv = f.directional(&y, &v);
        acc += w * 0.5 * (omega(&fy, &dfv) - omega(&y, &v));
    }
    acc
}

impl LiftedMap {
    pub fn base(&self) -> &PlanarMap {
        &self.base
    }

    pub fn meta(&self) -> LiftedMapMeta {
        LiftedMapMeta {
            a: self.a,
            anchor: self.anchor.clone(),
            symplecticity_residual: self.symplecticity_residual,
        }
    }

    fn outside_support(&self, x: &[f64]) -> bool {
        self.base.support.as_ref().is_some_and(|b| !b.contains(x))
    }

    /// Vertical part along the straight segment from the anchor.
    pub fn vertical(&self, x: &[f64]) -> f64 {
        if self.outside_support(x) {
            return self.a;
        }
        self.a + segment_integral(&self.base, &self.nodes, &self.anchor, x)
    }

    /// Vertical part along the axis staircase from the anchor.
    pub fn vertical_staircase(&self, x: &[f64]) -> f64 {
        if self.outside_support(x) {
            return self.a;
        }
        staircase(&self.base, &self.nodes, &self.anchor, x) + self.a
    }

    /// Largest straight-vs-staircase discrepancy over `points`.
    pub fn path_discrepancy(&self, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .map(|x| {
                self.a + segment_integral(&self.base, &self.nodes, &self.anchor, x)
                    - self.a
                    - staircase(&self.base, &self.nodes, &self.anchor, x)
            })
            .fold(0.0, |m: f64, d| m.max(d.abs()))
    }

    pub fn apply(&self, p: &HPoint) -> HPoint {
        HPoint { x: self.base.apply(&p.x), xbar: p.xbar + self.vertical(&p.x) }
    }

    pub fn apply_inverse(&self, p: &HPoint) -> Result<HPoint> {
        let x = self.base.inverse(&p.x)?;
        let z = p.xbar - self.vertical(&x);
        Ok(HPoint { x, xbar: z })
    }

    /// Tabulate `F` on a grid as CSV rows `x1..x2n, F`.
    pub fn tabulate(&self, grid: &[Vec<f64>]) -> Vec<Vec<f64>> {
        grid.iter()
            .map(|x| {
                let mut row = x.clone();
                row.push(self.vertical(x));
                row
            })
            .collect()
    }
}

fn staircase(f: &PlanarMap, nodes: &[(f64, f64)], from: &[f64], to: &[f64]) -> f64 {
    let mut cur = from.to_vec();
    let mut acc = 0.0;
    for i in 0..from.len() {
        let mut next = cur.clone();
        next[i] = to[i];
        acc += segment_integral(f, nodes, &cur, &next);
        cur = next;
    }
    acc
}

/// Lift a symplectomorphism; refuses maps whose path-independence witness fails.
///
/// With a declared support the anchor defaults to the lower support corner, where `f`
/// is the identity, and `F ≡ a` outside the support.
pub fn lift_symplectomorphism(
    f: &PlanarMap,
    a: f64,
    anchor: Option<&[f64]>,
    opts: &LiftOptions,
) -> Result<LiftedMap> {
    if opts.panels == 0 {
        return Err(Error::param("panels", "must be positive"));
    }
    let dim = f.dim();
    let anchor = match (anchor, &f.support) {
        (Some(p), _) => {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            p.to_vec()
        }
        (None, Some(b)) => b.lo.clone(),
        (None, None) => vec![0.0; dim],
    };
    let mut lifted = LiftedMap {
        base: f.clone(),
        a,
        anchor: anchor.clone(),
        symplecticity_residual: 0.0,
        nodes: Arc::new(composite_unit(opts.panels)),
    };
    let witness_box = match &f.support {
        Some(b) => b.clone(),
        None => AxisBox::new(
            anchor.iter().map(|v| v - 1.0).collect(),
            anchor.iter().map(|v| v + 1.0).collect(),
        )?,
    };
    let mut r = rng::seeded(opts.seed);
    let witness: Vec<Vec<f64>> = (0..opts.witness_count)
        .map(|_| rng::uniform_vec(&mut r, &witness_box.lo, &witness_box.hi))
        .collect();
    let res = lifted.path_discrepancy(&witness);
    if !res.is_finite() {
        return Err(Error::NonFinite("path integral"));
    }
    lifted.symplecticity_residual = res;
    if res > opts.tol {
        return Err(Error::NotSymplectic { residual: res, tolerance: opts.tol });
    }
    Ok(lifted)
}

/// Per-point residuals of the four volume-preservation conditions.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionResiduals {
    pub point: HPoint,
    /// `|DᵀJD − J|_max`, `D = ∂f/∂x`.
    pub cc1: f64,
    /// `|∂f̄/∂x − ½[DᵀJf − Jx]|_max`.
    pub cc2: f64,
    /// `|∂f̄/∂x̄ − 1 − ½ω(f, ∂f/∂x̄)|`.
    pub cc3: f64,
    /// `|∂f/∂x̄ − μJx|_max` for the least-squares `μ`.
    pub cc4: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub h: f64,
    pub points: Vec<ConditionResiduals>,
    pub max_cc1: f64,
    pub max_cc2: f64,
    pub max_cc3: f64,
    pub max_cc4: f64,
    pub max_abs_mu: f64,
}

impl ConditionReport {
    pub fn max_residual(&self) -> f64 {
        self.max_cc1.max(self.max_cc2).max(self.max_cc3).max(self.max_cc4)
    }
}

/// Central-difference check of the four conditions on a map of H(n).
pub fn check_volume_preserving_conditions<G>(g: G, points: &[HPoint], h: f64) -> Result<ConditionReport>
where
    G: Fn(&HPoint) -> HPoint,
{
    if !(h > 0.0) {
        return Err(Error::param("h", "step must be positive"));
    }
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let dim = p.x.len();
        let n = dim / 2;
        let j = j_matrix(n);
        let gp = g(p);
        let mut d = DMatrix::zeros(dim, dim);
        let mut dz_dx = DVector::zeros(dim);
        for i in 0..dim {
            let mut a = p.clone();
            let mut b = p.clone();
            a.x[i] += h;
            b.x[i] -= h;
            let (ga, gb) = (g(&a), g(&b));
            for r in 0..dim {
                d[(r, i)] = (ga.x[r] - gb.x[r]) / (2.0 * h);
            }
            dz_dx[i] = (ga.xbar - gb.xbar) / (2.0 * h);
        }
        let mut a = p.clone();
        let mut b = p.clone();
        a.xbar += h;
        b.xbar -= h;
        let (ga, gb) = (g(&a), g(&b));
        let dx_dz: Vec<f64> = ga.x.iter().zip(&gb.x).map(|(u, v)| (u - v) / (2.0 * h)).collect();
        let dz_dz = (ga.xbar - gb.xbar) / (2.0 * h);

        let cc1 = symplectic_defect(&d);
        let fvec = DVector::from_column_slice(&gp.x);
        let xvec = DVector::from_column_slice(&p.x);
        let expected = (d.transpose() * &j * fvec - &j * xvec) * 0.5;
        let cc2 = (&dz_dx - expected).amax();
        let cc3 = (dz_dz - 1.0 - 0.5 * omega(&gp.x, &dx_dz)).abs();
        let jx = crate::heis::apply_j(&p.x);
        let jx2: f64 = jx.iter().map(|v| v * v).sum();
        let mu = if jx2 > 0.0 {
            dx_dz.iter().zip(&jx).map(|(u, v)| u * v).sum::<f64>() / jx2
        } else {
            0.0
        };
        let cc4 = dx_dz.iter().zip(&jx).fold(0.0f64, |m, (u, v)| m.max((u - mu * v).abs()));
        out.push(ConditionResiduals { point: p.clone(), cc1, cc2, cc3, cc4, mu });
    }
    let fold = |f: fn(&ConditionResiduals) -> f64| out.iter().map(f).fold(0.0, f64::max);
    Ok(ConditionReport {
        h,
        max_cc1: fold(|r| r.cc1),
        max_cc2: fold(|r| r.cc2),
        max_cc3: fold(|r| r.cc3),
        max_cc4: fold(|r| r.cc4),
        max_abs_mu: fold(|r| r.mu.abs()),
        points: out,
    })
}

/// Planar and vertical parts read off a map of H(n) at two center levels.
#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub x: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    #[serde(rename = "F")]
    pub vertical: Vec<f64>,
    /// Largest dependence of either part on the center coordinate.
    pub max_defect: f64,
}

/// Decompose `g` as `(φ(x), x̄ + F(x))`, evaluating at `x̄` and `x̄ + dz` per grid point.
pub fn rigidity_decompose<G>(g: G, grid: &[HPoint], dz: f64) -> Result<RigidityReport>
where
    G: Fn(&HPoint) -> HPoint,
{
    if dz == 0.0 || !dz.is_finite() {
        return Err(Error::param("dz", "levels must be distinct"));
    }
    let mut x = Vec::with_capacity(grid.len());
    let mut phi = Vec::with_capacity(grid.len());
    let mut vertical = Vec::with_capacity(grid.len());
    let mut worst = 0.0f64;
    for p in grid {
        let q = HPoint { x: p.x.clone(), xbar: p.xbar + dz };
        let (gp, gq) = (g(p), g(&q));
        let dx = gp.x.iter().zip(&gq.x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let fp = gp.xbar - p.xbar;
        let fq = gq.xbar - q.xbar;
        worst = worst.max(dx).max((fp - fq).abs());
        x.push(p.x.clone());
        phi.push(gp.x);
        vertical.push(fp);
    }
    Ok(RigidityReport { x, phi, vertical, max_defect: worst })
}

/// Named symplectomorphisms with closed-form Jacobians and inverses.
pub mod catalog {
    use nalgebra::DMatrix;

    use super::PlanarMap;
    use crate::error::{Error, Result};

    /// `(q, p + k·q²)`.
    pub fn shear(k: f64) -> PlanarMap {
        PlanarMap::new(2, move |x: &[f64]| vec![x[0], x[1] + k * x[0] * x[0]])
            .expect("planar map")
            .with_jacobian(move |x: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0 * k * x[0], 1.0]))
            .with_inverse(move |y: &[f64]| Ok(vec![y[0], y[1] - k * y[0] * y[0]]))
    }

    /// `(q + k·sin p, p)`.
    pub fn sine_shear(k: f64) -> PlanarMap {
        PlanarMap::new(2, move |x: &[f64]| vec![x[0] + k * x[1].sin(), x[1]])
            .expect("planar map")
            .with_jacobian(move |x: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, k * x[1].cos(), 0.0, 1.0]))
            .with_inverse(move |y: &[f64]| Ok(vec![y[0] - k * y[1].sin(), y[1]]))
    }

    /// `p ↦ p + ∇V(q)` on R⁴ with `V = k·q₁²q₂`.
    pub fn kick(k: f64) -> PlanarMap {
        PlanarMap::new(4, move |x: &[f64]| {
            vec![x[0], x[1], x[2] + 2.0 * k * x[0] * x[1], x[3] + k * x[0] * x[0]]
        })
        .expect("planar map")
        .with_jacobian(move |x: &[f64]| {
            let mut d = DMatrix::identity(4, 4);
            d[(2, 0)] = 2.0 * k * x[1];
            d[(2, 1)] = 2.0 * k * x[0];
            d[(3, 0)] = 2.0 * k * x[0];
            d
        })
        .with_inverse(move |y: &[f64]| {
            Ok(vec![y[0], y[1], y[2] - 2.0 * k * y[0] * y[1], y[3] - k * y[0] * y[0]])
        })
    }

    pub fn rotation_matrix(theta: f64) -> DMatrix<f64> {
        let (s, c) = theta.sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    }

    pub fn rotation(theta: f64) -> PlanarMap {
        PlanarMap::linear(rotation_matrix(theta)).expect("square matrix")
    }

    pub const NAMES: [&str; 5] = ["identity", "shear", "sine-shear", "kick", "rotation"];

    /// Look up a map by name; `k` is the strength (angle for `rotation`).
    pub fn by_name(name: &str, k: f64) -> Result<PlanarMap> {
        match name {
            "identity" => Ok(PlanarMap::identity(2)),
            "shear" => Ok(shear(k)),
            "sine-shear" => Ok(sine_shear(k)),
            "kick" => Ok(kick(k)),
            "rotation" => Ok(rotation(k)),
            other => Err(Error::Validation(format!(
                "unknown map `{other}` (expected one of {})",
                NAMES.join(", ")
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn shear() -> PlanarMap {
        PlanarMap::new(2, |x: &[f64]| vec![x[0], x[1] + 3.0 * x[0] * x[0]]).unwrap()
    }

    #[test]
    fn circle_lift_gains_area() {
        let k = 20000;
        let times: Vec<f64> = (0..=k).map(|i| 2.0 * PI * i as f64 / k as f64).collect();
        let xs: Vec<Vec<f64>> = times.iter().map(|t| vec![t.cos(), t.sin()]).collect();
        let c = horizontal_lift(&times, &xs, 0.0).unwrap();
        assert!((c.end().xbar - PI).abs() < 1e-6);
        assert!(c.max_residual() < 1e-12);
    }

    #[test]
    fn degenerate_lifts() {
        let times = [0.0, 0.5, 1.0];
        let c = horizontal_lift(&times, &vec![vec![1.0, 2.0]; 3], 4.0).unwrap();
        assert!(c.points.iter().all(|p| p.xbar == 4.0));
        let seg: Vec<Vec<f64>> = times.iter().map(|t| vec![t * 0.3, -t * 0.7]).collect();
        let c = horizontal_lift(&times, &seg, 0.0).unwrap();
        assert!(c.points.iter().all(|p| p.xbar.abs() < 1e-17));
        assert!(horizontal_lift(&[0.0, 0.0], &vec![vec![0.0, 0.0]; 2], 0.0).is_err());
    }

    #[test]
    fn shear_lift_closed_form() {
        let l = lift_symplectomorphism(&shear(), 0.0, None, &LiftOptions::default()).unwrap();
        for x in [[2.0, 0.0], [2.0, -5.0], [-1.3, 0.4], [0.7, 2.2]] {
            assert!((l.vertical(&x) - 0.5 * x[0].powi(3)).abs() < 1e-8, "{x:?}");
        }
        assert!((l.vertical(&[2.0, 9.0]) - 4.0).abs() < 1e-8);
        assert!(l.symplecticity_residual < 1e-9);
    }

    #[test]
    fn linear_and_identity_lifts() {
        let (s, c) = 0.9f64.sin_cos();
        let a = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]) * DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.0, 1.0]);
        let l = lift_symplectomorphism(&PlanarMap::linear(a).unwrap(), 0.0, None, &LiftOptions::default()).unwrap();
        assert!(l.vertical(&[1.5, -2.0]).abs() < 1e-10);
        let id = lift_symplectomorphism(&PlanarMap::identity(2), 7.0, None, &LiftOptions::default()).unwrap();
        assert_eq!(id.vertical(&[3.0, 4.0]), 7.0);
    }

    #[test]
    fn non_symplectic_refused() {
        let f = PlanarMap::new(2, |x: &[f64]| vec![x[0], 2.0 * x[1]]).unwrap();
        assert!(matches!(
            lift_symplectomorphism(&f, 0.0, None, &LiftOptions::default()),
            Err(Error::NotSymplectic { .. })
        ));
    }

    #[test]
    fn conditions_on_shear_and_counterexamples() {
        let l = lift_symplectomorphism(&shear(), 0.0, None, &LiftOptions::default()).unwrap();
        let pts = vec![
            HPoint::new(vec![0.3, -0.2], 0.5).unwrap(),
            HPoint::new(vec![-0.8, 1.1], -1.0).unwrap(),
        ];
        let rep = check_volume_preserving_conditions(|p| l.apply(p), &pts, 1e-4).unwrap();
        assert!(rep.max_residual() < 1e-6, "{rep:?}");
        assert!(rep.max_abs_mu < 1e-6);

        let diag = |p: &HPoint| HPoint { x: vec![p.x[0], 2.0 * p.x[1]], xbar: p.xbar };
        let rep = check_volume_preserving_conditions(diag, &pts, 1e-4).unwrap();
        assert!((rep.max_cc1 - 1.0).abs() < 1e-8);

        let tilt = |p: &HPoint| {
            let jx = crate::heis::apply_j(&p.x);
            HPoint { x: vec![p.x[0] + 0.1 * p.xbar * jx[0], p.x[1] + 0.1 * p.xbar * jx[1]], xbar: p.xbar }
        };
        let at0 = [HPoint::new(vec![0.6, -0.4], 0.0).unwrap()];
        let rep = check_volume_preserving_conditions(tilt, &at0, 1e-4).unwrap();
        assert!((rep.points[0].mu - 0.1).abs() < 1e-8);
        assert!(rep.points[0].cc4 < 1e-8);
    }

    #[test]
    fn rigidity() {
        let l = lift_symplectomorphism(&shear(), 0.0, None, &LiftOptions::default()).unwrap();
        let grid: Vec<HPoint> = (0..5)
            .map(|i| HPoint::new(vec![0.2 * i as f64 - 0.4, 0.1 * i as f64], 0.3).unwrap())
            .collect();
        let rep = rigidity_decompose(|p| l.apply(p), &grid, 1.0).unwrap();
        assert!(rep.max_defect <= 1e-12);
        let bent = |p: &HPoint| HPoint {
            x: p.x.iter().map(|v| v * (1.0 + 0.01 * p.xbar)).collect(),
            xbar: p.xbar,
        };
        assert!(rigidity_decompose(bent, &grid, 1.0).unwrap().max_defect > 1e-3);
        let id = rigidity_decompose(|p: &HPoint| p.clone(), &grid, 1.0).unwrap();
        assert_eq!(id.max_defect, 0.0);
        assert!(id.vertical.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn inverse_by_newton() {
        let f = shear();
        let x = [0.4, -0.9];
        let y = f.apply(&x);
        let back = f.inverse(&y).unwrap();
        assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
    }
}
