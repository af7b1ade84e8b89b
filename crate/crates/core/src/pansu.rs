//! Pansu difference maps and derivative estimation on H(n).
//!
//! The difference map of `f` at `x` and scale `t` is `F_t(y) = δ_t⁻¹(f(x)⁻¹ f(x δ_t y))`.
//! When `f` is Pansu differentiable, `F_t` converges to a graded morphism `(A, a)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heis::{
    dilate_unchecked, group_inv, mul_unchecked, omega, sum_norm, HLinMap, HLinMapWire, HPoint,
};
use crate::rng;

/// Tolerance on the fitted block drift between the two smallest scales.
pub const PANSU_TOL: f64 = 1e-4;

/// `F_t` for a fixed base point and scale.
pub struct DifferenceMap<'a, F> {
    f: &'a F,
    base: HPoint,
    scale: f64,
    f_base_inv: HPoint,
}

impl<'a, F> DifferenceMap<'a, F>
where
    F: Fn(&HPoint) -> Result<HPoint>,
{
    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, y: &HPoint) -> Result<HPoint> {
        if y.x.len() != self.base.x.len() {
            return Err(Error::DimensionMismatch { expected: self.base.x.len(), got: y.x.len() });
        }
        let moved = mul_unchecked(&self.base, &dilate_unchecked(self.scale, y));
        let image = checked_eval(self.f, &moved, self.base.x.len())?;
        let rel = mul_unchecked(&self.f_base_inv, &image);
        Ok(dilate_unchecked(1.0 / self.scale, &rel))
    }
}

fn checked_eval<F: Fn(&HPoint) -> Result<HPoint>>(f: &F, p: &HPoint, dim: usize) -> Result<HPoint> {
    let out = f(p)?;
    if out.x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: out.x.len() });
    }
    if out.x.iter().any(|v| !v.is_finite()) || !out.xbar.is_finite() {
        return Err(Error::NonFinite("map evaluation"));
    }
    Ok(out)
}

pub fn difference_map<'a, F>(f: &'a F, x: &HPoint, t: f64) -> Result<DifferenceMap<'a, F>>
where
    F: Fn(&HPoint) -> Result<HPoint>,
{
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::param("t", "scale must be positive"));
    }
    let fx = checked_eval(f, x, x.x.len())?;
    Ok(DifferenceMap { f, base: x.clone(), scale: t, f_base_inv: group_inv(&fx) })
}

#[derive(Debug, Clone)]
pub struct PansuOptions {
    /// Decreasing scales; at least three.
    pub t_schedule: Vec<f64>,
    /// Random probes in the unit Sum-norm ball, in addition to the coordinate probes.
    pub probes: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for PansuOptions {
    fn default() -> Self {
        PansuOptions {
            t_schedule: (2..=12).map(|k| 2f64.powi(-k)).collect(),
            probes: 32,
            seed: 0,
            tol: PANSU_TOL,
        }
    }
}

/// One row of the convergence table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PansuSample {
    pub t: f64,
    /// `sup_y |D(y)⁻¹ F_t(y)|` in the Sum norm, `D` the final fit.
    pub sup_deviation: f64,
    /// `sup_y |F_t(y) − D(y)|_max`, free of the square root on the center.
    pub coord_deviation: f64,
    /// Max-entry distance between the fit at this scale and the final fit.
    pub fit_drift: f64,
}

#[derive(Debug, Clone)]
pub struct PansuDerivativeEstimate {
    pub linmap: HLinMap,
    pub residuals: Vec<PansuSample>,
    /// Drift of the fit between the two smallest scales.
    pub block_drift: f64,
    /// Block drift below tolerance, with a monotone tail (10% slack) unless the
    /// deviation is already below tolerance.
    pub converged: bool,
    /// Sup-deviation at the smallest scale below tolerance.
    pub deviation_converged: bool,
}

#[derive(Serialize)]
struct EstimateWire {
    #[serde(flatten)]
    linmap: HLinMapWire,
    residuals: Vec<[f64; 2]>,
    coord_residuals: Vec<[f64; 2]>,
    fit_drift: Vec<[f64; 2]>,
    block_drift: f64,
    converged: bool,
    deviation_converged: bool,
}

impl Serialize for PansuDerivativeEstimate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EstimateWire {
            linmap: HLinMapWire::from(&self.linmap),
            residuals: self.residuals.iter().map(|r| [r.t, r.sup_deviation]).collect(),
            coord_residuals: self.residuals.iter().map(|r| [r.t, r.coord_deviation]).collect(),
            fit_drift: self.residuals.iter().map(|r| [r.t, r.fit_drift]).collect(),
            block_drift: self.block_drift,
            converged: self.converged,
            deviation_converged: self.deviation_converged,
        }
        .serialize(s)
    }
}

/// Coordinate probes followed by seeded probes in the unit Sum-norm ball.
pub fn probe_set(n: usize, count: usize, seed: u64) -> Vec<HPoint> {
    let dim = 2 * n;
    let mut out = Vec::with_capacity(dim + 1 + count);
    for i in 0..dim {
        let mut x = vec![0.0; dim];
        x[i] = 1.0;
        out.push(HPoint { x, xbar: 0.0 });
    }
    out.push(HPoint::central(n, 1.0));
    let mut r = rng::seeded(seed);
    while out.len() < dim + 1 + count {
        let x = rng::uniform_vec(&mut r, &vec![-1.0; dim], &vec![1.0; dim]);
        let xbar = rng::uniform_in(&mut r, -1.0, 1.0);
        let p = HPoint { x, xbar };
        if sum_norm(&p) <= 1.0 {
            out.push(p);
        }
    }
    out
}

/// Graded fit from antisymmetrized samples: `A` by least squares over all probes,
/// `a` from the purely central probes.
fn fit_linmap(probes: &[HPoint], plus: &[HPoint], minus: &[HPoint]) -> Result<HLinMap> {
    let dim = probes[0].x.len();
    let m = probes.len();
    let mut xin = DMatrix::zeros(m, dim);
    let mut yout = DMatrix::zeros(m, dim);
    let mut centers = Vec::new();
    for (k, ((y, p), q)) in probes.iter().zip(plus).zip(minus).enumerate() {
        for d in 0..dim {
            xin[(k, d)] = y.x[d];
            yout[(k, d)] = 0.5 * (p.x[d] - q.x[d]);
        }
        if y.x.iter().all(|v| *v == 0.0) && y.xbar != 0.0 {
            centers.push(0.5 * (p.xbar - q.xbar) / y.xbar);
        }
    }
    if centers.is_empty() {
        return Err(Error::Degenerate("no central probe for the center multiplier".into()));
    }
    let svd = xin.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-8 * smax) {
        return Err(Error::Degenerate("probe set does not span the horizontal layer".into()));
    }
    let sol = svd
        .solve(&yout, 1e-12 * smax)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let a = centers.iter().sum::<f64>() / centers.len() as f64;
    HLinMap::new(sol.transpose(), a)
}

/// Fit the Pansu derivative of `f` at `x` and tabulate the convergence of `F_t`.
pub fn estimate_pansu_derivative<F>(f: &F, x: &HPoint, opts: &PansuOptions) -> Result<PansuDerivativeEstimate>
where
    F: Fn(&HPoint) -> Result<HPoint>,
{
    let ts = &opts.t_schedule;
    if ts.len() < 3 {
        return Err(Error::param("t_schedule", "need at least three scales"));
    }
    if ts.iter().any(|t| !(*t > 0.0)) || ts.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::param("t_schedule", "scales must be positive and decreasing"));
    }
    let n = x.n();
    match estimate_with_probes(f, x, opts, probe_set(n, opts.probes, opts.seed)) {
        Err(Error::Degenerate(_)) => {
            let probes = probe_set(n, opts.probes, rng::derive_seed(opts.seed, 1));
            estimate_with_probes(f, x, opts, probes)
        }
        other => other,
    }
}

fn estimate_with_probes<F>(
    f: &F,
    x: &HPoint,
    opts: &PansuOptions,
    probes: Vec<HPoint>,
) -> Result<PansuDerivativeEstimate>
where
    F: Fn(&HPoint) -> Result<HPoint>,
{
    let mut fits = Vec::new();
    let mut values = Vec::new();
    for &t in &opts.t_schedule {
        let dm = difference_map(f, x, t)?;
        let plus: Vec<HPoint> = probes.iter().map(|y| dm.eval(y)).collect::<Result<_>>()?;
        let minus: Vec<HPoint> =
            probes.iter().map(|y| dm.eval(&group_inv(y))).collect::<Result<_>>()?;
        fits.push(fit_linmap(&probes, &plus, &minus)?);
        values.push(plus);
    }
    finish(&opts.t_schedule, &probes, fits, values, opts.tol)
}

fn finish(
    ts: &[f64],
    probes: &[HPoint],
    fits: Vec<HLinMap>,
    values: Vec<Vec<HPoint>>,
    tol: f64,
) -> Result<PansuDerivativeEstimate> {
    let last = fits.last().expect("non-empty schedule").clone();
    let mut residuals = Vec::with_capacity(ts.len());
    for ((t, fit), vals) in ts.iter().zip(&fits).zip(&values) {
        let sup = probes
            .iter()
            .zip(vals)
            .map(|(y, v)| sum_norm(&mul_unchecked(&group_inv(&last.apply(y)), v)))
            .fold(0.0, f64::max);
        let coord = probes.iter().zip(vals).map(|(y, v)| last.apply(y).coord_dist(v)).fold(0.0, f64::max);
        residuals.push(PansuSample {
            t: *t,
            sup_deviation: sup,
            coord_deviation: coord,
            fit_drift: fit.max_abs_diff(&last),
        });
    }
    let k = fits.len();
    let block_drift = fits[k - 1].max_abs_diff(&fits[k - 2]);
    let tail = &residuals[residuals.len().saturating_sub(4)..];
    let monotone = tail.windows(2).all(|w| w[1].sup_deviation <= 1.1 * w[0].sup_deviation + 1e-15);
    let deviation_converged = residuals[k - 1].sup_deviation < tol;
    Ok(PansuDerivativeEstimate {
        linmap: last,
        residuals,
        block_drift,
        converged: (monotone || deviation_converged) && block_drift <= tol,
        deviation_converged,
    })
}

/// Pansu derivative of a curve `s ↦ c(s)` in H(n) at `s = t`.
#[derive(Debug, Clone, Serialize)]
pub struct CurveDerivative {
    pub horizontal: bool,
    /// `Dc(t)·1 = (ċ(t), 0)` when horizontal.
    pub derivative: HPoint,
    /// `x̄̇ − ½ω(c, ċ)`.
    pub defect: f64,
}

impl CurveDerivative {
    pub fn apply(&self, z: f64) -> HPoint {
        HPoint { x: self.derivative.x.iter().map(|v| z * v).collect(), xbar: 0.0 }
    }
}

/// Central differences with step `h`; horizontal iff `|defect| ≤ tol`.
pub fn curve_pansu_derivative<C>(c: C, t: f64, h: f64, tol: f64) -> Result<CurveDerivative>
where
    C: Fn(f64) -> HPoint,
{
    if !(h > 0.0) {
        return Err(Error::param("h", "step must be positive"));
    }
    let (a, m, b) = (c(t - h), c(t), c(t + h));
    let vel: Vec<f64> = a.x.iter().zip(&b.x).map(|(p, q)| (q - p) / (2.0 * h)).collect();
    let zdot = (b.xbar - a.xbar) / (2.0 * h);
    let defect = zdot - 0.5 * omega(&m.x, &vel);
    if !defect.is_finite() || vel.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("curve derivative"));
    }
    let horizontal = defect.abs() <= tol;
    let derivative = if horizontal {
        HPoint { x: vel, xbar: 0.0 }
    } else {
        HPoint::identity(m.n())
    };
    Ok(CurveDerivative { horizontal, derivative, defect })
}

/// `∂f/∂x·y + ½ω(x, y)·∂f/∂x̄` from a classical gradient at `p`.
pub fn functional_pansu_derivative(grad_x: &[f64], grad_xbar: f64, p: &HPoint, y: &HPoint) -> Result<f64> {
    if grad_x.len() != p.x.len() || y.x.len() != p.x.len() {
        return Err(Error::DimensionMismatch { expected: p.x.len(), got: y.x.len() });
    }
    let lin: f64 = grad_x.iter().zip(&y.x).map(|(g, v)| g * v).sum();
    Ok(lin + 0.5 * omega(&p.x, &y.x) * grad_xbar)
}

/// Same formula with the gradient taken by central differences of step `h`.
pub fn functional_pansu_derivative_fd<G>(f: G, p: &HPoint, y: &HPoint, h: f64) -> Result<f64>
where
    G: Fn(&HPoint) -> f64,
{
    let mut grad = vec![0.0; p.x.len()];
    for (i, g) in grad.iter_mut().enumerate() {
        let mut a = p.clone();
        let mut b = p.clone();
        a.x[i] += h;
        b.x[i] -= h;
        *g = (f(&a) - f(&b)) / (2.0 * h);
    }
    let mut a = p.clone();
    let mut b = p.clone();
    a.xbar += h;
    b.xbar -= h;
    let gz = (f(&a) - f(&b)) / (2.0 * h);
    functional_pansu_derivative(&grad, gz, p, y)
}

/// `(f(p δ_t y) − f(p δ_t y⁻¹)) / 2t`, the symmetric Pansu difference quotient.
pub fn functional_difference_quotient<G>(f: G, p: &HPoint, y: &HPoint, t: f64) -> f64
where
    G: Fn(&HPoint) -> f64,
{
    let fwd = mul_unchecked(p, &dilate_unchecked(t, y));
    let bwd = mul_unchecked(p, &dilate_unchecked(t, &group_inv(y)));
    (f(&fwd) - f(&bwd)) / (2.0 * t)
}

/// One row of a convergence study for a scalar functional.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FunctionalStudyRow {
    pub t: f64,
    /// `(f(p δ_t y) − f(p)) / t`.
    pub pansu_quotient: f64,
    /// `(f(p + t e_c) − f(p)) / t` and the same from below, along the center axis.
    pub center_quotient_up: f64,
    pub center_quotient_down: f64,
}

pub fn functional_study<G>(f: G, p: &HPoint, y: &HPoint, ts: &[f64]) -> Vec<FunctionalStudyRow>
where
    G: Fn(&HPoint) -> f64,
{
    let f0 = f(p);
    ts.iter()
        .map(|&t| {
            let moved = mul_unchecked(p, &dilate_unchecked(t, y));
            let mut up = p.clone();
            up.xbar += t;
            let mut down = p.clone();
            down.xbar -= t;
            FunctionalStudyRow {
                t,
                pansu_quotient: (f(&moved) - f0) / t,
                center_quotient_up: (f(&up) - f0) / t,
                center_quotient_down: (f0 - f(&down)) / t,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heis::{dilate, group_mul};

    fn rot(theta: f64) -> DMatrix<f64> {
        let (s, c) = theta.sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    }

    #[test]
    fn identity_and_translation_give_identity() {
        let x = HPoint::new(vec![0.3, -0.2], 0.7).unwrap();
        let y = HPoint::new(vec![0.5, 0.1], -0.4).unwrap();
        let id = |p: &HPoint| Ok(p.clone());
        assert!(difference_map(&id, &x, 0.1).unwrap().eval(&y).unwrap().coord_dist(&y) < 1e-13);
        let g = HPoint::new(vec![1.0, 2.0], 3.0).unwrap();
        let tr = move |p: &HPoint| group_mul(&g, p);
        assert!(difference_map(&tr, &x, 0.01).unwrap().eval(&y).unwrap().coord_dist(&y) < 1e-10);
    }

    #[test]
    fn dilation_at_origin() {
        let d2 = |p: &HPoint| dilate(2.0, p);
        let y = HPoint::new(vec![0.5, 0.1], -0.4).unwrap();
        let dm = difference_map(&d2, &HPoint::identity(1), 0.25).unwrap();
        assert!(dm.eval(&y).unwrap().coord_dist(&dilate(2.0, &y).unwrap()) < 1e-14);
        assert!(dm.eval(&HPoint::identity(1)).unwrap().coord_dist(&HPoint::identity(1)) == 0.0);
    }

    #[test]
    fn linear_symplectic_map_is_its_own_derivative() {
        let m = HLinMap::new(rot(0.7), 1.0).unwrap();
        let f = |p: &HPoint| Ok(m.apply(p));
        let x = HPoint::new(vec![0.4, -1.1], 0.2).unwrap();
        let est = estimate_pansu_derivative(&f, &x, &PansuOptions::default()).unwrap();
        assert!(est.linmap.max_abs_diff(&m) < 1e-9);
        // center cancellation costs ~ε/t² in F_t, visible only at the smallest scales
        assert!(est.residuals.iter().filter(|r| r.t >= 1e-3).all(|r| r.coord_deviation < 1e-9));
        assert!(est.residuals.iter().all(|r| r.coord_deviation < 1e-8));
        assert!(est.residuals.iter().all(|r| r.sup_deviation < 1e-4));
        assert!(est.converged && est.deviation_converged);
    }

    #[test]
    fn wrong_codomain_rejected() {
        let f = |p: &HPoint| Ok(HPoint { x: vec![p.xbar], xbar: 0.0 });
        let x = HPoint::identity(1);
        assert!(matches!(
            estimate_pansu_derivative(&f, &x, &PansuOptions::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn short_schedule_rejected() {
        let f = |p: &HPoint| Ok(p.clone());
        let opts = PansuOptions { t_schedule: vec![0.5, 0.25], ..Default::default() };
        assert!(estimate_pansu_derivative(&f, &HPoint::identity(1), &opts).is_err());
    }

    #[test]
    fn curve_derivatives() {
        let lift = |t: f64| HPoint { x: vec![t.cos(), t.sin()], xbar: 0.5 * t };
        let d = curve_pansu_derivative(lift, 0.3, 1e-5, 1e-8).unwrap();
        assert!(d.horizontal);
        assert!((d.derivative.x[0] + 0.3f64.sin()).abs() < 1e-9);
        assert!((d.derivative.x[1] - 0.3f64.cos()).abs() < 1e-9);

        let bad = |t: f64| HPoint { x: vec![t, 0.0], xbar: t };
        let d = curve_pansu_derivative(bad, 0.5, 1e-5, 1e-8).unwrap();
        assert!(!d.horizontal);
        assert!((d.defect - 1.0).abs() < 1e-9);

        let constant = |_t: f64| HPoint::new(vec![1.0, 2.0], 3.0).unwrap();
        let d = curve_pansu_derivative(constant, 0.0, 1e-5, 1e-8).unwrap();
        assert!(d.horizontal && d.apply(2.0).x == vec![0.0, 0.0]);
    }

    #[test]
    fn functional_formula() {
        let p = HPoint::new(vec![1.0, 0.0], 0.0).unwrap();
        let y = HPoint::new(vec![0.0, 1.0], 0.0).unwrap();
        assert_eq!(functional_pansu_derivative(&[0.0, 0.0], 1.0, &p, &y).unwrap(), 0.5);
        let y1 = HPoint::new(vec![1.0, 0.0], 0.0).unwrap();
        let q = HPoint::new(vec![0.3, 0.9], -2.0).unwrap();
        assert_eq!(functional_pansu_derivative(&[1.0, 0.0], 0.0, &q, &y1).unwrap(), 1.0);
    }

    #[test]
    fn squared_norm_at_origin() {
        let f = |p: &HPoint| sum_norm(p).powi(2);
        let y = HPoint::new(vec![0.6, 0.0], 0.3).unwrap();
        let rows = functional_study(f, &HPoint::identity(1), &y, &[1e-2, 1e-4, 1e-6]);
        // Pansu quotient t·f(y) → 0, one-sided center quotients stay at ±1
        assert!(rows[2].pansu_quotient.abs() < 1e-5);
        assert!((rows[2].center_quotient_up - 1.0).abs() < 1e-12);
        assert!((rows[2].center_quotient_down + 1.0).abs() < 1e-12);
    }
}
