//! Carnot–Carathéodory distance on H(n).
//!
//! Two solvers are shipped: the arc characterization of geodesics ([`Method::ClosedForm`])
//! and a discretized length minimization ([`Method::DirectOptimization`]) that only
//! knows the definition of the distance. The second one is the oracle for the first.

mod closed_form;
mod curve;
mod oracle;

use serde::{Deserialize, Serialize};

pub use curve::HorizontalCurve;
pub use oracle::OracleOptions;

use crate::error::{Error, Result};
use crate::heis::{group_inv, mul_unchecked, HPoint};
use crate::rng;

/// Vertical reach padding of the rejection-sampling box.
pub const BALL_BOX_PAD: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    DirectOptimization,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub method: Method,
    /// Samples along the returned curve (closed form) / polygon segments (oracle).
    pub segments: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl SolverOptions {
    pub fn closed_form() -> Self {
        SolverOptions { method: Method::ClosedForm, segments: 64, restarts: 8, seed: 0 }
    }

    pub fn direct(seed: u64) -> Self {
        SolverOptions { method: Method::DirectOptimization, segments: 64, restarts: 8, seed }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::closed_form()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicSolution {
    pub length: f64,
    /// Signed turning angle of the projected arc (closed form); 0 for the oracle.
    pub curvature_parameter: f64,
    pub curve: HorizontalCurve,
    pub method: Method,
    /// False when the oracle never met the endpoint constraint (best effort returned).
    pub converged: bool,
    pub endpoint_error: f64,
}

/// `d(p, q)` with a geodesic, computed as `d(0, p⁻¹q)` and translated back by `p`.
pub fn cc_distance(p: &HPoint, q: &HPoint, opts: SolverOptions) -> Result<GeodesicSolution> {
    if p.x.len() != q.x.len() {
        return Err(Error::DimensionMismatch { expected: p.x.len(), got: q.x.len() });
    }
    if opts.segments == 0 {
        return Err(Error::param("segments", "must be positive"));
    }
    let g = mul_unchecked(&group_inv(p), q);
    let k = opts.segments;
    let times: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    let (length, theta, local, converged) = match opts.method {
        Method::ClosedForm => {
            let params = closed_form::arc_params(&g)?;
            let arc = closed_form::ArcCurve::new(&g, params);
            let pts: Vec<HPoint> = times.iter().map(|s| arc.at(*s)).collect();
            (params.length, params.theta, pts, true)
        }
        Method::DirectOptimization => {
            let res = oracle::optimize_from_origin(
                &g,
                OracleOptions { segments: k, restarts: opts.restarts, seed: opts.seed },
            );
            let mut pts = Vec::with_capacity(k + 1);
            let mut xbar = 0.0;
            for (i, v) in res.vertices.iter().enumerate() {
                if i > 0 {
                    xbar += 0.5 * crate::heis::omega(&res.vertices[i - 1], v);
                }
                pts.push(HPoint { x: v.clone(), xbar });
            }
            (res.length, 0.0, pts, res.converged)
        }
    };
    let endpoint_error = local.last().map_or(0.0, |e| e.coord_dist(&g));
    let points = local.iter().map(|l| mul_unchecked(p, l)).collect();
    Ok(GeodesicSolution {
        length,
        curvature_parameter: theta,
        curve: HorizontalCurve::new(times, points)?,
        method: opts.method,
        converged,
        endpoint_error,
    })
}

/// `|p|_d = d(0, p)`, closed form, without building the curve.
pub fn cc_norm(p: &HPoint) -> Result<f64> {
    Ok(closed_form::arc_params(p)?.length)
}

/// Rejection sample of the CC ball of radius `r` centered at the origin.
#[derive(Debug, Clone)]
pub struct BallSample {
    pub points: Vec<HPoint>,
    pub attempts: usize,
    /// Lebesgue volume of the proposal box.
    pub box_volume: f64,
}

impl BallSample {
    pub fn volume_estimate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.box_volume * self.points.len() as f64 / self.attempts as f64
        }
    }
}

pub fn cc_ball_sample(n: usize, r: f64, count: usize, seed: u64) -> Result<Vec<HPoint>> {
    Ok(cc_ball_sample_with_stats(n, r, count, seed)?.points)
}

pub fn cc_ball_sample_with_stats(n: usize, r: f64, count: usize, seed: u64) -> Result<BallSample> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::param("r", "radius must be positive"));
    }
    if n == 0 {
        return Err(Error::param("n", "must be positive"));
    }
    let zmax = r * r / (4.0 * std::f64::consts::PI) * BALL_BOX_PAD;
    let box_volume = unit_ball_volume(2 * n) * r.powi(2 * n as i32) * 2.0 * zmax;
    let mut rng = rng::seeded(seed);
    let mut points = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while points.len() < count {
        attempts += 1;
        let x = rng::uniform_ball(&mut rng, 2 * n, r);
        let xbar = rng::uniform_in(&mut rng, -zmax, zmax);
        let p = HPoint { x, xbar };
        if cc_norm(&p)? <= r {
            points.push(p);
        }
        if attempts >= 1000 && (points.len() as f64) < 0.001 * attempts as f64 {
            return Err(Error::Degenerate(format!(
                "rejection rate above 0.999 after {attempts} attempts"
            )));
        }
    }
    Ok(BallSample { points, attempts, box_volume })
}

/// Volume of the Euclidean unit ball in R^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V_d = π^{d/2} / Γ(d/2 + 1), via the recursion V_d = 2π/d V_{d-2}
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn horizontal_segment() {
        let s = cc_distance(
            &HPoint::identity(1),
            &HPoint::new(vec![1.0, 0.0], 0.0).unwrap(),
            SolverOptions::closed_form(),
        )
        .unwrap();
        assert!((s.length - 1.0).abs() < 1e-15);
        assert!(s.curve.max_residual() < 1e-14);
    }

    #[test]
    fn vertical_target() {
        let s = cc_distance(&HPoint::identity(1), &HPoint::central(1, PI), SolverOptions::closed_form())
            .unwrap();
        assert!((s.length - 2.0 * PI).abs() < 1e-12);
        assert!((s.curvature_parameter - 2.0 * PI).abs() < 1e-12);
        assert!((s.curve.projected_length() - 2.0 * PI).abs() < 1e-2);
    }

    #[test]
    fn curve_is_horizontal_and_translated() {
        let p = HPoint::new(vec![0.5, -0.3, 0.2, 0.1], 0.4).unwrap();
        let q = HPoint::new(vec![-0.1, 0.8, 0.6, -0.7], -1.3).unwrap();
        let k = 64;
        let s = cc_distance(&p, &q, SolverOptions { segments: k, ..SolverOptions::closed_form() })
            .unwrap();
        assert!(s.curve.start().coord_dist(&p) < 1e-14);
        assert!(s.curve.end().coord_dist(&q) < 1e-10);
        assert!(s.curve.max_residual() <= 10.0 / (k * k) as f64);
        // arc length of the projection approximates the geodesic length
        assert!((s.curve.projected_length() - s.length).abs() / s.length < 1e-3);
    }

    #[test]
    fn oracle_agrees_on_examples() {
        let targets = [
            HPoint::central(1, PI),
            HPoint::new(vec![1.0, 0.0], 0.0).unwrap(),
            HPoint::new(vec![0.6, -0.3], 0.45).unwrap(),
            HPoint::new(vec![0.0, 0.2], -1.0).unwrap(),
        ];
        for g in &targets {
            let cf = cc_distance(&HPoint::identity(1), g, SolverOptions::closed_form()).unwrap();
            let op = cc_distance(&HPoint::identity(1), g, SolverOptions::direct(3)).unwrap();
            assert!(op.converged);
            let rel = (op.length - cf.length).abs() / cf.length;
            assert!(rel < 0.02, "{g:?}: {} vs {}", op.length, cf.length);
            assert!(op.length >= cf.length * (1.0 - 1e-9), "oracle shorter than geodesic");
            assert!(op.endpoint_error < 1e-6);
        }
    }

    #[test]
    fn ball_sampling() {
        assert!(cc_ball_sample(1, 1.0, 0, 1).unwrap().is_empty());
        let pts = cc_ball_sample(1, 1.0, 100, 7).unwrap();
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|p| cc_norm(p).unwrap() <= 1.000001));
        assert!(cc_ball_sample(1, 0.0, 1, 0).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }
}
