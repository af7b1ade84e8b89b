//! Sub-Riemannian geodesics of H(n) from the origin.
//!
//! The horizontal projection of a geodesic from `0` to `(x, z)` is a circular arc
//! in the complex line spanned by `x` and `Jx`. If the arc turns through the angle
//! `θ` and the chord has length `ρ = |x|`, the lift gains the area between arc and
//! chord:
//!
//! ```text
//! z / ρ² = (θ − sin θ) / (4 (1 − cos θ)),   L = ρ θ / (2 sin(θ/2)).
//! ```
//!
//! The left side increases from 0 to ∞ on `(0, 2π)`; `θ` is found by Brent's method.
//! Central targets (`ρ = 0`) are full circles with `L = 2√(π|z|)`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::heis::{apply_j, HPoint};
use crate::roots::{brent, RootOptions};

/// `φ − sin φ` without cancellation near 0.
pub(crate) fn sub_sin(phi: f64) -> f64 {
    if phi.abs() < 1e-2 {
        let p2 = phi * phi;
        phi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0 * (1.0 - p2 / 72.0)))
    } else {
        phi - phi.sin()
    }
}

/// `2 sin(φ/2) / φ`, equal to 1 at 0.
fn chord_ratio(phi: f64) -> f64 {
    if phi.abs() < 1e-8 {
        1.0 - phi * phi / 24.0
    } else {
        2.0 * (0.5 * phi).sin() / phi
    }
}

/// Area-to-chord² ratio of an arc turning through `θ ∈ [0, 2π)`.
fn area_ratio(theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let s = (0.5 * theta).sin();
    sub_sin(theta) / (8.0 * s * s)
}

/// Closed-form geodesic parameters from the origin to `g`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ArcParams {
    pub length: f64,
    /// Signed turning angle; positive arcs run counterclockwise in the (x, Jx) plane.
    pub theta: f64,
    pub chord: f64,
}

pub(crate) fn arc_params(g: &HPoint) -> Result<ArcParams> {
    let rho = g.x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let z = g.xbar;
    if z == 0.0 {
        return Ok(ArcParams { length: rho, theta: 0.0, chord: rho });
    }
    if rho == 0.0 {
        let theta = 2.0 * PI * z.signum();
        return Ok(ArcParams { length: 2.0 * (PI * z.abs()).sqrt(), theta, chord: 0.0 });
    }
    let k = z.abs() / (rho * rho);
    let hi = if k > 0.1 {
        // μ(2π − δ) ≈ π/δ²
        2.0 * PI - 0.5 * (PI / k).sqrt().min(2.0)
    } else {
        (24.0 * k).clamp(1e-300, 2.0 * PI - 1.0)
    };
    let hi = if area_ratio(hi) < k { 2.0 * PI - 1e-12 } else { hi };
    let root = brent(
        |t| area_ratio(t) / k - 1.0,
        0.0,
        hi,
        RootOptions { xtol: 1e-16, ftol: 1e-12, max_iter: 300 },
    )?;
    let theta = root.x;
    let length = rho / chord_ratio(theta);
    Ok(ArcParams { length, theta: theta * z.signum(), chord: rho })
}

/// Point at parameter `s ∈ [0, 1]` of the geodesic from the origin to `g`.
pub(crate) struct ArcCurve {
    params: ArcParams,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl ArcCurve {
    pub fn new(g: &HPoint, params: ArcParams) -> Self {
        let dim = g.x.len();
        let u = if params.chord > 0.0 {
            g.x.iter().map(|c| c / params.chord).collect()
        } else {
            let mut e = vec![0.0; dim];
            e[0] = 1.0;
            e
        };
        let v = apply_j(&u);
        ArcCurve { params, u, v }
    }

    pub fn at(&self, s: f64) -> HPoint {
        let ArcParams { length, theta, .. } = self.params;
        // c(s) = L e^{i(α + θs/2)} · s · chord_ratio(θs), α = −θ/2
        let phase = -0.5 * theta + 0.5 * theta * s;
        let radial = length * s * chord_ratio(theta * s);
        let (a, b) = (radial * phase.cos(), radial * phase.sin());
        let x = self.u.iter().zip(&self.v).map(|(u, v)| a * u + b * v).collect();
        let xbar = if theta == 0.0 {
            0.0
        } else {
            theta.signum() * length * length * sub_sin(theta.abs() * s) / (2.0 * theta * theta)
        };
        HPoint { x, xbar }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_ratio_small_angle() {
        // μ(θ) ≈ θ/12 near 0
        assert!((area_ratio(1e-6) - 1e-6 / 12.0).abs() < 1e-18);
        assert!(area_ratio(2.0 * PI - 1e-6) > 1e11);
    }

    #[test]
    fn central_target_is_full_circle() {
        let g = HPoint::central(1, PI);
        let a = arc_params(&g).unwrap();
        assert!((a.length - 2.0 * PI).abs() < 1e-14);
        let c = ArcCurve::new(&g, a);
        let end = c.at(1.0);
        assert!(end.coord_dist(&g) < 1e-12);
    }

    #[test]
    fn arc_hits_endpoint() {
        for (x, z) in [([1.0, 0.5], 0.3), ([-0.2, 0.7], -2.0), ([0.3, 0.1], 1e-9), ([2.0, -1.0], 40.0)] {
            let g = HPoint::new(x.to_vec(), z).unwrap();
            let a = arc_params(&g).unwrap();
            let end = ArcCurve::new(&g, a).at(1.0);
            assert!(end.coord_dist(&g) < 1e-9 * (1.0 + z.abs()), "{g:?} -> {end:?}");
        }
    }
}
