use serde::Serialize;

use super::field::HamiltonianField;
use crate::error::{Error, Result};
use crate::heis::AxisBox;
use crate::lifting::{symplectic_defect, PlanarMap};

pub const DEFAULT_STEPS_PER_UNIT: usize = 2048;

/// One classical RK4 step of `ẋ = −J∇H(t, x)`.
pub fn rk4_step(h: &HamiltonianField, t: f64, x: &mut [f64], dt: f64) {
    let k1 = h.vector_field(t, x);
    let y: Vec<f64> = x.iter().zip(&k1).map(|(a, k)| a + 0.5 * dt * k).collect();
    let k2 = h.vector_field(t + 0.5 * dt, &y);
    let y: Vec<f64> = x.iter().zip(&k2).map(|(a, k)| a + 0.5 * dt * k).collect();
    let k3 = h.vector_field(t + 0.5 * dt, &y);
    let y: Vec<f64> = x.iter().zip(&k3).map(|(a, k)| a + dt * k).collect();
    let k4 = h.vector_field(t + dt, &y);
    for i in 0..x.len() {
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// RK4 step of the flow together with its linearization applied to `v`.
pub(crate) fn rk4_step_tangent(h: &HamiltonianField, t: f64, x: &mut [f64], v: &mut [f64], dt: f64) {
    let tm = t + 0.5 * dt;
    let k1 = h.vector_field(t, x);
    let l1 = h.linearized(t, x, v);
    let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, k)| a + 0.5 * dt * k).collect();
    let v2: Vec<f64> = v.iter().zip(&l1).map(|(a, k)| a + 0.5 * dt * k).collect();
    let k2 = h.vector_field(tm, &x2);
    let l2 = h.linearized(tm, &x2, &v2);
    let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, k)| a + 0.5 * dt * k).collect();
    let v3: Vec<f64> = v.iter().zip(&l2).map(|(a, k)| a + 0.5 * dt * k).collect();
    let k3 = h.vector_field(tm, &x3);
    let l3 = h.linearized(tm, &x3, &v3);
    let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, k)| a + dt * k).collect();
    let v4: Vec<f64> = v.iter().zip(&l3).map(|(a, k)| a + dt * k).collect();
    let k4 = h.vector_field(t + dt, &x4);
    let l4 = h.linearized(t + dt, &x4, &v4);
    for i in 0..x.len() {
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        v[i] += dt / 6.0 * (l1[i] + 2.0 * l2[i] + 2.0 * l3[i] + l4[i]);
    }
}

fn check_state(x: &[f64], t: f64, safety: Option<&AxisBox>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("flow state"));
    }
    if let Some(b) = safety {
        if !b.contains(x) {
            return Err(Error::EscapedSafetyBox { t });
        }
    }
    Ok(())
}

/// Samples `x(t_0), …, x(t_steps)` of one trajectory from `t0` to `t1`.
pub fn trajectory(h: &HamiltonianField, x0: &[f64], t0: f64, t1: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
    if steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    let dt = (t1 - t0) / steps as f64;
    let mut x = x0.to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x.clone());
    for k in 0..steps {
        rk4_step(h, t0 + k as f64 * dt, &mut x, dt);
        check_state(&x, t0 + (k + 1) as f64 * dt, None)?;
        out.push(x.clone());
    }
    Ok(out)
}

/// `φ_{t0→t1}(x0)`.
pub fn flow_point(h: &HamiltonianField, x0: &[f64], t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    let dt = (t1 - t0) / steps as f64;
    let mut x = x0.to_vec();
    for k in 0..steps {
        rk4_step(h, t0 + k as f64 * dt, &mut x, dt);
    }
    check_state(&x, t1, None)?;
    Ok(x)
}

/// The time-`t0 → t1` map as a [`PlanarMap`]; the inverse integrates backwards.
pub fn flow_map(h: &HamiltonianField, t0: f64, t1: f64, steps: usize) -> Result<PlanarMap> {
    if steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    let (hf, hb) = (h.clone(), h.clone());
    let map = PlanarMap::new(h.dim(), move |x: &[f64]| {
        flow_point(&hf, x, t0, t1, steps).unwrap_or_else(|_| vec![f64::NAN; x.len()])
    })?
    .with_inverse(move |y: &[f64]| flow_point(&hb, y, t1, t0, steps));
    map.with_support(h.support.clone())
}

#[derive(Debug, Clone)]
pub struct FlowOptions {
    pub steps: usize,
    /// Keep every `store_every`-th step (the final time is always kept).
    pub store_every: usize,
    pub safety_box: Option<AxisBox>,
    /// Cloud points whose Jacobian is checked with perturbed trajectories.
    pub symplecticity_probes: usize,
    /// Re-integrate with half the steps for a Richardson error estimate.
    pub error_estimate: bool,
}

impl FlowOptions {
    pub fn for_horizon(t_end: f64) -> Self {
        FlowOptions {
            steps: ((t_end.abs() * DEFAULT_STEPS_PER_UNIT as f64).ceil() as usize).max(1),
            store_every: 1,
            safety_box: None,
            symplecticity_probes: 4,
            error_estimate: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub dt: f64,
    /// Richardson estimate `|φ_h − φ_{2h}|/15` at the final time.
    pub max_step_error: f64,
    /// `|DᵀJD − J|_max` per stored time over the probe points.
    pub symplecticity_residual: Vec<f64>,
}

impl IntegratorStats {
    pub fn max_symplecticity_residual(&self) -> f64 {
        self.symplecticity_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// A sampled flow: `points[k][i] = φ_{times[k]}(cloud[i])`.
#[derive(Debug, Clone, Serialize)]
pub struct FlowGrid {
    pub times: Vec<f64>,
    pub cloud: Vec<Vec<f64>>,
    pub points: Vec<Vec<Vec<f64>>>,
    pub stats: IntegratorStats,
}

impl FlowGrid {
    pub fn final_points(&self) -> &[Vec<f64>] {
        self.points.last().expect("non-empty flow grid")
    }

    /// Trajectory of one cloud point over the stored times.
    pub fn trajectory_of(&self, i: usize) -> Vec<Vec<f64>> {
        self.points.iter().map(|slice| slice[i].clone()).collect()
    }

    /// CSV rows `id, x1..x2n` for stored slice `k`.
    pub fn slice_rows(&self, k: usize) -> Vec<Vec<f64>> {
        self.points[k]
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let mut row = vec![i as f64];
                row.extend(x);
                row
            })
            .collect()
    }
}

/// Integrate `cloud` over `[0, t_end]`.
pub fn integrate_flow(h: &HamiltonianField, cloud: &[Vec<f64>], t_end: f64, opts: &FlowOptions) -> Result<FlowGrid> {
    if opts.steps == 0 || opts.store_every == 0 {
        return Err(Error::param("steps", "step count and storage stride must be at least 1"));
    }
    let dim = h.dim();
    if let Some(bad) = cloud.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    let steps = opts.steps;
    let dt = t_end / steps as f64;
    let probes: Vec<usize> = (0..cloud.len().min(opts.symplecticity_probes)).collect();

    // perturbed copies for the finite-difference Jacobian
    let mut perturbed: Vec<(usize, usize, f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for &i in &probes {
        for d in 0..dim {
            let hstep = 1e-5 * cloud[i][d].abs().max(1.0);
            let mut a = cloud[i].clone();
            let mut b = cloud[i].clone();
            a[d] += hstep;
            b[d] -= hstep;
            perturbed.push((i, d, hstep, a, b));
        }
    }

    let mut state: Vec<Vec<f64>> = cloud.to_vec();
    let mut times = vec![0.0];
    let mut points = vec![state.clone()];
    let mut sym = vec![jacobian_defect(&perturbed, &probes, dim)];
    for k in 0..steps {
        let t = k as f64 * dt;
        for x in state.iter_mut() {
            rk4_step(h, t, x, dt);
            check_state(x, t + dt, opts.safety_box.as_ref())?;
        }
        for (_, _, _, a, b) in perturbed.iter_mut() {
            rk4_step(h, t, a, dt);
            rk4_step(h, t, b, dt);
        }
        if (k + 1) % opts.store_every == 0 || k + 1 == steps {
            times.push(if k + 1 == steps { t_end } else { (k + 1) as f64 * dt });
            points.push(state.clone());
            sym.push(jacobian_defect(&perturbed, &probes, dim));
        }
    }

    let max_step_error = if opts.error_estimate && steps >= 2 {
        let coarse = steps / 2;
        let mut worst = 0.0f64;
        for (x0, fine) in cloud.iter().zip(&state) {
            let c = flow_point(h, x0, 0.0, t_end, coarse)?;
            worst = c.iter().zip(fine).fold(worst, |m, (a, b)| m.max((a - b).abs()));
        }
        worst / 15.0
    } else {
        f64::NAN
    };

    Ok(FlowGrid {
        times,
        cloud: cloud.to_vec(),
        points,
        stats: IntegratorStats { steps, dt, max_step_error, symplecticity_residual: sym },
    })
}

fn jacobian_defect(perturbed: &[(usize, usize, f64, Vec<f64>, Vec<f64>)], probes: &[usize], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for &i in probes {
        let mut d = nalgebra::DMatrix::zeros(dim, dim);
        for (pi, col, hstep, a, b) in perturbed {
            if *pi == i {
                for r in 0..dim {
                    d[(r, *col)] = (a[r] - b[r]) / (2.0 * hstep);
                }
            }
        }
        worst = worst.max(symplectic_defect(&d));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::field::{Builtin, TimeProfile};
    use std::f64::consts::PI;

    fn harmonic() -> HamiltonianField {
        HamiltonianField::from_builtin(
            &Builtin::Harmonic { n: 1, scale: 1.0, inner: 2.0, outer: 3.0 },
            TimeProfile::Constant,
        )
        .unwrap()
    }

    #[test]
    fn quarter_rotation() {
        let fg = integrate_flow(&harmonic(), &[vec![1.0, 0.0]], PI / 2.0, &FlowOptions {
            steps: 1000,
            ..FlowOptions::for_horizon(PI / 2.0)
        })
        .unwrap();
        let x = &fg.final_points()[0];
        assert!((x[0] - 0.0).abs() < 1e-8 && (x[1] + 1.0).abs() < 1e-8, "{x:?}");
        assert!(fg.stats.max_symplecticity_residual() < 1e-6);
        assert!(fg.stats.max_step_error < 1e-10);
    }

    #[test]
    fn zero_field_is_identity() {
        let h = HamiltonianField::from_builtin(&Builtin::Zero { n: 1 }, TimeProfile::Constant).unwrap();
        let cloud = vec![vec![0.3, -2.0], vec![5.0, 1.0]];
        let fg = integrate_flow(&h, &cloud, 1.0, &FlowOptions::for_horizon(1.0)).unwrap();
        assert_eq!(fg.final_points(), &cloud[..]);
    }

    #[test]
    fn time_reversal_returns() {
        let h = HamiltonianField::from_builtin(
            &Builtin::Bump { center: vec![0.1, 0.0], radius: 1.0, amplitude: 1.0 },
            TimeProfile::Triangular,
        )
        .unwrap();
        let x0 = vec![0.3, 0.2];
        let x1 = flow_point(&h, &x0, 0.0, 1.0, 1000).unwrap();
        let back = flow_point(&h.time_reversed(1.0), &x1, 0.0, 1.0, 1000).unwrap();
        assert!((back[0] - x0[0]).abs() < 1e-7 && (back[1] - x0[1]).abs() < 1e-7);
        let m = flow_map(&h, 0.0, 1.0, 1000).unwrap();
        let inv = m.inverse(&x1).unwrap();
        assert!((inv[0] - x0[0]).abs() < 1e-7);
    }

    #[test]
    fn safety_box() {
        let h = HamiltonianField::from_builtin(
            &Builtin::Translation { center: vec![0.0, 0.0], speed: 5.0, inner: 1.0, outer: 2.0 },
            TimeProfile::Constant,
        )
        .unwrap();
        let opts = FlowOptions { safety_box: Some(AxisBox::cube(2, 0.5)), ..FlowOptions::for_horizon(1.0) };
        assert!(matches!(
            integrate_flow(&h, &[vec![0.0, 0.0]], 1.0, &opts),
            Err(Error::EscapedSafetyBox { .. })
        ));
    }
}
