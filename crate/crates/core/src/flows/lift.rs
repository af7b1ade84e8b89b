//! The three lifts of a Hamiltonian flow, tabulated on a spatial grid.
//!
//! For each grid point `x` the table holds, at every stored time,
//! - the flow `φ_t(x)`,
//! - the horizontal gain `A_t(x) = ½∫₀ᵗ ω(φ_s, φ̇_s) ds` of the lifted trajectory (polygon rule),
//! - the vertical part `F_t(x)` of the lift of `φ_t`, integrated up the last axis from the
//!   lower face of the support using tangent trajectories `Dφ_t·v`.
//!
//! The vertical flow is `Λ_t = A_t − F_t`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::field::HamiltonianField;
use super::integrate::{rk4_step, rk4_step_tangent, DEFAULT_STEPS_PER_UNIT};
use crate::cc::HorizontalCurve;
use crate::error::{Error, Result};
use crate::heis::omega;
use crate::lifting::horizontal_lift;
use crate::quad::composite_unit;

use super::integrate::FlowGrid;

/// Sign in `Λ̇_t(x) = σ·H(t, φ_t(x))` under the fixed orientation `ẋ = −J∇H`.
pub const HAMILTON_SIGN: f64 = -1.0;

#[derive(Debug, Clone)]
pub struct LiftTableOptions {
    pub t_end: f64,
    pub steps: usize,
    pub store_every: usize,
    /// Longest Gauss panel (16 nodes) on a quadrature line.
    pub panel_length: f64,
    /// Grid points also integrated along the straight segment from the corner.
    pub witness: usize,
}

impl Default for LiftTableOptions {
    fn default() -> Self {
        LiftTableOptions {
            t_end: 1.0,
            steps: DEFAULT_STEPS_PER_UNIT,
            store_every: 1,
            panel_length: 0.15,
            witness: 2,
        }
    }
}

/// Per-time, per-point tabulation of the lifts; outer index is time.
#[derive(Debug, Clone, Serialize)]
pub struct LiftTable {
    pub times: Vec<f64>,
    pub grid: Vec<Vec<f64>>,
    /// Lower corner of the support box, where the vertical part is normalized to zero.
    pub anchor: Vec<f64>,
    pub phi: Vec<Vec<Vec<f64>>>,
    pub horizontal_gain: Vec<Vec<f64>>,
    pub vertical_part: Vec<Vec<f64>>,
    /// `H(t, φ_t(x))`.
    pub h_along: Vec<Vec<f64>>,
    /// `H(t, x)`.
    pub h_base: Vec<Vec<f64>>,
    /// Staircase-vs-straight-segment gap of `F_t` over witness points and times.
    pub path_residual: f64,
    pub steps: usize,
}

impl LiftTable {
    pub fn lambda(&self, k: usize, i: usize) -> f64 {
        self.horizontal_gain[k][i] - self.vertical_part[k][i]
    }
}

struct Schedule {
    steps: usize,
    every: usize,
    dt: f64,
    stored: usize,
}

impl Schedule {
    fn new(t_end: f64, steps: usize, every: usize) -> Self {
        let stored = 1 + steps / every + usize::from(steps % every != 0);
        Schedule { steps, every, dt: t_end / steps as f64, stored }
    }

    fn stores(&self, k: usize) -> bool {
        (k + 1) % self.every == 0 || k + 1 == self.steps
    }
}

/// `½[ω(φ_t(y), Dφ_t(y)v) − ω(y, v)]` at every stored time, zero when `y` is outside the support.
fn integrand(h: &HamiltonianField, sched: &Schedule, y0: &[f64], v: &[f64]) -> Option<Vec<f64>> {
    if !h.support.contains(y0) {
        return None;
    }
    let base = omega(y0, v);
    let mut out = vec![0.0; sched.stored];
    let (mut y, mut dv) = (y0.to_vec(), v.to_vec());
    let mut slot = 1;
    for k in 0..sched.steps {
        rk4_step_tangent(h, k as f64 * sched.dt, &mut y, &mut dv, sched.dt);
        if sched.stores(k) {
            out[slot] = 0.5 * (omega(&y, &dv) - base);
            slot += 1;
        }
    }
    Some(out)
}

fn panel_nodes(len: f64, panel_length: f64) -> Vec<(f64, f64)> {
    let panels = ((len / panel_length).ceil() as usize).max(1);
    composite_unit(panels)
}

/// `F_t` along the straight segment `from → to`.
fn segment_vertical(h: &HamiltonianField, sched: &Schedule, from: &[f64], to: &[f64], panel_length: f64) -> Vec<f64> {
    let v: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
    let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut acc = vec![0.0; sched.stored];
    if len == 0.0 {
        return acc;
    }
    for (s, w) in panel_nodes(len, panel_length) {
        let y: Vec<f64> = from.iter().zip(&v).map(|(a, d)| a + s * d).collect();
        if let Some(vals) = integrand(h, sched, &y, &v) {
            for (a, g) in acc.iter_mut().zip(vals) {
                *a += w * g;
            }
        }
    }
    acc
}

/// `F_t` for all points sharing their leading coordinates, integrated up the last axis
/// from the lower face of the support; returns `(index, series)` pairs.
fn line_vertical(
    h: &HamiltonianField,
    sched: &Schedule,
    grid: &[Vec<f64>],
    members: &[usize],
    panel_length: f64,
) -> Vec<(usize, Vec<f64>)> {
    let last = h.dim() - 1;
    let (lo, hi) = (h.support.lo[last], h.support.hi[last]);
    let mut order: Vec<usize> = members.to_vec();
    order.sort_by(|&a, &b| grid[a][last].total_cmp(&grid[b][last]));
    let mut e = vec![0.0; h.dim()];
    e[last] = 1.0;
    let mut acc = vec![0.0; sched.stored];
    let mut at = lo;
    let mut out = Vec::with_capacity(order.len());
    for i in order {
        let target = grid[i][last].clamp(lo, hi);
        if target > at {
            let len = target - at;
            for (s, w) in panel_nodes(len, panel_length) {
                let mut y = grid[i].clone();
                y[last] = at + s * len;
                if let Some(vals) = integrand(h, sched, &y, &e) {
                    for (a, g) in acc.iter_mut().zip(vals) {
                        *a += w * len * g;
                    }
                }
            }
            at = target;
        }
        out.push((i, acc.clone()));
    }
    out
}

/// Tabulate flow, horizontal gain and vertical part on `grid`.
pub fn tabulate_lifts(h: &HamiltonianField, grid: &[Vec<f64>], opts: &LiftTableOptions) -> Result<LiftTable> {
    if opts.steps == 0 || opts.store_every == 0 {
        return Err(Error::param("steps", "steps and stride must be positive"));
    }
    if !(opts.panel_length > 0.0) {
        return Err(Error::param("panel_length", "must be positive"));
    }
    let dim = h.dim();
    if let Some(bad) = grid.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    let sched = Schedule::new(opts.t_end, opts.steps, opts.store_every);
    let dt = sched.dt;
    let stored = sched.stored;

    let mut times = Vec::with_capacity(stored);
    times.push(0.0);
    for k in 0..sched.steps {
        if sched.stores(k) {
            times.push(if k + 1 == sched.steps { opts.t_end } else { (k + 1) as f64 * dt });
        }
    }

    let np = grid.len();
    let mut phi = vec![Vec::with_capacity(np); stored];
    let mut gain = vec![vec![0.0; np]; stored];
    let mut vert = vec![vec![0.0; np]; stored];
    let mut h_along = vec![vec![0.0; np]; stored];
    let mut h_base = vec![vec![0.0; np]; stored];

    for (i, x0) in grid.iter().enumerate() {
        let mut x = x0.clone();
        let mut a = 0.0;
        phi[0].push(x.clone());
        h_along[0][i] = h.value(0.0, &x);
        h_base[0][i] = h_along[0][i];
        let mut slot = 1;
        for k in 0..sched.steps {
            let prev = x.clone();
            rk4_step(h, k as f64 * dt, &mut x, dt);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("flow state"));
            }
            a += 0.5 * omega(&prev, &x);
            if sched.stores(k) {
                let t = times[slot];
                phi[slot].push(x.clone());
                gain[slot][i] = a;
                h_along[slot][i] = h.value(t, &x);
                h_base[slot][i] = h.value(t, x0);
                slot += 1;
            }
        }
    }

    // Every staircase leg but the last runs in a face of the support box, where the
    // integrand vanishes; points sharing leading coordinates share that last leg.
    let mut lines: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (i, x) in grid.iter().enumerate() {
        let inside = (0..dim - 1).all(|d| x[d] > h.support.lo[d] && x[d] < h.support.hi[d]);
        if inside {
            lines.entry(x[..dim - 1].iter().map(|c| c.to_bits()).collect()).or_default().push(i);
        }
    }
    for members in lines.values() {
        for (i, series) in line_vertical(h, &sched, grid, members, opts.panel_length) {
            for (k, v) in series.into_iter().enumerate() {
                vert[k][i] = v;
            }
        }
    }

    let anchor = h.support.lo.clone();
    let mut path_residual = 0.0f64;
    for i in witness_indices(grid, h, opts.witness) {
        let straight = segment_vertical(h, &sched, &anchor, &grid[i], opts.panel_length);
        for (k, s) in straight.iter().enumerate() {
            path_residual = path_residual.max((s - vert[k][i]).abs());
        }
    }

    Ok(LiftTable {
        times,
        grid: grid.to_vec(),
        anchor,
        phi,
        horizontal_gain: gain,
        vertical_part: vert,
        h_along,
        h_base,
        path_residual,
        steps: opts.steps,
    })
}

/// Grid points inside the support, evenly spread over the grid order.
fn witness_indices(grid: &[Vec<f64>], h: &HamiltonianField, count: usize) -> Vec<usize> {
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| h.support.contains(&grid[i])).collect();
    if inside.is_empty() || count == 0 {
        return Vec::new();
    }
    let step = (inside.len() / count).max(1);
    inside.iter().step_by(step).take(count).copied().collect()
}

/// `φ̃_t` for every stored time: the lift of each flow slice, with `F_t ≡ 0` outside
/// the support.
#[derive(Debug, Clone, Serialize)]
pub struct LiftedFlow {
    pub times: Vec<f64>,
    pub grid: Vec<Vec<f64>>,
    #[serde(rename = "F")]
    pub vertical: Vec<Vec<f64>>,
    pub path_residual: f64,
}

pub fn lift_flow_tilde(h: &HamiltonianField, grid: &[Vec<f64>], opts: &LiftTableOptions) -> Result<LiftedFlow> {
    let t = tabulate_lifts(h, grid, opts)?;
    Ok(LiftedFlow { times: t.times, grid: t.grid, vertical: t.vertical_part, path_residual: t.path_residual })
}

/// `φʰ`: horizontal lifts of the trajectories of `fg`, starting at `(x, start_xbar(x))`.
pub fn lift_flow_horizontal<S>(fg: &FlowGrid, start_xbar: S) -> Result<Vec<HorizontalCurve>>
where
    S: Fn(&[f64]) -> f64,
{
    if fg.times.len() < 2 {
        return Err(Error::param("flow", "need at least two stored times"));
    }
    (0..fg.cloud.len())
        .map(|i| horizontal_lift(&fg.times, &fg.trajectory_of(i), start_xbar(&fg.cloud[i])))
        .collect()
}

/// `φᵛ_t(x, x̄) = (x, x̄ + Λ_t(x))` with the Hamilton-equation residuals.
#[derive(Debug, Clone, Serialize)]
pub struct VerticalFlow {
    pub times: Vec<f64>,
    pub grid: Vec<Vec<f64>>,
    #[serde(rename = "Lambda")]
    pub lambda: Vec<Vec<f64>>,
    pub lambda_dot: Vec<Vec<f64>>,
    /// `max_x |Λ̇_t(x) − σH(t, φ_t(x))|`.
    pub residual_flow: Vec<f64>,
    /// `max_x |Λ̇_t(x) − σH(t, x)|`.
    pub residual_base: Vec<f64>,
    pub sup_lambda_dot: Vec<f64>,
    pub sigma: f64,
}

impl VerticalFlow {
    pub fn max_residual_flow(&self) -> f64 {
        self.residual_flow.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_residual_base(&self) -> f64 {
        self.residual_base.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_abs_lambda(&self) -> f64 {
        self.lambda.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// `∫ sup_x |Λ̇_t(x)| dt` by the trapezoid rule.
    pub fn length(&self) -> f64 {
        trapezoid(&self.times, &self.sup_lambda_dot)
    }

    /// CSV rows `t, sup|Λ̇|, residual`.
    pub fn summary_rows(&self) -> Vec<Vec<f64>> {
        self.times
            .iter()
            .zip(&self.sup_lambda_dot)
            .zip(&self.residual_flow)
            .map(|((t, s), r)| vec![*t, *s, *r])
            .collect()
    }
}

pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Second-order differences in time for each grid point.
pub(crate) fn time_derivative(times: &[f64], series: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = times.len();
    let np = series[0].len();
    let mut out = vec![vec![0.0; np]; m];
    if m < 3 {
        return out;
    }
    for k in 0..m {
        // the stencil's three times, as divided differences so constants give exactly 0
        let j = k.clamp(1, m - 2);
        let (h1, h2) = (times[j] - times[j - 1], times[j + 1] - times[j]);
        for i in 0..np {
            let d1 = (series[j][i] - series[j - 1][i]) / h1;
            let d2 = (series[j + 1][i] - series[j][i]) / h2;
            let curv = (d2 - d1) / (h1 + h2);
            out[k][i] = if k == 0 {
                d1 - h1 * curv
            } else if k == m - 1 {
                d2 + h2 * curv
            } else {
                d1 + h1 * curv
            };
        }
    }
    out
}

pub fn vertical_flow_from_table(t: &LiftTable) -> VerticalFlow {
    let lambda: Vec<Vec<f64>> = (0..t.times.len())
        .map(|k| (0..t.grid.len()).map(|i| t.lambda(k, i)).collect())
        .collect();
    let lambda_dot = time_derivative(&t.times, &lambda);
    let sigma = HAMILTON_SIGN;
    let resid = |hv: &Vec<Vec<f64>>| -> Vec<f64> {
        lambda_dot
            .iter()
            .zip(hv)
            .map(|(ld, hk)| ld.iter().zip(hk).fold(0.0f64, |m, (a, b)| m.max((a - sigma * b).abs())))
            .collect()
    };
    let residual_flow = resid(&t.h_along);
    let residual_base = resid(&t.h_base);
    let sup_lambda_dot = lambda_dot.iter().map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    VerticalFlow {
        times: t.times.clone(),
        grid: t.grid.clone(),
        lambda,
        lambda_dot,
        residual_flow,
        residual_base,
        sup_lambda_dot,
        sigma,
    }
}

pub fn vertical_flow(h: &HamiltonianField, grid: &[Vec<f64>], opts: &LiftTableOptions) -> Result<VerticalFlow> {
    if opts.steps / opts.store_every.max(1) < 2 {
        return Err(Error::param("steps", "need at least three stored times"));
    }
    Ok(vertical_flow_from_table(&tabulate_lifts(h, grid, opts)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::field::{Builtin, TimeProfile};
    use crate::flows::integrate::{integrate_flow, FlowOptions};
    use std::f64::consts::PI;

    fn harmonic() -> HamiltonianField {
        HamiltonianField::from_builtin(
            &Builtin::Harmonic { n: 1, scale: 1.0, inner: 1.5, outer: 2.5 },
            TimeProfile::Constant,
        )
        .unwrap()
    }

    #[test]
    fn rotation_lambda_is_minus_t_h() {
        let opts = LiftTableOptions { steps: 1000, ..Default::default() };
        let vf = vertical_flow(&harmonic(), &[vec![1.0, 0.0], vec![0.0, 0.5]], &opts).unwrap();
        let last = vf.lambda.last().unwrap();
        assert!((last[0] + 0.5).abs() < 1e-6, "{last:?}");
        assert!((last[1] + 0.125).abs() < 1e-6);
        assert!(vf.max_residual_flow() < 1e-6);
    }

    #[test]
    fn rotation_slices_lift_flat() {
        let opts = LiftTableOptions { steps: 400, ..Default::default() };
        let lf = lift_flow_tilde(&harmonic(), &[vec![0.3, -0.7], vec![1.0, 0.2]], &opts).unwrap();
        assert!(lf.vertical.iter().flatten().all(|v| v.abs() < 1e-8));
        assert!(lf.vertical[0].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn full_period_gain() {
        let fg = integrate_flow(&harmonic(), &[vec![1.0, 0.0]], 2.0 * PI, &FlowOptions {
            steps: 4096,
            ..FlowOptions::for_horizon(2.0 * PI)
        })
        .unwrap();
        let curves = lift_flow_horizontal(&fg, |_| 0.0).unwrap();
        assert!((curves[0].end().xbar + PI).abs() < 1e-5);
    }

    #[test]
    fn zero_field_has_zero_vertical_flow() {
        let h = HamiltonianField::from_builtin(&Builtin::Zero { n: 1 }, TimeProfile::Constant).unwrap();
        let vf = vertical_flow(&h, &[vec![0.1, 0.2]], &LiftTableOptions { steps: 64, ..Default::default() })
            .unwrap();
        assert_eq!(vf.max_abs_lambda(), 0.0);
    }

    #[test]
    fn derivative_formula_is_exact_on_quadratics() {
        let times = [0.0, 0.1, 0.3, 0.35];
        let series: Vec<Vec<f64>> = times.iter().map(|t| vec![t * t - 2.0 * t]).collect();
        let d = time_derivative(&times, &series);
        for (t, v) in times.iter().zip(&d) {
            assert!((v[0] - (2.0 * t - 2.0)).abs() < 1e-12);
        }
    }
}
