//! Hofer lengths, displacement, and Hofer–Zehnder admissibility of autonomous fields.

use serde::{Deserialize, Serialize};

use super::field::HamiltonianField;
use super::integrate::{integrate_flow, rk4_step, FlowGrid, FlowOptions};
use super::lift::trapezoid;
use crate::error::{Error, Result};
use crate::heis::AxisBox;
use crate::rng;
use crate::roots::{bisect, brent, RootOptions};

/// Tensor grid with `per_axis` points per coordinate, endpoints included.
pub fn regular_grid(lo: &[f64], hi: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let d = lo.len();
    let m = per_axis.max(1);
    let coord = |k: usize, i: usize| {
        if m == 1 {
            0.5 * (lo[k] + hi[k])
        } else {
            lo[k] + (hi[k] - lo[k]) * i as f64 / (m - 1) as f64
        }
    };
    let total = m.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = vec![0.0; d];
            for (k, xk) in x.iter_mut().enumerate().rev() {
                *xk = coord(k, idx % m);
                idx /= m;
            }
            x
        })
        .collect()
}

pub fn support_grid(h: &HamiltonianField, per_axis: usize) -> Vec<Vec<f64>> {
    regular_grid(&h.support.lo, &h.support.hi, per_axis)
}

/// `count` equally spaced times on `[0, t_end]`.
pub fn time_grid(t_end: f64, count: usize) -> Vec<f64> {
    let m = count.max(2);
    (0..m).map(|k| t_end * k as f64 / (m - 1) as f64).collect()
}

/// `∫ max_grid |H(t, ·)| dt` by the trapezoid rule; a grid approximation from below.
pub fn hofer_length(h: &HamiltonianField, grid: &[Vec<f64>], times: &[f64]) -> Result<f64> {
    let dim = h.dim();
    if grid.is_empty() {
        return Err(Error::GridDoesNotCover);
    }
    if let Some(bad) = grid.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    let covers = (0..dim).all(|k| {
        let lo = grid.iter().map(|x| x[k]).fold(f64::INFINITY, f64::min);
        let hi = grid.iter().map(|x| x[k]).fold(f64::NEG_INFINITY, f64::max);
        lo <= h.support.lo[k] + 1e-12 && hi >= h.support.hi[k] - 1e-12
    });
    if !covers {
        return Err(Error::GridDoesNotCover);
    }
    if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("times", "need at least two increasing times"));
    }
    let sups: Vec<f64> = times.iter().map(|&t| h.grid_sup(t, grid)).collect();
    Ok(trapezoid(times, &sups))
}

/// A compact region of R^{2n}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum PlanarRegion {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl PlanarRegion {
    pub fn dim(&self) -> usize {
        match self {
            PlanarRegion::Ball { center, .. } => center.len(),
            PlanarRegion::Box { lo, .. } => lo.len(),
        }
    }

    pub fn bounding_box(&self) -> Result<AxisBox> {
        match self {
            PlanarRegion::Ball { center, radius } => AxisBox::new(
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            PlanarRegion::Box { lo, hi } => AxisBox::new(lo.clone(), hi.clone()),
        }
    }

    /// Euclidean distance to the region, negative inside (depth below the boundary).
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            PlanarRegion::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt() - radius
            }
            PlanarRegion::Box { lo, hi } => {
                let mut outside = 0.0;
                let mut depth = f64::INFINITY;
                for k in 0..x.len() {
                    let e = (lo[k] - x[k]).max(x[k] - hi[k]);
                    if e > 0.0 {
                        outside += e * e;
                    }
                    depth = depth.min(-e);
                }
                if outside > 0.0 {
                    outside.sqrt()
                } else {
                    -depth
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) <= 0.0
    }

    /// Half uniform interior points, half on the boundary.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng::seeded(seed);
        let d = self.dim();
        (0..count)
            .map(|i| match self {
                PlanarRegion::Ball { center, radius } => {
                    let mut v = rng::uniform_ball(&mut r, d, *radius);
                    if i % 2 == 1 {
                        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-300);
                        v.iter_mut().for_each(|a| *a *= radius / norm);
                    }
                    v.iter().zip(center).map(|(a, c)| a + c).collect()
                }
                PlanarRegion::Box { lo, hi } => {
                    let mut v = rng::uniform_vec(&mut r, lo, hi);
                    if i % 2 == 1 {
                        let k = (i / 2) % d;
                        v[k] = if (i / 2 / d) % 2 == 0 { lo[k] } else { hi[k] };
                    }
                    v
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct DisplacementOptions {
    pub samples: usize,
    pub seed: u64,
    pub t_end: f64,
    pub steps: usize,
    /// Images must clear the region by this distance.
    pub margin: f64,
    pub grid_per_axis: usize,
    pub time_samples: usize,
}

impl Default for DisplacementOptions {
    fn default() -> Self {
        DisplacementOptions {
            samples: 400,
            seed: 0,
            t_end: 1.0,
            steps: 2048,
            margin: 1e-3,
            grid_per_axis: 41,
            time_samples: 33,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DisplacementReport {
    pub displaced: bool,
    /// Upper bound for the displacement energy when displaced.
    pub bound: Option<f64>,
    /// Hofer length with the sup over the whole grid.
    pub hofer_length: f64,
    /// Same integral with the sup over the transported region only.
    pub region_length: f64,
    /// Smallest signed distance of an image point to the region.
    pub min_gap: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Displacement test of `region` by the time-`t_end` map of `h`, with `fg` the flow of
/// region samples (its cloud) and `grid` the spatial grid for the Hofer sup.
pub fn displacement_energy_upper(
    region: &PlanarRegion,
    h: &HamiltonianField,
    fg: &FlowGrid,
    grid: &[Vec<f64>],
    margin: f64,
) -> Result<DisplacementReport> {
    if region.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: region.dim() });
    }
    let min_gap = fg
        .final_points()
        .iter()
        .map(|y| region.signed_distance(y))
        .fold(f64::INFINITY, f64::min);
    let hofer = hofer_length(h, grid, &fg.times)?;
    let region_sups: Vec<f64> = fg
        .times
        .iter()
        .zip(&fg.points)
        .map(|(&t, slice)| slice.iter().map(|x| h.value(t, x).abs()).fold(0.0, f64::max))
        .collect();
    let displaced = min_gap > margin;
    Ok(DisplacementReport {
        displaced,
        bound: displaced.then_some(hofer),
        hofer_length: hofer,
        region_length: trapezoid(&fg.times, &region_sups),
        min_gap,
        samples: fg.cloud.len(),
        seed: 0,
    })
}

/// Sample the region, integrate it and run [`displacement_energy_upper`].
pub fn displace_region(region: &PlanarRegion, h: &HamiltonianField, opts: &DisplacementOptions) -> Result<DisplacementReport> {
    let cloud = region.sample(opts.samples, opts.seed);
    let every = (opts.steps / (opts.time_samples.max(2) - 1)).max(1);
    let fg = integrate_flow(h, &cloud, opts.t_end, &FlowOptions {
        steps: opts.steps,
        store_every: every,
        safety_box: None,
        symplecticity_probes: 0,
        error_estimate: false,
    })?;
    let grid = support_grid(h, opts.grid_per_axis);
    let mut rep = displacement_energy_upper(region, h, &fg, &grid, opts.margin)?;
    rep.seed = opts.seed;
    Ok(rep)
}

#[derive(Debug, Clone)]
pub struct AdmissibilityOptions {
    pub seeds: usize,
    pub seed: u64,
    /// Orbits closing within this time are forbidden.
    pub horizon: f64,
    /// Orbits are followed this long looking for a first return.
    pub search_time: f64,
    pub steps_per_unit: usize,
    /// Return tolerance relative to the support diameter; the arc threshold is ten times it.
    pub return_tol: f64,
}

impl Default for AdmissibilityOptions {
    fn default() -> Self {
        AdmissibilityOptions {
            seeds: 64,
            seed: 0,
            horizon: 1.0,
            search_time: 8.0,
            steps_per_unit: 512,
            return_tol: 1e-3,
        }
    }
}

/// A closed orbit certificate.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitReturn {
    pub start: Vec<f64>,
    pub period: f64,
    pub gap: f64,
    pub arc_length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub worst_period: Option<f64>,
    pub certificate: Option<OrbitReturn>,
    pub horizon: f64,
    pub orbits: usize,
    pub returns: usize,
    pub delta_ret: f64,
    pub delta_arc: f64,
    pub seed: u64,
}

fn hermite(x0: &[f64], v0: &[f64], x1: &[f64], v1: &[f64], dt: f64, s: f64) -> (Vec<f64>, Vec<f64>) {
    let u = s / dt;
    let (h00, h10, h01, h11) = (
        2.0 * u.powi(3) - 3.0 * u * u + 1.0,
        u.powi(3) - 2.0 * u * u + u,
        -2.0 * u.powi(3) + 3.0 * u * u,
        u.powi(3) - u * u,
    );
    let (d00, d10, d01, d11) = (
        (6.0 * u * u - 6.0 * u) / dt,
        3.0 * u * u - 4.0 * u + 1.0,
        (-6.0 * u * u + 6.0 * u) / dt,
        3.0 * u * u - 2.0 * u,
    );
    let p = (0..x0.len())
        .map(|i| h00 * x0[i] + h10 * dt * v0[i] + h01 * x1[i] + h11 * dt * v1[i])
        .collect();
    let dp = (0..x0.len())
        .map(|i| d00 * x0[i] + d10 * v0[i] + d01 * x1[i] + d11 * v1[i])
        .collect();
    (p, dp)
}

fn dot_offset(p: &[f64], x0: &[f64], v: &[f64]) -> f64 {
    p.iter().zip(x0).zip(v).map(|((a, b), c)| (a - b) * c).sum()
}

/// First return of the orbit of `x0` to within `delta_ret`, after travelling at least
/// `delta_arc`; returns are located at local minima of the distance to the start.
pub fn orbit_period(
    h: &HamiltonianField,
    x0: &[f64],
    search_time: f64,
    steps: usize,
    delta_ret: f64,
    delta_arc: f64,
) -> Result<Option<OrbitReturn>> {
    let dt = search_time / steps.max(1) as f64;
    let mut x = x0.to_vec();
    let mut v = h.vector_field(0.0, &x);
    let mut g = 0.0;
    let mut arc = 0.0;
    for k in 0..steps {
        let t = k as f64 * dt;
        let mut y = x.clone();
        rk4_step(h, t, &mut y, dt);
        if y.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("orbit state"));
        }
        let w = h.vector_field(t + dt, &y);
        let gy = dot_offset(&y, x0, &w);
        arc += y.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if arc > delta_arc && g < 0.0 && gy >= 0.0 {
            let f = |s: f64| {
                let (p, dp) = hermite(&x, &v, &y, &w, dt, s);
                dot_offset(&p, x0, &dp)
            };
            let s = brent(f, 0.0, dt, RootOptions { xtol: 1e-15, ftol: 0.0, max_iter: 100 })
                .map(|r| r.x)
                .unwrap_or(dt);
            let (p, _) = hermite(&x, &v, &y, &w, dt, s);
            let gap = p.iter().zip(x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if gap < delta_ret {
                return Ok(Some(OrbitReturn { start: x0.to_vec(), period: t + s, gap, arc_length: arc }));
            }
        }
        x = y;
        v = w;
        g = gy;
    }
    Ok(None)
}

/// Search seeded orbits in the support for closed orbits of period at most the horizon.
/// A detection is a certificate; no detection is evidence only.
pub fn admissibility_check(h: &HamiltonianField, opts: &AdmissibilityOptions) -> Result<AdmissibilityReport> {
    if !h.autonomous {
        return Err(Error::param("hamiltonian", "admissibility is checked for autonomous fields only"));
    }
    if !(opts.search_time > opts.horizon) || opts.horizon <= 0.0 {
        return Err(Error::param("search_time", "must exceed a positive horizon"));
    }
    let delta_ret = opts.return_tol * h.support.diameter();
    let delta_arc = 10.0 * delta_ret;
    let steps = ((opts.search_time * opts.steps_per_unit as f64).ceil() as usize).max(1);
    let mut r = rng::seeded(opts.seed);
    let mut best: Option<OrbitReturn> = None;
    let mut returns = 0;
    for _ in 0..opts.seeds {
        let x0 = rng::uniform_vec(&mut r, &h.support.lo, &h.support.hi);
        if let Some(ret) = orbit_period(h, &x0, opts.search_time, steps, delta_ret, delta_arc)? {
            returns += 1;
            if best.as_ref().is_none_or(|b| ret.period < b.period) {
                best = Some(ret);
            }
        }
    }
    let worst_period = best.as_ref().map(|b| b.period);
    Ok(AdmissibilityReport {
        admissible: worst_period.is_none_or(|p| p > opts.horizon),
        worst_period,
        certificate: best,
        horizon: opts.horizon,
        orbits: opts.seeds,
        returns,
        delta_ret,
        delta_arc,
        seed: opts.seed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedMember {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityReport {
    pub lower: f64,
    pub accepted: Vec<usize>,
    pub skipped: Vec<SkippedMember>,
}

/// `max ‖H‖` over admissible members supported in the region: a lower bound for the
/// Hofer–Zehnder capacity. Members failing support or admissibility are skipped.
pub fn hz_capacity_lower(
    region: &PlanarRegion,
    family: &[HamiltonianField],
    grid_per_axis: usize,
    opts: &AdmissibilityOptions,
) -> Result<CapacityReport> {
    let mut rep = CapacityReport { lower: 0.0, accepted: Vec::new(), skipped: Vec::new() };
    for (index, h) in family.iter().enumerate() {
        if h.dim() != region.dim() {
            return Err(Error::DimensionMismatch { expected: region.dim(), got: h.dim() });
        }
        let grid = support_grid(h, grid_per_axis);
        let leaks = grid.iter().any(|x| !region.contains(x) && h.value(0.0, x) != 0.0);
        if leaks {
            rep.skipped.push(SkippedMember { index, reason: "not supported in the region".into() });
            continue;
        }
        let adm = admissibility_check(h, opts)?;
        if !adm.admissible {
            let p = adm.worst_period.unwrap_or(f64::NAN);
            rep.skipped.push(SkippedMember { index, reason: format!("closed orbit of period {p}") });
            continue;
        }
        rep.accepted.push(index);
        rep.lower = rep.lower.max(h.grid_sup(0.0, &grid));
    }
    Ok(rep)
}

/// Bracket `[m_ok, m_bad]` of the admissibility threshold of `m·h` for `m ∈ [lo, hi]`.
pub fn admissibility_threshold(
    h: &HamiltonianField,
    lo: f64,
    hi: f64,
    iterations: usize,
    opts: &AdmissibilityOptions,
) -> Result<(f64, f64)> {
    let mut failure = None;
    let mut bad = |m: f64| match admissibility_check(&h.scaled(m), opts) {
        Ok(r) => !r.admissible,
        Err(e) => {
            failure.get_or_insert(e);
            true
        }
    };
    if bad(lo) || !bad(hi) {
        return Err(Error::Infeasible(format!("admissibility does not change between m = {lo} and m = {hi}")));
    }
    let out = bisect(&mut bad, lo, hi, iterations);
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::field::{Builtin, TimeProfile};
    use std::f64::consts::PI;

    fn field(b: Builtin, p: TimeProfile) -> HamiltonianField {
        HamiltonianField::from_builtin(&b, p).unwrap()
    }

    fn bump(amplitude: f64) -> HamiltonianField {
        field(Builtin::Bump { center: vec![0.0, 0.0], radius: 1.0, amplitude }, TimeProfile::Constant)
    }

    #[test]
    fn grid_shape() {
        let g = regular_grid(&[0.0, -1.0], &[1.0, 1.0], 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.0, -1.0]);
        assert_eq!(g[1], vec![0.0, 0.0]);
        assert_eq!(g[8], vec![1.0, 1.0]);
    }

    #[test]
    fn hofer_examples() {
        let t = time_grid(1.0, 101);
        let b = bump(2.0);
        assert!((hofer_length(&b, &support_grid(&b, 21), &t).unwrap() - 2.0).abs() < 1e-12);
        let z = field(Builtin::Zero { n: 1 }, TimeProfile::Constant);
        assert_eq!(hofer_length(&z, &support_grid(&z, 5), &t).unwrap(), 0.0);
        let tri = field(Builtin::Bump { center: vec![0.0, 0.0], radius: 1.0, amplitude: 1.0 }, TimeProfile::Triangular);
        let l = hofer_length(&tri, &support_grid(&tri, 21), &time_grid(1.0, 3)).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let small = regular_grid(&[-0.5, -0.5], &[0.5, 0.5], 5);
        assert!(matches!(hofer_length(&b, &small, &t), Err(Error::GridDoesNotCover)));
    }

    #[test]
    fn box_signed_distance() {
        let r = PlanarRegion::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
        assert!((r.signed_distance(&[0.5, 0.5]) + 0.5).abs() < 1e-15);
        assert!((r.signed_distance(&[2.0, 0.5]) - 1.0).abs() < 1e-15);
        assert!((r.signed_distance(&[4.0, 5.0]) - 5.0).abs() < 1e-15);
        assert!(r.sample(50, 1).iter().all(|x| r.contains(x)));
    }

    #[test]
    fn translation_displaces_ball() {
        let h = field(
            Builtin::Translation { center: vec![0.5, 0.0], speed: 1.0, inner: 1.0, outer: 1.5 },
            TimeProfile::Constant,
        );
        let region = PlanarRegion::Ball { center: vec![0.0, 0.0], radius: 0.4 };
        let opts = DisplacementOptions { samples: 100, steps: 512, grid_per_axis: 31, ..Default::default() };
        let rep = displace_region(&region, &h, &opts).unwrap();
        assert!(rep.displaced);
        assert!(rep.min_gap > 0.2 - 1e-9 && rep.min_gap < 0.22, "{}", rep.min_gap);
        assert!((rep.region_length - 0.4).abs() < 1e-3);
        assert!(rep.bound.unwrap() >= rep.region_length);
    }

    #[test]
    fn trivial_fields_do_not_displace() {
        let region = PlanarRegion::Ball { center: vec![0.0, 0.0], radius: 0.4 };
        let opts = DisplacementOptions { samples: 20, steps: 64, ..Default::default() };
        let z = field(Builtin::Zero { n: 1 }, TimeProfile::Constant);
        assert!(!displace_region(&region, &z, &opts).unwrap().displaced);
        let far = field(Builtin::Bump { center: vec![3.0, 3.0], radius: 0.5, amplitude: 1.0 }, TimeProfile::Constant);
        let rep = displace_region(&region, &far, &opts).unwrap();
        assert!(!rep.displaced);
        assert_eq!(rep.region_length, 0.0);
    }

    #[test]
    fn oscillator_admissibility() {
        let opts = AdmissibilityOptions { seeds: 16, ..Default::default() };
        let h = field(Builtin::harmonic(1, 1.0), TimeProfile::Constant);
        let rep = admissibility_check(&h, &opts).unwrap();
        assert!(rep.admissible);
        assert!((rep.worst_period.unwrap() - 2.0 * PI).abs() < 1e-3, "{:?}", rep.worst_period);
        let fast = field(Builtin::harmonic(1, 2.0 * PI + 1.0), TimeProfile::Constant);
        let rep = admissibility_check(&fast, &opts).unwrap();
        assert!(!rep.admissible);
        let want = 2.0 * PI / (2.0 * PI + 1.0);
        assert!((rep.worst_period.unwrap() - want).abs() < 1e-3);
    }

    #[test]
    fn small_bump_admissible_and_capacity() {
        let opts = AdmissibilityOptions { seeds: 16, ..Default::default() };
        let region = PlanarRegion::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let family = vec![bump(0.3), bump(50.0)];
        let rep = hz_capacity_lower(&region, &family, 21, &opts).unwrap();
        assert_eq!(rep.accepted, vec![0]);
        assert!((rep.lower - 0.3).abs() < 1e-12);
        let empty = hz_capacity_lower(&region, &[], 21, &opts).unwrap();
        assert_eq!(empty.lower, 0.0);
    }
}
