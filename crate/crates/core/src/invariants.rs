//! Volume, weight, CC diameter and isodiameter bounds of bounded regions of H(n).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::cc::{cc_distance, unit_ball_volume, SolverOptions};
use crate::error::{Error, Result};
use crate::heis::{dilate, hdist, AxisBox, HPoint, NormKind};
use crate::lifting::{LiftedMap, SYMPLECTICITY_TOL};
use crate::rng;

pub const MIN_SAMPLES: usize = 100;

/// Rejection sampling gives up after this many draws per requested point.
const REJECTION_FACTOR: usize = 1000;

type Predicate = dyn Fn(&HPoint) -> bool + Send + Sync;

#[derive(Clone)]
pub enum RegionShape {
    /// Axis box in coordinates `(x, x̄)` of R^{2n+1}.
    Box(AxisBox),
    Ball { center: HPoint, radius: f64, norm: NormKind },
    /// Membership predicate with a bounding box.
    Indicator { predicate: Arc<Predicate>, bounds: AxisBox },
}

impl std::fmt::Debug for RegionShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionShape::Box(b) => f.debug_tuple("Box").field(b).finish(),
            RegionShape::Ball { center, radius, norm } => f
                .debug_struct("Ball")
                .field("center", center)
                .field("radius", radius)
                .field("norm", norm)
                .finish(),
            RegionShape::Indicator { bounds, .. } => f.debug_struct("Indicator").field("bounds", bounds).finish(),
        }
    }
}

/// A bounded region `Ã ⊂ H(n)`.
#[derive(Debug, Clone)]
pub struct RegionSpec {
    pub n: usize,
    pub shape: RegionShape,
}

impl RegionSpec {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let b = AxisBox::new(lo, hi)?;
        if b.dim() % 2 != 1 {
            return Err(Error::param("box", "needs 2n + 1 coordinates"));
        }
        Ok(RegionSpec { n: b.dim() / 2, shape: RegionShape::Box(b) })
    }

    pub fn ball(center: HPoint, radius: f64, norm: NormKind) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::param("radius", "must be finite and non-negative"));
        }
        Ok(RegionSpec { n: center.n(), shape: RegionShape::Ball { center, radius, norm } })
    }

    pub fn indicator<P>(bounds: AxisBox, predicate: P) -> Result<Self>
    where
        P: Fn(&HPoint) -> bool + Send + Sync + 'static,
    {
        if bounds.dim() % 2 != 1 {
            return Err(Error::param("bounds", "needs 2n + 1 coordinates"));
        }
        if bounds.lo.iter().chain(&bounds.hi).any(|v| !v.is_finite()) {
            return Err(Error::param("bounds", "must be finite"));
        }
        Ok(RegionSpec { n: bounds.dim() / 2, shape: RegionShape::Indicator { predicate: Arc::new(predicate), bounds } })
    }

    pub fn bounding_box(&self) -> AxisBox {
        match &self.shape {
            RegionShape::Box(b) => b.clone(),
            RegionShape::Indicator { bounds, .. } => bounds.clone(),
            RegionShape::Ball { center, radius, norm } => {
                // |x − c| ≤ r, and the area swept by a horizontal curve of length r is at most r²/4π
                let r = *radius;
                let h = match norm {
                    NormKind::Sum => r * r,
                    NormKind::CC => r * r / (4.0 * PI),
                };
                let reach: f64 = 0.5 * center.x.iter().map(|c| c * c).sum::<f64>().sqrt() * r;
                let mut lo: Vec<f64> = center.x.iter().map(|c| c - r).collect();
                let mut hi: Vec<f64> = center.x.iter().map(|c| c + r).collect();
                lo.push(center.xbar - h - reach);
                hi.push(center.xbar + h + reach);
                AxisBox { lo, hi }
            }
        }
    }

    pub fn contains(&self, p: &HPoint) -> bool {
        match &self.shape {
            RegionShape::Box(b) => b.contains(&p.coords()),
            RegionShape::Indicator { predicate, bounds } => bounds.contains(&p.coords()) && predicate(p),
            RegionShape::Ball { center, radius, norm } => {
                hdist(center, p, *norm).map(|d| d <= *radius).unwrap_or(false)
            }
        }
    }

    /// `δ_ε(Ã)`.
    pub fn dilate(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::param("eps", "must be positive"));
        }
        let shape = match &self.shape {
            RegionShape::Box(b) => RegionShape::Box(b.dilate_heisenberg(eps)),
            RegionShape::Ball { center, radius, norm } => {
                RegionShape::Ball { center: dilate(eps, center)?, radius: eps * radius, norm: *norm }
            }
            RegionShape::Indicator { predicate, bounds } => {
                let inner = predicate.clone();
                RegionShape::Indicator {
                    predicate: Arc::new(move |p: &HPoint| {
                        inner(&HPoint { x: p.x.iter().map(|v| v / eps).collect(), xbar: p.xbar / (eps * eps) })
                    }),
                    bounds: bounds.dilate_heisenberg(eps),
                }
            }
        };
        Ok(RegionSpec { n: self.n, shape })
    }

    /// Uniform points of the region by rejection in the bounding box; boxes also
    /// contribute their corners first.
    pub fn sample(&self, count: usize, seed: u64, with_corners: bool) -> Result<Vec<HPoint>> {
        let bb = self.bounding_box();
        let mut out = Vec::with_capacity(count);
        if with_corners {
            if let RegionShape::Box(b) = &self.shape {
                for c in b.corners() {
                    out.push(HPoint::from_coords(&c)?);
                }
            }
        }
        let mut r = rng::seeded(seed);
        let mut draws = 0usize;
        while out.len() < count {
            if draws > REJECTION_FACTOR * count.max(1) {
                return Err(Error::Infeasible("rejection sampling found too few points in the region".into()));
            }
            draws += 1;
            let p = HPoint::from_coords(&rng::uniform_vec(&mut r, &bb.lo, &bb.hi))?;
            if self.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Volume of the horizontal projection `A ⊂ R^{2n}`: exact for boxes and balls,
    /// Monte Carlo with a stratified `x̄` scan for indicators.
    pub fn projected_volume(&self, samples: usize, seed: u64) -> Result<Estimate> {
        match &self.shape {
            RegionShape::Box(b) => Ok(Estimate::exact((0..2 * self.n).map(|k| b.hi[k] - b.lo[k]).product())),
            // every x with |x − c| ≤ r is reached by a straight horizontal segment
            RegionShape::Ball { radius, .. } => Ok(Estimate::exact(unit_ball_volume(2 * self.n) * radius.powi(2 * self.n as i32))),
            RegionShape::Indicator { predicate, bounds } => {
                check_samples(samples)?;
                let d = 2 * self.n;
                let (lo, hi) = (&bounds.lo[..d], &bounds.hi[..d]);
                let base: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
                let scan = 64;
                let (zlo, zhi) = (bounds.lo[d], bounds.hi[d]);
                let mut r = rng::seeded(seed);
                let mut hits = 0usize;
                for _ in 0..samples {
                    let x = rng::uniform_vec(&mut r, lo, hi);
                    let hit = (0..scan).any(|k| {
                        let z = zlo + (zhi - zlo) * (k as f64 + 0.5) / scan as f64;
                        predicate(&HPoint { x: x.clone(), xbar: z })
                    });
                    hits += usize::from(hit);
                }
                Ok(Estimate::binomial(base, hits, samples))
            }
        }
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::param("samples", format!("need at least {MIN_SAMPLES}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub exact: bool,
}

impl Estimate {
    fn exact(v: f64) -> Self {
        Estimate { estimate: v, stderr: 0.0, exact: true }
    }

    fn binomial(box_volume: f64, hits: usize, samples: usize) -> Self {
        let p = hits as f64 / samples as f64;
        Estimate {
            estimate: box_volume * p,
            stderr: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
            exact: false,
        }
    }
}

/// Lebesgue volume of `Ã` in R^{2n+1}; exact for boxes.
pub fn volume_mc(region: &RegionSpec, samples: usize, seed: u64) -> Result<Estimate> {
    if let RegionShape::Box(b) = &region.shape {
        return Ok(Estimate::exact(b.volume()));
    }
    check_samples(samples)?;
    let bb = region.bounding_box();
    let vol = bb.volume();
    if !(vol > 0.0) {
        return Err(Error::Degenerate("bounding box has zero volume".into()));
    }
    let mut r = rng::seeded(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = HPoint::from_coords(&rng::uniform_vec(&mut r, &bb.lo, &bb.hi))?;
        hits += usize::from(region.contains(&p));
    }
    Ok(Estimate::binomial(vol, hits, samples))
}

/// Volume of `g(Ã)` by Monte Carlo over a box around the transported region, with
/// membership decided through `g⁻¹`.
pub fn image_volume_mc(region: &RegionSpec, g: &LiftedMap, samples: usize, seed: u64) -> Result<Estimate> {
    check_samples(samples)?;
    let cloud = region.sample(512.max(samples / 50), rng::derive_seed(seed, 1), true)?;
    let image: Vec<Vec<f64>> = cloud.iter().map(|p| g.apply(p).coords()).collect();
    let d = 2 * region.n + 1;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for c in &image {
        for k in 0..d {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    for k in 0..d {
        let pad = 0.15 * (hi[k] - lo[k]).max(1e-9);
        lo[k] -= pad;
        hi[k] += pad;
    }
    let bb = AxisBox::new(lo, hi)?;
    let mut r = rng::seeded(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let y = HPoint::from_coords(&rng::uniform_vec(&mut r, &bb.lo, &bb.hi))?;
        hits += usize::from(region.contains(&g.apply_inverse(&y)?));
    }
    Ok(Estimate::binomial(bb.volume(), hits, samples))
}

/// `χ(Ã) = vol(Ã)/vol(A)`.
pub fn weight(region: &RegionSpec, samples: usize, seed: u64) -> Result<Estimate> {
    let proj = region.projected_volume(samples, rng::derive_seed(seed, 2))?;
    if !(proj.estimate > 0.0) {
        return Err(Error::Degenerate("projection has zero volume".into()));
    }
    if let RegionShape::Box(b) = &region.shape {
        let d = 2 * region.n;
        return Ok(Estimate::exact(b.hi[d] - b.lo[d]));
    }
    let vol = volume_mc(region, samples, seed)?;
    let w = vol.estimate / proj.estimate;
    let rel = (vol.stderr / vol.estimate.max(f64::MIN_POSITIVE)).hypot(proj.stderr / proj.estimate);
    Ok(Estimate { estimate: w, stderr: w * rel, exact: vol.exact && proj.exact })
}

/// `χ(g(Ã))`, using that `g` projects to a symplectomorphism so `vol(φ(A)) = vol(A)`.
pub fn image_weight(region: &RegionSpec, g: &LiftedMap, samples: usize, seed: u64) -> Result<Estimate> {
    let proj = region.projected_volume(samples, rng::derive_seed(seed, 2))?;
    let vol = image_volume_mc(region, g, samples, seed)?;
    let w = vol.estimate / proj.estimate;
    let rel = (vol.stderr / vol.estimate.max(f64::MIN_POSITIVE)).hypot(proj.stderr / proj.estimate);
    Ok(Estimate { estimate: w, stderr: w * rel, exact: false })
}

/// Largest pairwise CC distance of a point cloud.
pub fn cc_diameter_of(points: &[HPoint]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::param("points", "empty sample"));
    }
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.max(cc_distance(&points[i], &points[j], SolverOptions { segments: 1, ..SolverOptions::closed_form() })?.length);
        }
    }
    Ok(best)
}

/// Max CC distance over sampled pairs; a lower bound for the diameter that never
/// decreases as `samples` grows for a fixed seed.
pub fn cc_diameter(region: &RegionSpec, samples: usize, seed: u64) -> Result<f64> {
    cc_diameter_of(&region.sample(samples, seed, true)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct IsodiameterReport {
    /// `min_g diam(g(Ã))^{2n+2} / vol(A)` over the family; an upper bound.
    pub bound: f64,
    pub per_map: Vec<f64>,
    pub projected_volume: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn isodiameter_upper(region: &RegionSpec, family: &[LiftedMap], samples: usize, seed: u64) -> Result<IsodiameterReport> {
    if family.is_empty() {
        return Err(Error::param("family", "must contain at least one map"));
    }
    if let Some(g) = family.iter().find(|g| !(g.symplecticity_residual <= SYMPLECTICITY_TOL)) {
        return Err(Error::NotSymplectic { residual: g.symplecticity_residual, tolerance: SYMPLECTICITY_TOL });
    }
    let proj = region.projected_volume(samples.max(MIN_SAMPLES), rng::derive_seed(seed, 2))?.estimate;
    if !(proj > 0.0) {
        return Err(Error::Degenerate("projection has zero volume".into()));
    }
    let cloud = region.sample(samples, seed, true)?;
    let q = (2 * region.n + 2) as i32;
    let per_map = family
        .iter()
        .map(|g| {
            let image: Vec<HPoint> = cloud.iter().map(|p| g.apply(p)).collect();
            Ok(cc_diameter_of(&image)?.powi(q) / proj)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(IsodiameterReport {
        bound: per_map.iter().copied().fold(f64::INFINITY, f64::min),
        per_map,
        projected_volume: proj,
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{lift_symplectomorphism, LiftOptions, PlanarMap};

    fn unit_box(h: f64) -> RegionSpec {
        RegionSpec::boxed(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, h]).unwrap()
    }

    fn shear() -> LiftedMap {
        let f = PlanarMap::new(2, |x: &[f64]| vec![x[0], x[1] + x[0] * x[0]])
            .unwrap()
            .with_inverse(|y: &[f64]| Ok(vec![y[0], y[1] - y[0] * y[0]]));
        lift_symplectomorphism(&f, 0.0, Some(&[0.0, 0.0]), &LiftOptions::default()).unwrap()
    }

    #[test]
    fn box_volume_and_weight_exact() {
        assert_eq!(volume_mc(&unit_box(1.0), 100, 0).unwrap().estimate, 1.0);
        assert_eq!(weight(&unit_box(0.25), 100, 0).unwrap().estimate, 0.25);
        for eps in [0.5, 2.0] {
            let w = weight(&unit_box(0.25).dilate(eps).unwrap(), 100, 0).unwrap();
            assert_eq!(w.estimate, eps * eps * 0.25);
        }
    }

    #[test]
    fn empty_indicator() {
        let r = RegionSpec::indicator(AxisBox::cube(3, 1.0), |_| false).unwrap();
        assert_eq!(volume_mc(&r, 1000, 3).unwrap().estimate, 0.0);
        assert!(volume_mc(&r, 10, 3).is_err());
    }

    #[test]
    fn sum_ball_volume_stable() {
        let r = RegionSpec::ball(HPoint::identity(1), 1.0, NormKind::Sum).unwrap();
        let a = volume_mc(&r, 20000, 1).unwrap();
        let b = volume_mc(&r, 20000, 2).unwrap();
        assert!((a.estimate - b.estimate).abs() <= 3.0 * a.stderr.hypot(b.stderr));
        // ∫_{|x|≤1} 2(1 − |x|)² dx = π/3
        assert!((a.estimate - PI / 3.0).abs() < 4.0 * a.stderr);
    }

    #[test]
    fn lift_preserves_volume() {
        let region = unit_box(0.5);
        let v = image_volume_mc(&region, &shear(), 20000, 4).unwrap();
        assert!((v.estimate - 0.5).abs() <= 3.0 * v.stderr, "{v:?}");
    }

    #[test]
    fn diameter_examples() {
        let point = RegionSpec::boxed(vec![0.2, 0.3, 0.1], vec![0.2, 0.3, 0.1]).unwrap();
        assert_eq!(cc_diameter(&point, 5, 0).unwrap(), 0.0);
        let seg = RegionSpec::boxed(vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
        assert!((cc_diameter(&seg, 10, 0).unwrap() - 1.0).abs() < 1e-12);
        let b = unit_box(0.5);
        let d1 = cc_diameter(&b, 20, 7).unwrap();
        let d2 = cc_diameter(&b, 40, 7).unwrap();
        assert!(d2 >= d1);
    }

    #[test]
    fn isodiameter_family_min() {
        let region = RegionSpec::boxed(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 0.01]).unwrap();
        let id = lift_symplectomorphism(&PlanarMap::identity(2), 0.0, None, &LiftOptions::default()).unwrap();
        let one = isodiameter_upper(&region, std::slice::from_ref(&id), 24, 0).unwrap();
        let two = isodiameter_upper(&region, &[id, shear()], 24, 0).unwrap();
        assert_eq!(one.bound, one.per_map[0]);
        assert!(two.bound <= one.bound);
    }
}
