//! The pair group of volume preserving maps and vertical maps of H(n).
//!
//! A pair `(φ̃, φᵛ)` has `φ̃(x, x̄) = (φ(x), x̄ + F(x))` and `φᵛ(x, x̄) = (x, x̄ + Λ(x))`.
//! The group law is `(φ̃, φᵛ)(ψ̃, ψᵛ) = (φ̃∘ψ̃, φᵛ∘φ̃∘ψᵛ∘φ̃⁻¹)`, whose vertical part is
//! `Λ_φ + Λ_ψ∘φ⁻¹`. Scalar parts are evaluated in batches so that flow-generated pairs
//! can tabulate many points at once.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flows::{
    flow_map, hofer_length, support_grid, tabulate_lifts, time_derivative, trapezoid, HamiltonianField,
    LiftTable, LiftTableOptions,
};
use crate::heis::{omega, HPoint};
use crate::lifting::{LiftedMap, PlanarMap};

type Batch = dyn Fn(&[Vec<f64>]) -> Result<Vec<f64>> + Send + Sync;

/// Default endpoint tolerance for [`dist_estimate`].
pub const ENDPOINT_TOL: f64 = 1e-3;

#[derive(Clone)]
pub struct HamPair {
    pub label: String,
    planar: PlanarMap,
    f: Arc<Batch>,
    lambda: Arc<Batch>,
}

impl std::fmt::Debug for HamPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamPair").field("label", &self.label).field("planar", &self.planar).finish()
    }
}

/// Values of a pair on a list of points.
#[derive(Debug, Clone, Serialize)]
pub struct PairValues {
    pub phi: Vec<Vec<f64>>,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    #[serde(rename = "Lambda")]
    pub lambda: Vec<f64>,
}

fn pointwise<G>(g: G) -> Arc<Batch>
where
    G: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    Arc::new(move |xs: &[Vec<f64>]| Ok(xs.iter().map(|x| g(x)).collect()))
}

fn map_points(m: &PlanarMap, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let out: Vec<Vec<f64>> = xs.iter().map(|x| m.apply(x)).collect();
    if out.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("planar map value"));
    }
    Ok(out)
}

fn inverse_points(m: &PlanarMap, ys: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    ys.iter().map(|y| m.inverse(y)).collect()
}

impl HamPair {
    pub fn new<F, L>(label: impl Into<String>, planar: PlanarMap, f: F, lambda: L) -> Self
    where
        F: Fn(&[Vec<f64>]) -> Result<Vec<f64>> + Send + Sync + 'static,
        L: Fn(&[Vec<f64>]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        HamPair { label: label.into(), planar, f: Arc::new(f), lambda: Arc::new(lambda) }
    }

    pub fn identity(n: usize) -> Self {
        HamPair {
            label: "id".into(),
            planar: PlanarMap::identity(2 * n),
            f: pointwise(|_| 0.0),
            lambda: pointwise(|_| 0.0),
        }
    }

    /// `(id, φᵛ)` with `φᵛ(x, x̄) = (x, x̄ + Λ(x))`.
    pub fn vertical_only<L>(n: usize, lambda: L) -> Self
    where
        L: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        HamPair {
            label: "vertical".into(),
            planar: PlanarMap::identity(2 * n),
            f: pointwise(|_| 0.0),
            lambda: pointwise(lambda),
        }
    }

    /// `(g, φᵛ)` for a lifted symplectomorphism `g`.
    pub fn from_lift<L>(g: &LiftedMap, lambda: L) -> Self
    where
        L: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let g2 = g.clone();
        HamPair {
            label: "lift".into(),
            planar: g.base().clone(),
            f: pointwise(move |x| g2.vertical(x)),
            lambda: pointwise(lambda),
        }
    }

    /// `(φ̃_t, φᵛ_t)` of the flow of `h`; scalar parts are tabulated on demand and cached.
    pub fn flow(h: &HamiltonianField, t: f64, steps_per_unit: usize, panel_length: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::param("t", "must be non-negative"));
        }
        if t == 0.0 {
            let mut id = HamPair::identity(h.n());
            id.label = format!("{}@0", h.name);
            return Ok(id);
        }
        let steps = ((t * steps_per_unit as f64).ceil() as usize).max(1);
        let planar = flow_map(h, 0.0, t, steps)?;
        let cache: Arc<Mutex<HashMap<Vec<u64>, (f64, f64)>>> = Arc::new(Mutex::new(HashMap::new()));
        let opts = LiftTableOptions { t_end: t, steps, store_every: steps, panel_length, witness: 0 };
        let field = h.clone();
        let parts = move |xs: &[Vec<f64>]| -> Result<Vec<(f64, f64)>> {
            let key = |x: &Vec<f64>| x.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
            let mut guard = cache.lock().expect("cache lock");
            let missing: Vec<Vec<f64>> = {
                let mut seen = std::collections::HashSet::new();
                xs.iter().filter(|x| !guard.contains_key(&key(x)) && seen.insert(key(x))).cloned().collect()
            };
            if !missing.is_empty() {
                let table = tabulate_lifts(&field, &missing, &opts)?;
                let last = table.times.len() - 1;
                for (i, x) in missing.iter().enumerate() {
                    guard.insert(key(x), (table.vertical_part[last][i], table.lambda(last, i)));
                }
            }
            Ok(xs.iter().map(|x| guard[&key(x)]).collect())
        };
        let parts = Arc::new(parts);
        let p2 = parts.clone();
        Ok(HamPair {
            label: format!("{}@{t}", h.name),
            planar,
            f: Arc::new(move |xs: &[Vec<f64>]| Ok(parts(xs)?.into_iter().map(|p| p.0).collect())),
            lambda: Arc::new(move |xs: &[Vec<f64>]| Ok(p2(xs)?.into_iter().map(|p| p.1).collect())),
        })
    }

    pub fn planar(&self) -> &PlanarMap {
        &self.planar
    }

    pub fn dim(&self) -> usize {
        self.planar.dim()
    }

    pub fn vertical_part(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        (self.f)(xs)
    }

    pub fn lambda(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        (self.lambda)(xs)
    }

    pub fn eval(&self, xs: &[Vec<f64>]) -> Result<PairValues> {
        Ok(PairValues { phi: map_points(&self.planar, xs)?, f: (self.f)(xs)?, lambda: (self.lambda)(xs)? })
    }

    /// The action `φᵛ∘φ̃`: `(φ(x), x̄ + F(x) + Λ(φ(x)))`.
    pub fn act(&self, p: &HPoint) -> Result<HPoint> {
        let y = self.planar.apply(&p.x);
        let f = (self.f)(std::slice::from_ref(&p.x))?[0];
        let l = (self.lambda)(std::slice::from_ref(&y))?[0];
        Ok(HPoint { x: y, xbar: p.xbar + f + l })
    }

    /// `φʰ = φ̃∘φᵛ`: `(φ(x), x̄ + Λ(x) + F(x))`.
    pub fn horizontal_part(&self, p: &HPoint) -> Result<HPoint> {
        let xs = std::slice::from_ref(&p.x);
        Ok(HPoint { x: self.planar.apply(&p.x), xbar: p.xbar + (self.f)(xs)?[0] + (self.lambda)(xs)?[0] })
    }

    /// CSV rows `x1..x2n, F, Λ`.
    pub fn tabulate(&self, grid: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let v = self.eval(grid)?;
        Ok(grid
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let mut row = x.clone();
                row.push(v.f[i]);
                row.push(v.lambda[i]);
                row
            })
            .collect())
    }
}

/// `a·b = (φ̃_a∘φ̃_b, φᵛ_a∘φ̃_a∘φᵛ_b∘φ̃_a⁻¹)`.
pub fn pair_compose(a: &HamPair, b: &HamPair) -> Result<HamPair> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let planar = a.planar.compose(&b.planar)?;
    let (fa, fb, gb) = (a.f.clone(), b.f.clone(), b.planar.clone());
    let (la, lb, pa) = (a.lambda.clone(), b.lambda.clone(), a.planar.clone());
    Ok(HamPair {
        label: format!("({})*({})", a.label, b.label),
        planar,
        f: Arc::new(move |xs: &[Vec<f64>]| {
            let outer = fa(&map_points(&gb, xs)?)?;
            Ok(outer.iter().zip(fb(xs)?).map(|(u, v)| u + v).collect())
        }),
        lambda: Arc::new(move |xs: &[Vec<f64>]| {
            let pulled = lb(&inverse_points(&pa, xs)?)?;
            Ok(la(xs)?.iter().zip(pulled).map(|(u, v)| u + v).collect())
        }),
    })
}

/// `a⁻¹ = (φ̃⁻¹, Λ' )` with `F'(y) = −F(φ⁻¹y)` and `Λ'(y) = −Λ(φ(y))`.
pub fn pair_inverse(a: &HamPair) -> HamPair {
    let (f, p) = (a.f.clone(), a.planar.clone());
    let (l, p2) = (a.lambda.clone(), a.planar.clone());
    HamPair {
        label: format!("({})^-1", a.label),
        planar: a.planar.inverse_map(),
        f: Arc::new(move |ys: &[Vec<f64>]| Ok(f(&inverse_points(&p, ys)?)?.into_iter().map(|v| -v).collect())),
        lambda: Arc::new(move |ys: &[Vec<f64>]| Ok(l(&map_points(&p2, ys)?)?.into_iter().map(|v| -v).collect())),
    }
}

/// `c·v·c⁻¹`.
pub fn conjugate(c: &HamPair, v: &HamPair) -> Result<HamPair> {
    pair_compose(&pair_compose(c, v)?, &pair_inverse(c))
}

/// Largest deviation of planar part, `F` and `Λ` over `grid`.
pub fn pair_deviation(a: &HamPair, b: &HamPair, grid: &[Vec<f64>]) -> Result<f64> {
    let (u, v) = (a.eval(grid)?, b.eval(grid)?);
    let mut d = 0.0f64;
    for i in 0..grid.len() {
        for (p, q) in u.phi[i].iter().zip(&v.phi[i]) {
            d = d.max((p - q).abs());
        }
        d = d.max((u.f[i] - v.f[i]).abs()).max((u.lambda[i] - v.lambda[i]).abs());
    }
    Ok(d)
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupAxiomReport {
    pub associativity: f64,
    pub left_identity: f64,
    pub right_identity: f64,
    pub inverse: f64,
}

impl GroupAxiomReport {
    pub fn max(&self) -> f64 {
        self.associativity.max(self.left_identity).max(self.right_identity).max(self.inverse)
    }
}

pub fn group_axioms(a: &HamPair, b: &HamPair, c: &HamPair, grid: &[Vec<f64>]) -> Result<GroupAxiomReport> {
    let id = HamPair::identity(a.dim() / 2);
    let ab_c = pair_compose(&pair_compose(a, b)?, c)?;
    let a_bc = pair_compose(a, &pair_compose(b, c)?)?;
    let inv = pair_compose(a, &pair_inverse(a))?;
    let inv2 = pair_compose(&pair_inverse(a), a)?;
    Ok(GroupAxiomReport {
        associativity: pair_deviation(&ab_c, &a_bc, grid)?,
        left_identity: pair_deviation(&pair_compose(&id, a)?, a, grid)?,
        right_identity: pair_deviation(&pair_compose(a, &id)?, a, grid)?,
        inverse: pair_deviation(&inv, &id, grid)?.max(pair_deviation(&inv2, &id, grid)?),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalityReport {
    /// `|φ(x) − x|` of the conjugate.
    pub planar_defect: f64,
    /// `|F|` of the conjugate.
    pub vertical_defect: f64,
}

impl NormalityReport {
    pub fn max(&self) -> f64 {
        self.planar_defect.max(self.vertical_defect)
    }
}

/// Conjugating a vertical-only pair must give a vertical-only pair.
pub fn normality_defect(c: &HamPair, v: &HamPair, grid: &[Vec<f64>]) -> Result<NormalityReport> {
    let k = conjugate(c, v)?;
    let vals = k.eval(grid)?;
    let planar_defect = vals
        .phi
        .iter()
        .zip(grid)
        .flat_map(|(p, x)| p.iter().zip(x).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let vertical_defect = vals.f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(NormalityReport { planar_defect, vertical_defect })
}

/// `max |act(a·b, p) − act(a, act(b, p))|`: whether the printed action is a left action
/// for the printed group law.
pub fn action_compatibility(a: &HamPair, b: &HamPair, points: &[HPoint]) -> Result<f64> {
    let ab = pair_compose(a, b)?;
    let mut worst = 0.0f64;
    for p in points {
        let lhs = ab.act(p)?;
        let rhs = a.act(&b.act(p)?)?;
        worst = worst.max(lhs.coord_dist(&rhs));
    }
    Ok(worst)
}

/// The planar part: the image under the quotient by vertical pairs.
pub fn reduce_to_symplectomorphism(a: &HamPair) -> PlanarMap {
    a.planar.clone()
}

/// `max |reduce(a·b)(x) − reduce(a)(reduce(b)(x))|`.
pub fn reduction_defect(a: &HamPair, b: &HamPair, grid: &[Vec<f64>]) -> Result<f64> {
    let ab = reduce_to_symplectomorphism(&pair_compose(a, b)?);
    let (ra, rb) = (reduce_to_symplectomorphism(a), reduce_to_symplectomorphism(b));
    Ok(grid
        .iter()
        .flat_map(|x| {
            let u = ab.apply(x);
            let v = ra.apply(&rb.apply(x));
            u.into_iter().zip(v).map(|(p, q)| (p - q).abs()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max))
}

/// A path of pairs tabulated on a spatial grid; outer index is time.
#[derive(Debug, Clone, Serialize)]
pub struct HamPath {
    pub times: Vec<f64>,
    pub grid: Vec<Vec<f64>>,
    pub phi: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "F")]
    pub f: Vec<Vec<f64>>,
    #[serde(rename = "Lambda")]
    pub lambda: Vec<Vec<f64>>,
    pub generator: Option<String>,
}

impl HamPath {
    pub fn from_lift_table(table: &LiftTable, generator: Option<String>) -> Self {
        let lambda = (0..table.times.len())
            .map(|k| (0..table.grid.len()).map(|i| table.lambda(k, i)).collect())
            .collect();
        HamPath {
            times: table.times.clone(),
            grid: table.grid.clone(),
            phi: table.phi.clone(),
            f: table.vertical_part.clone(),
            lambda,
            generator,
        }
    }

    /// The flow path `t ↦ (φ̃_t, φᵛ_t)` of `h` on `grid`.
    pub fn from_flow(h: &HamiltonianField, grid: &[Vec<f64>], opts: &LiftTableOptions) -> Result<Self> {
        Ok(Self::from_lift_table(&tabulate_lifts(h, grid, opts)?, Some(h.name.clone())))
    }

    pub fn from_pairs(times: &[f64], pairs: &[HamPair], grid: &[Vec<f64>]) -> Result<Self> {
        if times.len() != pairs.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: pairs.len() });
        }
        let mut path = HamPath {
            times: times.to_vec(),
            grid: grid.to_vec(),
            phi: Vec::new(),
            f: Vec::new(),
            lambda: Vec::new(),
            generator: None,
        };
        for p in pairs {
            let v = p.eval(grid)?;
            path.phi.push(v.phi);
            path.f.push(v.f);
            path.lambda.push(v.lambda);
        }
        Ok(path)
    }

    /// Add `g(t, x)` to `Λ`.
    pub fn perturb_lambda<G: Fn(f64, &[f64]) -> f64>(&mut self, g: G) {
        for (k, &t) in self.times.iter().enumerate() {
            for (i, x) in self.grid.iter().enumerate() {
                self.lambda[k][i] += g(t, x);
            }
        }
    }

    /// Largest neighbor-in-time deviation of the tabulated fields.
    pub fn continuity_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for k in 1..self.times.len() {
            for i in 0..self.grid.len() {
                d = d.max((self.f[k][i] - self.f[k - 1][i]).abs());
                d = d.max((self.lambda[k][i] - self.lambda[k - 1][i]).abs());
                for (a, b) in self.phi[k][i].iter().zip(&self.phi[k - 1][i]) {
                    d = d.max((a - b).abs());
                }
            }
        }
        d
    }

    fn lambda_dot(&self) -> Vec<Vec<f64>> {
        time_derivative(&self.times, &self.lambda)
    }
}

/// `max_grid |Λ̇ + Ḟ − ½ω(φ, φ̇)|` per time.
pub fn horizontality_residual(path: &HamPath) -> Result<Vec<f64>> {
    if path.times.len() < 3 {
        return Err(Error::param("path", "need at least three times"));
    }
    let ld = path.lambda_dot();
    let fd = time_derivative(&path.times, &path.f);
    let dim = path.grid.first().map_or(0, |x| x.len());
    let coord_dots: Vec<Vec<Vec<f64>>> = (0..dim)
        .map(|c| {
            let series: Vec<Vec<f64>> = path.phi.iter().map(|slice| slice.iter().map(|x| x[c]).collect()).collect();
            time_derivative(&path.times, &series)
        })
        .collect();
    Ok((0..path.times.len())
        .map(|k| {
            (0..path.grid.len())
                .map(|i| {
                    let vel: Vec<f64> = (0..dim).map(|c| coord_dots[c][k][i]).collect();
                    (ld[k][i] + fd[k][i] - 0.5 * omega(&path.phi[k][i], &vel)).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect())
}

/// `∫ max_grid |Λ̇_t| dt` for a path horizontal within `tol`.
pub fn path_length(path: &HamPath, tol: f64) -> Result<f64> {
    let resid = horizontality_residual(path)?;
    let worst = resid.iter().copied().fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::NotHorizontal { residual: worst, tolerance: tol });
    }
    let sups: Vec<f64> = path.lambda_dot().iter().map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
    Ok(trapezoid(&path.times, &sups))
}

/// Deviation of `pair(s + t)` from `pair(t)·pair(s)` for the flow of `h`.
pub fn one_parameter_check(
    h: &HamiltonianField,
    s: f64,
    t: f64,
    grid: &[Vec<f64>],
    steps_per_unit: usize,
    panel_length: f64,
) -> Result<f64> {
    if s == 0.0 && t == 0.0 {
        return Ok(0.0);
    }
    let whole = HamPair::flow(h, s + t, steps_per_unit, panel_length)?;
    let ps = HamPair::flow(h, s, steps_per_unit, panel_length)?;
    let pt = HamPair::flow(h, t, steps_per_unit, panel_length)?;
    pair_deviation(&whole, &pair_compose(&pt, &ps)?, grid)
}

#[derive(Debug, Clone)]
pub struct DistOptions {
    /// Points where endpoints are compared.
    pub sample_grid: Vec<Vec<f64>>,
    pub eta: f64,
    /// Evaluate at most this many family members.
    pub budget: usize,
    /// Flow steps for endpoint pairs, per unit time.
    pub steps_per_unit: usize,
    pub panel_length: f64,
    /// Spatial grid points per axis over the generator support, for path lengths.
    pub grid_per_axis: usize,
    /// Time discretization of the length integral.
    pub path_steps: usize,
    pub path_store_every: usize,
    pub horizontality_tol: f64,
}

impl DistOptions {
    pub fn new(sample_grid: Vec<Vec<f64>>) -> Self {
        DistOptions {
            sample_grid,
            eta: ENDPOINT_TOL,
            budget: 16,
            steps_per_unit: 1024,
            panel_length: 0.15,
            grid_per_axis: 9,
            path_steps: 512,
            path_store_every: 8,
            horizontality_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub index: usize,
    pub label: String,
    pub endpoint_gap: f64,
    pub feasible: bool,
    pub length: Option<f64>,
    /// Hofer length of the generator on the same grid and times.
    pub hofer_length: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistReport {
    pub upper: f64,
    /// Index of the best candidate; `None` for the constant path.
    pub argmin: Option<usize>,
    pub endpoint_gap: f64,
    pub eta: f64,
    pub candidates: Vec<Candidate>,
}

/// Feasible upper bound for the path distance from `a` to `b`: each family member `H`
/// generates the path `t ↦ pair_t(H)·a`, feasible when its endpoint matches `b`
/// within `eta`; its length is the length of the flow path.
pub fn dist_estimate(a: &HamPair, b: &HamPair, family: &[HamiltonianField], opts: &DistOptions) -> Result<DistReport> {
    let mut best: Option<(f64, Option<usize>, f64)> = None;
    let constant_gap = pair_deviation(a, b, &opts.sample_grid)?;
    if constant_gap <= opts.eta {
        best = Some((0.0, None, constant_gap));
    }
    let mut candidates = Vec::new();
    for (index, h) in family.iter().take(opts.budget).enumerate() {
        let end = pair_compose(&HamPair::flow(h, 1.0, opts.steps_per_unit, opts.panel_length)?, a)?;
        let gap = pair_deviation(&end, b, &opts.sample_grid)?;
        let feasible = gap <= opts.eta;
        let (mut length, mut hofer) = (None, None);
        if feasible {
            let grid = support_grid(h, opts.grid_per_axis);
            let path = HamPath::from_flow(h, &grid, &LiftTableOptions {
                t_end: 1.0,
                steps: opts.path_steps,
                store_every: opts.path_store_every,
                panel_length: opts.panel_length,
                witness: 0,
            })?;
            let l = path_length(&path, opts.horizontality_tol)?;
            hofer = Some(hofer_length(h, &grid, &path.times)?);
            length = Some(l);
            if best.as_ref().is_none_or(|b| l < b.0) {
                best = Some((l, Some(index), gap));
            }
        }
        candidates.push(Candidate { index, label: h.name.clone(), endpoint_gap: gap, feasible, length, hofer_length: hofer });
    }
    let (upper, argmin, endpoint_gap) =
        best.ok_or_else(|| Error::Infeasible("no family member reaches the target pair".into()))?;
    Ok(DistReport { upper, argmin, endpoint_gap, eta: opts.eta, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{regular_grid, Builtin, TimeProfile};
    use crate::lifting::{lift_symplectomorphism, LiftOptions};

    fn grid() -> Vec<Vec<f64>> {
        regular_grid(&[-0.8, -0.6], &[0.7, 0.9], 4)
    }

    fn rotation(theta: f64) -> LiftedMap {
        let (c, s) = (theta.cos(), theta.sin());
        let a = nalgebra::DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        lift_symplectomorphism(&PlanarMap::linear(a).unwrap(), 0.0, None, &LiftOptions::default()).unwrap()
    }

    fn shear() -> LiftedMap {
        let f = PlanarMap::new(2, |x: &[f64]| vec![x[0], x[1] + x[0].powi(3)])
            .unwrap()
            .with_inverse(|y: &[f64]| Ok(vec![y[0], y[1] - y[0].powi(3)]));
        lift_symplectomorphism(&f, 0.2, Some(&[0.0, 0.0]), &LiftOptions::default()).unwrap()
    }

    #[test]
    fn vertical_pairs_add() {
        let a = HamPair::vertical_only(1, |x| x[0] * x[1]);
        let b = HamPair::vertical_only(1, |x| x[0].sin());
        let ab = pair_compose(&a, &b).unwrap();
        let g = grid();
        let v = ab.eval(&g).unwrap();
        for (i, x) in g.iter().enumerate() {
            assert!((v.lambda[i] - x[0] * x[1] - x[0].sin()).abs() < 1e-15);
        }
        let inv = pair_inverse(&a).eval(&g).unwrap();
        assert!(inv.lambda.iter().zip(&g).all(|(l, x)| (l + x[0] * x[1]).abs() < 1e-15));
    }

    #[test]
    fn axioms_on_lifted_pairs() {
        let a = HamPair::from_lift(&rotation(0.7), |x| x[0].powi(2));
        let b = HamPair::from_lift(&shear(), |x| (x[1] - 0.1).sin());
        let c = HamPair::from_lift(&rotation(-1.9), |x| 0.3 * x[0] * x[1]);
        let rep = group_axioms(&a, &b, &c, &grid()).unwrap();
        assert!(rep.max() < 1e-8, "{rep:?}");
        assert!(pair_deviation(&pair_compose(&a, &pair_inverse(&a)).unwrap(), &HamPair::identity(1), &grid()).unwrap() < 1e-8);
    }

    #[test]
    fn normal_and_reducing() {
        let c = HamPair::from_lift(&shear(), |x| x[0]);
        let v = HamPair::vertical_only(1, |x| (x[0] + 2.0 * x[1]).cos());
        assert!(normality_defect(&c, &v, &grid()).unwrap().max() < 1e-10);
        let b = HamPair::from_lift(&rotation(0.4), |_| 1.0);
        assert!(reduction_defect(&c, &b, &grid()).unwrap() < 1e-10);
        let pts: Vec<HPoint> = grid().into_iter().map(|x| HPoint { x, xbar: 0.3 }).collect();
        assert!(action_compatibility(&c, &b, &pts).unwrap() < 1e-10);
    }

    #[test]
    fn constant_path_is_horizontal_with_zero_length() {
        let p = HamPair::from_lift(&shear(), |x| x[0]);
        let times = [0.0, 0.5, 1.0];
        let path = HamPath::from_pairs(&times, &[p.clone(), p.clone(), p], &grid()).unwrap();
        assert!(horizontality_residual(&path).unwrap().iter().all(|r| *r == 0.0));
        assert_eq!(path_length(&path, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn perturbed_path_is_not_horizontal() {
        let h = HamiltonianField::from_builtin(&Builtin::harmonic(1, 1.0), TimeProfile::Constant).unwrap();
        let g = regular_grid(&[-0.5, -0.5], &[0.5, 0.5], 3);
        let opts = LiftTableOptions { steps: 128, store_every: 4, ..Default::default() };
        let mut path = HamPath::from_flow(&h, &g, &opts).unwrap();
        let base = horizontality_residual(&path).unwrap().into_iter().fold(0.0, f64::max);
        assert!(base < 1e-3);
        let eps = 0.01;
        path.perturb_lambda(|t, x| t * eps * (-x.iter().map(|v| v * v).sum::<f64>()).exp());
        let r = horizontality_residual(&path).unwrap().into_iter().fold(0.0, f64::max);
        assert!((r - eps).abs() < 2e-3, "{r}");
        assert!(matches!(path_length(&path, 1e-3), Err(Error::NotHorizontal { .. })));
    }

    #[test]
    fn identity_distance_is_zero() {
        let a = HamPair::from_lift(&shear(), |x| x[0]);
        let rep = dist_estimate(&a, &a, &[], &DistOptions::new(grid())).unwrap();
        assert_eq!(rep.upper, 0.0);
        assert!(rep.argmin.is_none());
    }
}
