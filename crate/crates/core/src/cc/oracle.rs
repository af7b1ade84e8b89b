//! Discretized geodesic search, independent of the arc characterization.
//!
//! A path from the origin is a polygon `c_0 = 0, c_1, …, c_K = x` in R^{2n}; its
//! lift is exact for polygons, `Δx̄_k = ½ω(c_k, c_{k+1})`, so horizontality holds by
//! construction. The end height is imposed with an augmented Lagrangian while the
//! discrete energy `K Σ|c_{k+1} − c_k|²` is minimized by L-BFGS. At a minimizer the
//! polygon has constant speed, so energy and squared length agree.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::heis::{apply_j, omega, sum_norm, HPoint};
use crate::optim::{lbfgs, LbfgsOptions};
use crate::rng;

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub segments: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { segments: 64, restarts: 8, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct OracleResult {
    pub length: f64,
    /// Polygon vertices `c_0..c_K` of the horizontal projection, in target scale.
    pub vertices: Vec<Vec<f64>>,
    pub converged: bool,
}

struct Problem<'a> {
    k: usize,
    dim: usize,
    end: &'a [f64],
    z: f64,
    /// Orthonormal sine basis `√(2/K) sin(mπi/K)`, row `m−1`, column `i−1`.
    basis: Vec<f64>,
    /// `1/√λ_m` for the eigenvalues of the energy Hessian.
    scale: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(k: usize, dim: usize, end: &'a [f64], z: f64) -> Self {
        let kf = k as f64;
        let norm = (2.0 / kf).sqrt();
        let mut basis = Vec::with_capacity((k - 1) * (k - 1));
        for m in 1..k {
            for i in 1..k {
                basis.push(norm * (std::f64::consts::PI * (m * i) as f64 / kf).sin());
            }
        }
        let scale = (1..k)
            .map(|m| {
                let lam = 2.0 * kf * (2.0 - 2.0 * (std::f64::consts::PI * m as f64 / kf).cos());
                1.0 / lam.sqrt()
            })
            .collect();
        Problem { k, dim, end, z, basis, scale }
    }

    /// Interior vertices from whitened sine coefficients.
    fn to_vertices(&self, y: &[f64]) -> Vec<f64> {
        let (k, dim) = (self.k, self.dim);
        let mut c = vec![0.0; (k - 1) * dim];
        for m in 0..k - 1 {
            let row = &self.basis[m * (k - 1)..(m + 1) * (k - 1)];
            let ym = &y[m * dim..(m + 1) * dim];
            for (i, b) in row.iter().enumerate() {
                let w = b * self.scale[m];
                for d in 0..dim {
                    c[i * dim + d] += w * ym[d];
                }
            }
        }
        for i in 1..k {
            let s = i as f64 / k as f64;
            for d in 0..dim {
                c[(i - 1) * dim + d] += s * self.end[d];
            }
        }
        c
    }

    fn from_vertices(&self, c: &[f64]) -> Vec<f64> {
        let (k, dim) = (self.k, self.dim);
        let mut y = vec![0.0; (k - 1) * dim];
        for m in 0..k - 1 {
            let row = &self.basis[m * (k - 1)..(m + 1) * (k - 1)];
            for (i, b) in row.iter().enumerate() {
                let s = (i + 1) as f64 / k as f64;
                for d in 0..dim {
                    y[m * dim + d] += b * (c[i * dim + d] - s * self.end[d]) / self.scale[m];
                }
            }
        }
        y
    }

    fn lagrangian_white(&self, y: &[f64], grad: &mut [f64], nu: f64, mu: f64) -> f64 {
        let (k, dim) = (self.k, self.dim);
        let c = self.to_vertices(y);
        let mut gc = vec![0.0; c.len()];
        let val = self.lagrangian(&c, &mut gc, nu, mu);
        grad.iter_mut().for_each(|v| *v = 0.0);
        for m in 0..k - 1 {
            let row = &self.basis[m * (k - 1)..(m + 1) * (k - 1)];
            let out = &mut grad[m * dim..(m + 1) * dim];
            for (i, b) in row.iter().enumerate() {
                let w = b * self.scale[m];
                for d in 0..dim {
                    out[d] += w * gc[i * dim + d];
                }
            }
        }
        val
    }
}

impl Problem<'_> {
    fn vertex<'b>(&'b self, vars: &'b [f64], i: usize) -> &'b [f64] {
        if i == 0 {
            &ZERO[..self.dim]
        } else if i == self.k {
            self.end
        } else {
            &vars[(i - 1) * self.dim..i * self.dim]
        }
    }

    fn energy_and_area(&self, vars: &[f64]) -> (f64, f64) {
        let mut e = 0.0;
        let mut area = 0.0;
        for i in 0..self.k {
            let a = self.vertex(vars, i);
            let b = self.vertex(vars, i + 1);
            e += a.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum::<f64>();
            area += 0.5 * omega(a, b);
        }
        (self.k as f64 * e, area)
    }

    fn length(&self, vars: &[f64]) -> f64 {
        (0..self.k)
            .map(|i| {
                let a = self.vertex(vars, i);
                let b = self.vertex(vars, i + 1);
                a.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum::<f64>().sqrt()
            })
            .sum()
    }

    /// Augmented Lagrangian `E − ν g + (μ/2) g²`, `g = area − z`.
    fn lagrangian(&self, vars: &[f64], grad: &mut [f64], nu: f64, mu: f64) -> f64 {
        let (e, area) = self.energy_and_area(vars);
        let g = area - self.z;
        let coef = -nu + mu * g;
        let kf = self.k as f64;
        for i in 1..self.k {
            let prev = self.vertex(vars, i - 1);
            let cur = self.vertex(vars, i);
            let next = self.vertex(vars, i + 1);
            let jp = apply_j(prev);
            let jn = apply_j(next);
            let out = &mut grad[(i - 1) * self.dim..i * self.dim];
            for d in 0..self.dim {
                let de = 2.0 * kf * (2.0 * cur[d] - prev[d] - next[d]);
                let dg = 0.5 * (jp[d] - jn[d]);
                out[d] = de + coef * dg;
            }
        }
        e - nu * g + 0.5 * mu * g * g
    }
}

const ZERO: [f64; 64] = [0.0; 64];

fn initial_guess(problem: &Problem, seed: u64, start: usize) -> Vec<f64> {
    let mut r = rng::seeded(rng::derive_seed(seed, start as u64));
    let dim = problem.dim;
    // a small amplitude on the first start keeps it off the straight-line saddle
    let amp = if start == 0 { 0.05 } else { 0.6 };
    let modes: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..dim).map(|_| amp * r.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mut vars = Vec::with_capacity((problem.k - 1) * dim);
    for i in 1..problem.k {
        let s = i as f64 / problem.k as f64;
        let pi = std::f64::consts::PI;
        for d in 0..dim {
            let mut v = s * problem.end[d];
            v += modes[0][d] * (pi * s).sin() + modes[1][d] * (2.0 * pi * s).sin();
            v += modes[2][d] * (1.0 - (2.0 * pi * s).cos()) + modes[3][d] * (3.0 * pi * s).sin();
            vars.push(v);
        }
    }
    vars
}

fn solve_one(problem: &Problem, start: Vec<f64>) -> (Vec<f64>, f64) {
    let mut vars = problem.from_vertices(&start);
    let mut nu = 0.0;
    let mut mu = 10.0;
    let mut last_g = f64::INFINITY;
    for _ in 0..20 {
        let res = lbfgs(
            |y, g| problem.lagrangian_white(y, g, nu, mu),
            vars,
            LbfgsOptions { memory: 10, max_iter: 400, grad_tol: 1e-10, rel_ftol: 1e-13 },
        );
        vars = res;
        let (_, area) = problem.energy_and_area(&problem.to_vertices(&vars));
        let g = area - problem.z;
        if g.abs() < 1e-9 {
            last_g = g;
            break;
        }
        nu -= mu * g;
        if g.abs() > 0.25 * last_g.abs() {
            mu = (mu * 10.0).min(1e4);
        }
        last_g = g;
    }
    (problem.to_vertices(&vars), last_g.abs())
}

/// Shortest horizontal polygon from the origin to `g` over seeded restarts.
pub(crate) fn optimize_from_origin(g: &HPoint, opts: OracleOptions) -> OracleResult {
    let dim = g.x.len();
    assert!(dim <= ZERO.len(), "dimension too large for the oracle");
    let scale = sum_norm(g);
    if scale == 0.0 {
        return OracleResult {
            length: 0.0,
            vertices: vec![vec![0.0; dim]; opts.segments + 1],
            converged: true,
        };
    }
    // work on the dilated target of unit Sum norm
    let s = 1.0 / scale;
    let end: Vec<f64> = g.x.iter().map(|v| v * s).collect();
    let problem = Problem::new(opts.segments, dim, &end, g.xbar * s * s);

    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    let mut best_infeasible: Option<(f64, Vec<f64>, f64)> = None;
    for start in 0..opts.restarts.max(1) {
        let (vars, resid) = solve_one(&problem, initial_guess(&problem, opts.seed, start));
        let len = problem.length(&vars);
        let slot = if resid < 1e-8 { &mut best } else { &mut best_infeasible };
        if slot.as_ref().is_none_or(|(l, _, _)| len < *l) {
            *slot = Some((len, vars, resid));
        }
    }
    let converged = best.is_some();
    let (len, vars, _) = best.or(best_infeasible).expect("at least one restart");
    let vertices = (0..=problem.k)
        .map(|i| problem.vertex(&vars, i).iter().map(|v| v / s).collect())
        .collect();
    OracleResult { length: len / s, vertices, converged }
}
