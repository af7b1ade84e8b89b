use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heis::{apply_j, AxisBox};
use crate::rng;

type ScalarFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// `exp(−1/u)` for `u > 0`, and its derivative.
fn psi(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        (0.0, 0.0)
    } else {
        let e = (-1.0 / u).exp();
        (e, e / (u * u))
    }
}

/// C^∞ cutoff equal to 1 on `r ≤ inner` and 0 on `r ≥ outer`, with `dW/dr`.
pub fn smooth_window(r: f64, inner: f64, outer: f64) -> (f64, f64) {
    if r <= inner {
        return (1.0, 0.0);
    }
    if r >= outer {
        return (0.0, 0.0);
    }
    let w = outer - inner;
    let s = (r - inner) / w;
    let (a, da) = psi(1.0 - s);
    let (b, db) = psi(s);
    let sum = a + b;
    let val = a / sum;
    let dval = (-da * b - a * db) / (sum * sum) / w;
    (val, dval)
}

/// Time profile multiplying a spatial Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TimeProfile {
    #[default]
    Constant,
    /// `4·min(t, 1 − t)` on `[0, 1]`, zero elsewhere.
    Triangular,
}

impl TimeProfile {
    pub fn at(self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Triangular => 4.0 * t.min(1.0 - t).max(0.0),
        }
    }
}

/// Named Hamiltonians that scenarios can reference without code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Builtin {
    Zero { n: usize },
    /// `scale·½|x|²·W(|x|)`.
    Harmonic { n: usize, scale: f64, inner: f64, outer: f64 },
    /// `amplitude·exp(1 − 1/(1 − s²))`, `s = |x − center|/radius`.
    Bump { center: Vec<f64>, radius: f64, amplitude: f64 },
    /// `speed·p₁·W(|x − center|)`; the flow shifts `q₁` by `speed` per unit time
    /// where the window is 1.
    Translation { center: Vec<f64>, speed: f64, inner: f64, outer: f64 },
}

impl Builtin {
    /// Window radii of the standard oscillator; the window is wide enough that the
    /// angular speed `W + ½rW'` stays in `[−1, 1]`, so no orbit is faster than the core.
    pub const HARMONIC_INNER: f64 = 1.0;
    pub const HARMONIC_OUTER: f64 = 3.0;

    pub fn harmonic(n: usize, scale: f64) -> Self {
        Builtin::Harmonic { n, scale, inner: Self::HARMONIC_INNER, outer: Self::HARMONIC_OUTER }
    }
}

/// A Hamiltonian `H(t, x)` on R^{2n} with compact support.
#[derive(Clone)]
pub struct HamiltonianField {
    pub name: String,
    n: usize,
    h: Arc<ScalarFn>,
    grad: Option<Arc<GradFn>>,
    pub support: AxisBox,
    pub time_range: (f64, f64),
    pub autonomous: bool,
}

impl std::fmt::Debug for HamiltonianField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianField")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("support", &self.support)
            .field("time_range", &self.time_range)
            .field("autonomous", &self.autonomous)
            .finish()
    }
}

impl HamiltonianField {
    /// A user field; without `grad` the gradient is taken by central differences.
    pub fn new<H>(name: impl Into<String>, n: usize, support: AxisBox, autonomous: bool, h: H) -> Result<Self>
    where
        H: Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::param("n", "must be positive"));
        }
        if support.dim() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: support.dim() });
        }
        Ok(HamiltonianField {
            name: name.into(),
            n,
            h: Arc::new(h),
            grad: None,
            support,
            time_range: (0.0, 1.0),
            autonomous,
        })
    }

    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    pub fn with_time_range(mut self, t0: f64, t1: f64) -> Self {
        self.time_range = (t0, t1);
        self
    }

    pub fn from_builtin(spec: &Builtin, profile: TimeProfile) -> Result<Self> {
        let autonomous = profile == TimeProfile::Constant;
        let field = match spec.clone() {
            Builtin::Zero { n } => HamiltonianField::new("zero", n, AxisBox::cube(2 * n, 1.0), true, |_, _| 0.0)?
                .with_gradient(move |_, x| vec![0.0; x.len()]),
            Builtin::Harmonic { n, scale, inner, outer } => {
                check_window(inner, outer)?;
                HamiltonianField::new("harmonic", n, AxisBox::cube(2 * n, outer), autonomous, move |t, x| {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    profile.at(t) * scale * 0.5 * r2 * smooth_window(r2.sqrt(), inner, outer).0
                })?
                .with_gradient(move |t, x| {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let (w, dw) = smooth_window(r, inner, outer);
                    let c = profile.at(t) * scale * (w + 0.5 * r * dw);
                    x.iter().map(|v| c * v).collect()
                })
            }
            Builtin::Bump { center, radius, amplitude } => {
                if !(radius > 0.0) || center.is_empty() || center.len() % 2 != 0 {
                    return Err(Error::param("bump", "needs a positive radius and an even-dimensional center"));
                }
                let n = center.len() / 2;
                let support = AxisBox::new(
                    center.iter().map(|c| c - radius).collect(),
                    center.iter().map(|c| c + radius).collect(),
                )?;
                let c2 = center.clone();
                HamiltonianField::new("bump", n, support, autonomous, move |t, x| {
                    let s2 = dist2(x, &center) / (radius * radius);
                    if s2 >= 1.0 {
                        0.0
                    } else {
                        profile.at(t) * amplitude * (1.0 - 1.0 / (1.0 - s2)).exp()
                    }
                })?
                .with_gradient(move |t, x| {
                    let s2 = dist2(x, &c2) / (radius * radius);
                    if s2 >= 1.0 {
                        return vec![0.0; x.len()];
                    }
                    let b = (1.0 - 1.0 / (1.0 - s2)).exp();
                    let k = profile.at(t) * amplitude * -2.0 * b / ((1.0 - s2).powi(2) * radius * radius);
                    x.iter().zip(&c2).map(|(v, c)| k * (v - c)).collect()
                })
            }
            Builtin::Translation { center, speed, inner, outer } => {
                check_window(inner, outer)?;
                if center.is_empty() || center.len() % 2 != 0 {
                    return Err(Error::param("center", "must be even-dimensional"));
                }
                let n = center.len() / 2;
                let support = AxisBox::new(
                    center.iter().map(|c| c - outer).collect(),
                    center.iter().map(|c| c + outer).collect(),
                )?;
                let c2 = center.clone();
                HamiltonianField::new("translation", n, support, autonomous, move |t, x| {
                    let r = dist2(x, &center).sqrt();
                    profile.at(t) * speed * x[n] * smooth_window(r, inner, outer).0
                })?
                .with_gradient(move |t, x| {
                    let r = dist2(x, &c2).sqrt();
                    let (w, dw) = smooth_window(r, inner, outer);
                    let m = profile.at(t) * speed;
                    let mut g: Vec<f64> = if r > 0.0 {
                        x.iter().zip(&c2).map(|(v, c)| m * x[n] * dw * (v - c) / r).collect()
                    } else {
                        vec![0.0; x.len()]
                    };
                    g[n] += m * w;
                    g
                })
            }
        };
        Ok(field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        (self.h)(t, x)
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn gradient(&self, t: f64, x: &[f64]) -> Vec<f64> {
        match &self.grad {
            Some(g) => g(t, x),
            None => self.fd_gradient(t, x),
        }
    }

    pub fn fd_gradient(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut xp = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = 1e-5 * x[i].abs().max(1.0);
                xp[i] = x[i] + h;
                let a = self.value(t, &xp);
                xp[i] = x[i] - h;
                let b = self.value(t, &xp);
                xp[i] = x[i];
                (a - b) / (2.0 * h)
            })
            .collect()
    }

    /// `ẋ = −J∇H`, i.e. `q̇ = ∂H/∂p`, `ṗ = −∂H/∂q`.
    pub fn vector_field(&self, t: f64, x: &[f64]) -> Vec<f64> {
        apply_j(&self.gradient(t, x)).into_iter().map(|v| -v).collect()
    }

    /// Linearized field `−J·∇²H(t, x)·v`, by central differences of the gradient.
    pub fn linearized(&self, t: f64, x: &[f64], v: &[f64]) -> Vec<f64> {
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if vn == 0.0 {
            return vec![0.0; v.len()];
        }
        let xn = x.iter().fold(1.0f64, |m, a| m.max(a.abs()));
        let eps = 1e-6 * xn / vn;
        let a: Vec<f64> = x.iter().zip(v).map(|(p, d)| p + eps * d).collect();
        let b: Vec<f64> = x.iter().zip(v).map(|(p, d)| p - eps * d).collect();
        let ga = self.gradient(t, &a);
        let gb = self.gradient(t, &b);
        let hv: Vec<f64> = ga.iter().zip(&gb).map(|(p, q)| (p - q) / (2.0 * eps)).collect();
        apply_j(&hv).into_iter().map(|c| -c).collect()
    }

    /// `m·H`.
    pub fn scaled(&self, m: f64) -> Self {
        let h = self.h.clone();
        let mut out = self.clone();
        out.name = format!("{}*{m}", self.name);
        out.h = Arc::new(move |t, x| m * h(t, x));
        out.grad = self.grad.clone().map(|g| {
            let f: Arc<GradFn> = Arc::new(move |t, x| g(t, x).into_iter().map(|v| m * v).collect());
            f
        });
        out
    }

    /// `(t, x) ↦ −H(T − t, x)`, generating the inverse path run forward.
    pub fn time_reversed(&self, total: f64) -> Self {
        let h = self.h.clone();
        let mut out = self.clone();
        out.name = format!("{}-reversed", self.name);
        out.h = Arc::new(move |t, x| -h(total - t, x));
        out.grad = self.grad.clone().map(|g| {
            let f: Arc<GradFn> = Arc::new(move |t, x| g(total - t, x).into_iter().map(|v| -v).collect());
            f
        });
        out
    }

    /// Max `|H(t, ·)|` over grid points.
    pub fn grid_sup(&self, t: f64, grid: &[Vec<f64>]) -> f64 {
        grid.iter().map(|x| self.value(t, x).abs()).fold(0.0, f64::max)
    }

    /// Largest `|H|` on samples just outside the support box.
    pub fn support_violation(&self, samples: usize, seed: u64) -> f64 {
        let b = &self.support;
        let mut r = rng::seeded(seed);
        let dim = self.dim();
        let mut worst = 0.0f64;
        for k in 0..samples {
            let pad: Vec<f64> = b.lo.iter().zip(&b.hi).map(|(l, h)| 0.05 * (h - l).max(1e-3)).collect();
            let mut x: Vec<f64> =
                (0..dim).map(|i| rng::uniform_in(&mut r, b.lo[i] - pad[i], b.hi[i] + pad[i])).collect();
            let axis = k % dim;
            x[axis] = if k / dim % 2 == 0 { b.lo[axis] - 1e-9 } else { b.hi[axis] + 1e-9 };
            let t = rng::uniform_in(&mut r, self.time_range.0, self.time_range.1);
            worst = worst.max(self.value(t, &x).abs());
        }
        worst
    }

    /// Largest gap between the declared gradient and central differences.
    pub fn gradient_check(&self, probes: usize, seed: u64) -> f64 {
        let mut r = rng::seeded(seed);
        let mut worst = 0.0f64;
        for _ in 0..probes {
            let x = rng::uniform_vec(&mut r, &self.support.lo, &self.support.hi);
            let t = rng::uniform_in(&mut r, self.time_range.0, self.time_range.1);
            let a = self.gradient(t, &x);
            let b = self.fd_gradient(t, &x);
            worst = a.iter().zip(&b).fold(worst, |m, (u, v)| m.max((u - v).abs()));
        }
        worst
    }
}

fn check_window(inner: f64, outer: f64) -> Result<()> {
    if !(inner >= 0.0 && outer > inner) {
        return Err(Error::param("window", "need 0 <= inner < outer"));
    }
    Ok(())
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_is_smooth_step() {
        assert_eq!(smooth_window(0.5, 1.0, 2.0), (1.0, 0.0));
        assert_eq!(smooth_window(2.5, 1.0, 2.0), (0.0, 0.0));
        let (w, dw) = smooth_window(1.5, 1.0, 2.0);
        assert!((w - 0.5).abs() < 1e-15);
        assert!((dw + 2.0).abs() < 1e-12);
        let h = 1e-6;
        let fd = (smooth_window(1.3 + h, 1.0, 2.0).0 - smooth_window(1.3 - h, 1.0, 2.0).0) / (2.0 * h);
        assert!((fd - smooth_window(1.3, 1.0, 2.0).1).abs() < 1e-8);
    }

    #[test]
    fn builtin_gradients_match_differences() {
        let specs = [
            Builtin::Harmonic { n: 1, scale: 1.0, inner: 1.0, outer: 2.0 },
            Builtin::Bump { center: vec![0.2, -0.1], radius: 0.8, amplitude: 2.0 },
            Builtin::Translation { center: vec![0.5, 0.0], speed: 1.0, inner: 1.0, outer: 1.5 },
            Builtin::Harmonic { n: 2, scale: 0.5, inner: 0.5, outer: 1.0 },
        ];
        for s in &specs {
            for p in [TimeProfile::Constant, TimeProfile::Triangular] {
                let h = HamiltonianField::from_builtin(s, p).unwrap();
                assert!(h.gradient_check(50, 1) < 1e-7, "{s:?}");
                assert_eq!(h.support_violation(40, 2), 0.0, "{s:?}");
            }
        }
    }

    #[test]
    fn rotation_direction() {
        let h = HamiltonianField::from_builtin(
            &Builtin::Harmonic { n: 1, scale: 1.0, inner: 2.0, outer: 3.0 },
            TimeProfile::Constant,
        )
        .unwrap();
        // q̇ = p, ṗ = −q
        assert_eq!(h.vector_field(0.0, &[1.0, 0.0]), vec![0.0, -1.0]);
        assert_eq!(h.vector_field(0.0, &[0.0, 1.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn bump_peak_and_profile() {
        let h = HamiltonianField::from_builtin(
            &Builtin::Bump { center: vec![0.0, 0.0], radius: 1.0, amplitude: 2.0 },
            TimeProfile::Triangular,
        )
        .unwrap();
        assert_eq!(h.value(0.5, &[0.0, 0.0]), 4.0);
        assert_eq!(h.value(0.25, &[0.0, 0.0]), 2.0);
        assert_eq!(h.value(0.25, &[1.0, 0.0]), 0.0);
        assert!(!h.autonomous);
    }
}
