//! Composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..m {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = m as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Composite rule on [0, 1]: `panels` equal panels of 16 Gauss nodes each.
/// Returns `(s, w)` pairs with `Σ w = 1`.
pub fn composite_unit(panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gl16();
    let h = 1.0 / panels as f64;
    let mut out = Vec::with_capacity(panels * x.len());
    for k in 0..panels {
        let a = k as f64 * h;
        for (xi, wi) in x.iter().zip(w) {
            out.push((a + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        for deg in 0..32 {
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let q: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(deg)).sum();
            assert!((q - exact).abs() < 1e-13, "deg {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn composite_weights() {
        let r = composite_unit(4);
        assert_eq!(r.len(), 64);
        let s: f64 = r.iter().map(|(_, w)| w).sum();
        assert!((s - 1.0).abs() < 1e-14);
        let q: f64 = r.iter().map(|(s, w)| w * (3.0 * s).sin()).sum();
        assert!((q - (1.0 - 3f64.cos()) / 3.0).abs() < 1e-14);
    }
}
