//! Autonomous Hamiltonians given as values on a tensor grid.

use std::sync::Arc;

use super::field::HamiltonianField;
use crate::error::{Error, Result};
use crate::heis::AxisBox;

/// Boundary values above this are rejected: the interpolant must vanish off the grid.
pub const TABLE_BOUNDARY_TOL: f64 = 1e-12;

/// Multilinear interpolant on a tensor grid, zero outside it.
#[derive(Debug, Clone)]
pub struct GridTable {
    axes: Vec<Vec<f64>>,
    /// Row-major, last axis fastest.
    values: Vec<f64>,
}

impl GridTable {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::param("axes", "need at least one axis"));
        }
        for a in &axes {
            if a.len() < 2 || a.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::param("axes", "each axis needs two or more increasing nodes"));
            }
        }
        let count: usize = axes.iter().map(Vec::len).product();
        if values.len() != count {
            return Err(Error::DimensionMismatch { expected: count, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("table values"));
        }
        let t = GridTable { axes, values };
        let worst = t.boundary_max();
        if worst > TABLE_BOUNDARY_TOL {
            return Err(Error::Validation(format!(
                "tabulated Hamiltonian must vanish on the grid boundary (found |H| = {worst:e})"
            )));
        }
        Ok(t)
    }

    /// Rows `x₁ … x_d, H` covering every node of a tensor grid once, in any order.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width < 2 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::param("table", "rows need equal length with at least one coordinate and a value"));
        }
        let d = width - 1;
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let mut a: Vec<f64> = rows.iter().map(|r| r[k]).collect();
                a.sort_by(f64::total_cmp);
                a.dedup();
                a
            })
            .collect();
        let count: usize = axes.iter().map(Vec::len).product();
        if count != rows.len() {
            return Err(Error::Validation(format!(
                "table rows do not form a tensor grid ({} rows, {count} nodes)",
                rows.len()
            )));
        }
        let mut values = vec![f64::NAN; count];
        for r in rows {
            let mut flat = 0;
            for (k, a) in axes.iter().enumerate() {
                let i = a.partition_point(|v| *v < r[k]);
                flat = flat * a.len() + i;
            }
            if !values[flat].is_nan() {
                return Err(Error::Validation("duplicate node in table".into()));
            }
            values[flat] = r[d];
        }
        GridTable::new(axes, values)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn bounds(&self) -> AxisBox {
        AxisBox {
            lo: self.axes.iter().map(|a| a[0]).collect(),
            hi: self.axes.iter().map(|a| a[a.len() - 1]).collect(),
        }
    }

    fn boundary_max(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut idx = vec![0usize; self.dim()];
        for v in &self.values {
            if idx.iter().zip(&self.axes).any(|(i, a)| *i == 0 || *i + 1 == a.len()) {
                worst = worst.max(v.abs());
            }
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        worst
    }

    /// Cell index and local coordinate per axis; `None` off the grid.
    fn locate(&self, x: &[f64]) -> Option<Vec<(usize, f64, f64)>> {
        self.axes
            .iter()
            .zip(x)
            .map(|(a, v)| {
                if !(*v >= a[0] && *v <= a[a.len() - 1]) {
                    return None;
                }
                let i = (a.partition_point(|n| n <= v).max(1) - 1).min(a.len() - 2);
                let h = a[i + 1] - a[i];
                Some((i, (v - a[i]) / h, h))
            })
            .collect()
    }

    fn corner_sum(&self, cells: &[(usize, f64, f64)], deriv: Option<usize>) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for mask in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for (k, &(i, u, h)) in cells.iter().enumerate() {
                let up = mask >> k & 1 == 1;
                w *= match (deriv == Some(k), up) {
                    (true, true) => 1.0 / h,
                    (true, false) => -1.0 / h,
                    (false, true) => u,
                    (false, false) => 1.0 - u,
                };
                flat = flat * self.axes[k].len() + i + usize::from(up);
            }
            acc += w * self.values[flat];
        }
        acc
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.locate(x).map_or(0.0, |c| self.corner_sum(&c, None))
    }

    /// Gradient of the interpolant inside a cell (one-sided on cell faces).
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self.locate(x) {
            Some(c) => (0..self.dim()).map(|k| self.corner_sum(&c, Some(k))).collect(),
            None => vec![0.0; x.len()],
        }
    }

    pub fn into_field(self, name: impl Into<String>) -> Result<HamiltonianField> {
        let d = self.dim();
        if d % 2 != 0 {
            return Err(Error::param("table", "phase space must be even-dimensional"));
        }
        let t = Arc::new(self);
        let g = Arc::clone(&t);
        Ok(HamiltonianField::new(name, d / 2, t.bounds(), true, move |_, x| t.value(x))?
            .with_gradient(move |_, x| g.gradient(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent_rows(k: usize) -> Vec<Vec<f64>> {
        let mut rows = Vec::new();
        for i in 0..=k {
            for j in 0..=k {
                let (q, p) = (-1.0 + 2.0 * i as f64 / k as f64, -1.0 + 2.0 * j as f64 / k as f64);
                rows.push(vec![q, p, (1.0 - q * q) * (1.0 - p * p)]);
            }
        }
        rows.reverse();
        rows
    }

    #[test]
    fn reproduces_bilinear_functions() {
        let t = GridTable::from_rows(&tent_rows(8)).unwrap();
        assert_eq!(t.value(&[0.0, 0.0]), 1.0);
        assert_eq!(t.value(&[1.5, 0.0]), 0.0);
        // on nodes the table is exact
        assert!((t.value(&[0.5, -0.25]) - 0.75 * 0.9375).abs() < 1e-15);
        let g = t.gradient(&[0.1, 0.6]);
        let h = 1e-7;
        let fd = (t.value(&[0.1 + h, 0.6]) - t.value(&[0.1 - h, 0.6])) / (2.0 * h);
        assert!((g[0] - fd).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_tables() {
        let mut rows = tent_rows(4);
        rows.pop();
        assert!(GridTable::from_rows(&rows).is_err());
        let mut rows = tent_rows(4);
        rows[0][2] = 1.0;
        assert!(matches!(GridTable::from_rows(&rows), Err(Error::Validation(_))));
    }

    #[test]
    fn field_from_table() {
        let h = GridTable::from_rows(&tent_rows(16)).unwrap().into_field("tent").unwrap();
        assert_eq!(h.n(), 1);
        assert!(h.autonomous);
        assert!(h.value(0.0, &[0.0, 0.0]) > 0.99);
    }
}
