use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heis::{omega, HPoint};

/// A sampled curve in H(n) together with its per-step horizontality defect.
#[derive(Debug, Clone, Serialize)]
pub struct HorizontalCurve {
    pub times: Vec<f64>,
    pub points: Vec<HPoint>,
    /// `[(x̄_{k+1} − x̄_k) − ½ω(x_k, x_{k+1})] / (t_{k+1} − t_k)` per step.
    pub horizontality_residual: Vec<f64>,
}

impl HorizontalCurve {
    pub fn new(times: Vec<f64>, points: Vec<HPoint>) -> Result<Self> {
        if times.len() != points.len() || times.len() < 2 {
            return Err(Error::param("curve", "need at least two samples with matching times"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("times", "grid must be strictly increasing"));
        }
        let horizontality_residual = step_defects(&times, &points);
        Ok(HorizontalCurve { times, points, horizontality_residual })
    }

    pub fn max_residual(&self) -> f64 {
        self.horizontality_residual.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Euclidean length of the horizontal projection (polygonal).
    pub fn projected_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                w[0].x
                    .iter()
                    .zip(&w[1].x)
                    .map(|(a, b)| (b - a).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    pub fn start(&self) -> &HPoint {
        &self.points[0]
    }

    pub fn end(&self) -> &HPoint {
        self.points.last().expect("non-empty curve")
    }

    /// CSV with header `t,x1..x2n,xbar`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = self.points[0].x.len();
        let mut header = vec!["t".to_string()];
        header.extend((1..=dim).map(|i| format!("x{i}")));
        header.push("xbar".into());
        writeln!(w, "{}", header.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let mut row = vec![crate::report::fmt_f64(*t)];
            row.extend(p.x.iter().map(|v| crate::report::fmt_f64(*v)));
            row.push(crate::report::fmt_f64(p.xbar));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn step_defects(times: &[f64], points: &[HPoint]) -> Vec<f64> {
    times
        .windows(2)
        .zip(points.windows(2))
        .map(|(t, p)| {
            ((p[1].xbar - p[0].xbar) - 0.5 * omega(&p[0].x, &p[1].x)) / (t[1] - t[0])
        })
        .collect()
}
