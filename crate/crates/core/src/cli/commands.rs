//! Execution of each command: library calls in, JSON value and CSV tables out.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value as Json};

use super::scenario::{Command, Scenario};
use crate::acceptance::{self, Mode};
use crate::cc::{cc_distance, SolverOptions};
use crate::error::{Error, Result};
use crate::flows::{
    admissibility_check, hofer_length, integrate_flow, regular_grid, support_grid, time_grid, vertical_flow,
    AdmissibilityOptions, Builtin, FlowOptions, GridTable, HamiltonianField, LiftTableOptions, TimeProfile,
};
use crate::ham::{dist_estimate, DistOptions, HamPair};
use crate::heis::{HLinMap, HPoint, NormKind};
use crate::invariants::{
    cc_diameter, image_volume_mc, image_weight, isodiameter_upper, volume_mc, weight, RegionSpec,
};
use crate::lifting::{
    catalog, check_volume_preserving_conditions, horizontal_lift, lift_symplectomorphism, LiftOptions, LiftedMap,
    PlanarMap,
};
use crate::pansu::{estimate_pansu_derivative, PansuOptions};
use crate::rng;

/// A CSV artifact: file name, header and rows.
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(file: &str, header: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Table { file: file.into(), header, rows }
    }
}

pub struct Artifacts {
    pub result: Json,
    pub tables: Vec<Table>,
    /// Process status on success: 0, or 3 when a selftest criterion failed.
    pub status: i32,
}

fn artifacts<T: Serialize>(result: &T, tables: Vec<Table>) -> Result<Artifacts> {
    let result = serde_json::to_value(result).map_err(|e| Error::Io(e.to_string()))?;
    Ok(Artifacts { result, tables, status: 0 })
}

fn coord_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

pub fn execute(s: &Scenario) -> Result<Artifacts> {
    match s.command {
        Command::LiftCurve => lift_curve(s),
        Command::LiftSymp => lift_symp(s),
        Command::Flow => flow(s),
        Command::Vertical => vertical(s),
        Command::HoferLength => hofer(s),
        Command::Admissibility => admissibility(s),
        Command::Invariants => invariants(s),
        Command::CcDistance => cc(s),
        Command::Pansu => pansu(s),
        Command::HamDist => ham_dist(s),
        Command::Selftest => selftest(s),
    }
}

fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if rows.is_empty() && i == 0 => {}
            Err(_) => return Err(Error::Validation(format!("{}: line {} is not numeric", path.display(), i + 1))),
        }
    }
    Ok(rows)
}

pub fn hamiltonian(s: &Scenario) -> Result<HamiltonianField> {
    let profile = match s.str("profile") {
        "constant" => TimeProfile::Constant,
        "triangular" => TimeProfile::Triangular,
        other => return Err(Error::Validation(format!("unknown profile `{other}`"))),
    };
    let n = s.int("n");
    let center = || {
        let c = s.floats("center");
        if c.is_empty() {
            vec![0.0; 2 * n]
        } else {
            c.to_vec()
        }
    };
    let builtin = match s.str("ham") {
        "harmonic" => Builtin::Harmonic { n, scale: s.float("scale"), inner: s.float("inner"), outer: s.float("outer") },
        "bump" => Builtin::Bump { center: center(), radius: s.float("radius"), amplitude: s.float("amplitude") },
        "translation" => Builtin::Translation {
            center: center(),
            speed: s.float("speed"),
            inner: s.float("inner"),
            outer: s.float("outer"),
        },
        "zero" => Builtin::Zero { n },
        "table" => {
            if s.str("table").is_empty() {
                return Err(Error::Validation("ham = table needs the `table` path".into()));
            }
            let path = Path::new(s.str("table"));
            let mut h = GridTable::from_rows(&read_table(path)?)?.into_field("table")?;
            if profile != TimeProfile::Constant {
                return Err(Error::Validation("tabulated Hamiltonians are autonomous".into()));
            }
            h.name = format!("table:{}", path.display());
            return Ok(h);
        }
        other => return Err(Error::Validation(format!("unknown Hamiltonian `{other}`"))),
    };
    HamiltonianField::from_builtin(&builtin, profile)
}

fn lift_curve(s: &Scenario) -> Result<Artifacts> {
    let (r, aspect, turns) = (s.float("radius"), s.float("aspect"), s.float("turns"));
    let k = s.int("samples").max(1);
    let times: Vec<f64> = (0..=k).map(|i| turns * i as f64 / k as f64).collect();
    let (shape, expected): (fn(f64, f64, f64) -> Vec<f64>, f64) = match s.str("curve") {
        "circle" => (|r, _, t| vec![r * (2.0 * PI * t).cos(), r * (2.0 * PI * t).sin()], PI * r * r * turns),
        "ellipse" => (|r, a, t| vec![r * (2.0 * PI * t).cos(), a * r * (2.0 * PI * t).sin()], PI * r * r * aspect * turns),
        "segment" => (|r, _, t| vec![r * t, 0.5 * r * t], 0.0),
        "figure-eight" => (|r, _, t| vec![r * (2.0 * PI * t).sin(), r * (2.0 * PI * t).sin() * (2.0 * PI * t).cos()], 0.0),
        other => return Err(Error::Validation(format!("unknown curve `{other}`"))),
    };
    let xs: Vec<Vec<f64>> = times.iter().map(|t| shape(r, aspect, *t)).collect();
    let curve = horizontal_lift(&times, &xs, s.float("xbar0"))?;
    let closed = s.str("curve") != "segment" && turns.fract() == 0.0;
    let gain = curve.end().xbar - s.float("xbar0");
    let rows = times
        .iter()
        .zip(&curve.points)
        .map(|(t, p)| vec![*t, p.x[0], p.x[1], p.xbar])
        .collect();
    let mut header = vec!["t".to_string()];
    header.extend(coord_header(2));
    header.push("xbar".into());
    artifacts(
        &json!({
            "end": curve.end().coords(),
            "gain": gain,
            "closed": closed,
            "enclosed_area": if closed { Some(expected) } else { None },
            "max_residual": curve.max_residual(),
            "samples": k,
        }),
        vec![Table::new("lift_curve.csv", header, rows)],
    )
}

fn named_lift(s: &Scenario, a: f64) -> Result<LiftedMap> {
    let f = catalog::by_name(s.str("map"), s.float("strength"))?;
    let anchor = vec![0.0; f.dim()];
    lift_symplectomorphism(&f, a, Some(&anchor), &LiftOptions::default())
}

fn random_points(seed: u64, count: usize, dim: usize, half: f64) -> Result<Vec<HPoint>> {
    let mut r = rng::seeded(seed);
    (0..count)
        .map(|_| HPoint::from_coords(&rng::uniform_vec(&mut r, &vec![-half; dim], &vec![half; dim])))
        .collect()
}

fn lift_symp(s: &Scenario) -> Result<Artifacts> {
    let g = named_lift(s, s.float("a"))?;
    let dim = g.base().dim();
    let e = s.float("extent");
    let grid = regular_grid(&vec![-e; dim], &vec![e; dim], s.int("grid"));
    let probes = random_points(s.seed, s.int("probes"), dim + 1, e)?;
    let cond = check_volume_preserving_conditions(|p| g.apply(p), &probes, s.float("h"))?;
    let mut header = coord_header(dim);
    header.push("F".into());
    artifacts(
        &json!({
            "lift": g.meta(),
            "path_discrepancy": g.path_discrepancy(&grid),
            "conditions": {
                "h": cond.h,
                "probes": probes.len(),
                "max_cc1": cond.max_cc1,
                "max_cc2": cond.max_cc2,
                "max_cc3": cond.max_cc3,
                "max_cc4": cond.max_cc4,
                "max_abs_mu": cond.max_abs_mu,
            },
            "grid": {"lo": -e, "hi": e, "per_axis": s.int("grid")},
        }),
        vec![Table::new("lift_symp.csv", header, g.tabulate(&grid))],
    )
}

fn flow(s: &Scenario) -> Result<Artifacts> {
    let h = hamiltonian(s)?;
    let dim = h.dim();
    let point = match s.floats("point") {
        [] => {
            let mut e1 = vec![0.0; dim];
            e1[0] = 1.0;
            e1
        }
        p if p.len() == dim => p.to_vec(),
        p => return Err(Error::DimensionMismatch { expected: dim, got: p.len() }),
    };
    let t_end = s.float("T");
    let opts = FlowOptions { steps: s.int("steps"), store_every: s.int("store_every").max(1), ..FlowOptions::for_horizon(t_end) };
    let fg = integrate_flow(&h, std::slice::from_ref(&point), t_end, &opts)?;
    let rows: Vec<Vec<f64>> = fg
        .times
        .iter()
        .zip(fg.trajectory_of(0))
        .map(|(t, x)| std::iter::once(*t).chain(x).collect())
        .collect();
    let mut header = vec!["t".to_string()];
    header.extend(coord_header(dim));
    artifacts(
        &json!({
            "hamiltonian": h.name,
            "start": point,
            "end": fg.final_points()[0],
            "T": t_end,
            "stats": fg.stats,
        }),
        vec![Table::new("flow.csv", header, rows)],
    )
}

fn vertical(s: &Scenario) -> Result<Artifacts> {
    let h = hamiltonian(s)?;
    let grid = support_grid(&h, s.int("grid"));
    let opts = LiftTableOptions {
        t_end: s.float("T"),
        steps: s.int("steps"),
        store_every: s.int("store_every").max(1),
        ..Default::default()
    };
    let vf = vertical_flow(&h, &grid, &opts)?;
    let header = ["t", "sup_lambda_dot", "residual"].map(String::from).to_vec();
    artifacts(
        &json!({
            "hamiltonian": h.name,
            "sigma": vf.sigma,
            "max_residual_flow": vf.max_residual_flow(),
            "max_residual_base": vf.max_residual_base(),
            "max_abs_lambda": vf.max_abs_lambda(),
            "length": vf.length(),
            "time_slices": vf.times.len(),
            "grid": {"support": h.support, "per_axis": s.int("grid")},
            "panel_length": opts.panel_length,
        }),
        vec![Table::new("vertical.csv", header, vf.summary_rows())],
    )
}

fn hofer(s: &Scenario) -> Result<Artifacts> {
    let h = hamiltonian(s)?;
    let grid = support_grid(&h, s.int("grid"));
    let times = time_grid(s.float("T"), s.int("time_samples"));
    let length = hofer_length(&h, &grid, &times)?;
    let rows: Vec<Vec<f64>> = times.iter().map(|t| vec![*t, h.grid_sup(*t, &grid)]).collect();
    artifacts(
        &json!({
            "hamiltonian": h.name,
            "length": length,
            "grid": {"support": h.support, "per_axis": s.int("grid")},
            "time_samples": times.len(),
        }),
        vec![Table::new("hofer_length.csv", vec!["t".into(), "sup_abs_h".into()], rows)],
    )
}

fn admissibility(s: &Scenario) -> Result<Artifacts> {
    let h = hamiltonian(s)?;
    let opts = AdmissibilityOptions {
        seeds: s.int("seeds"),
        seed: s.seed,
        horizon: s.float("horizon"),
        search_time: s.float("search_time"),
        steps_per_unit: s.int("steps_per_unit"),
        ..Default::default()
    };
    let rep = admissibility_check(&h, &opts)?;
    artifacts(&json!({"hamiltonian": h.name, "report": rep}), Vec::new())
}

fn region(s: &Scenario) -> Result<RegionSpec> {
    match s.str("region") {
        "box" => RegionSpec::boxed(s.floats("lo").to_vec(), s.floats("hi").to_vec()),
        "ball" => {
            let norm = match s.str("norm") {
                "sum" => NormKind::Sum,
                "cc" => NormKind::CC,
                other => return Err(Error::Validation(format!("unknown norm `{other}`"))),
            };
            RegionSpec::ball(HPoint::from_coords(s.floats("center"))?, s.float("radius"), norm)
        }
        other => Err(Error::Validation(format!("unknown region `{other}`"))),
    }
}

fn invariants(s: &Scenario) -> Result<Artifacts> {
    let reg = region(s)?;
    let g = named_lift(s, 0.0)?;
    if g.base().dim() != 2 * reg.n {
        return Err(Error::DimensionMismatch { expected: 2 * reg.n, got: g.base().dim() });
    }
    let identity = lift_symplectomorphism(&PlanarMap::identity(2 * reg.n), 0.0, None, &LiftOptions::default())?;
    let samples = s.int("samples");
    let ds = s.int("diameter_samples");
    let seed = s.seed;
    let family = vec![identity, g.clone()];
    let iso = isodiameter_upper(&reg, &family, ds, rng::derive_seed(seed, 4))?;
    artifacts(
        &json!({
            "n": reg.n,
            "bounding_box": reg.bounding_box(),
            "volume": volume_mc(&reg, samples, seed)?,
            "projected_volume": reg.projected_volume(samples, rng::derive_seed(seed, 1))?,
            "weight": weight(&reg, samples, seed)?,
            "image_volume": image_volume_mc(&reg, &g, samples, rng::derive_seed(seed, 2))?,
            "image_weight": image_weight(&reg, &g, samples, rng::derive_seed(seed, 2))?,
            "cc_diameter": cc_diameter(&reg, ds, rng::derive_seed(seed, 3))?,
            "isodiameter": iso,
            "map": g.meta(),
            "samples": samples,
        }),
        Vec::new(),
    )
}

fn cc(s: &Scenario) -> Result<Artifacts> {
    let target = HPoint::from_coords(s.floats("target"))?;
    let n = s.int("n");
    if n != 0 && target.x.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n + 1, got: s.floats("target").len() });
    }
    let source = match s.floats("source") {
        [] => HPoint::identity(target.n()),
        c => HPoint::from_coords(c)?,
    };
    let mut opts = match s.str("method") {
        "closed-form" => SolverOptions::closed_form(),
        "direct" => SolverOptions::direct(s.seed),
        other => return Err(Error::Validation(format!("unknown method `{other}`"))),
    };
    opts.segments = s.int("segments");
    opts.restarts = s.int("restarts");
    let sol = cc_distance(&source, &target, opts)?;
    let rows = sol
        .curve
        .times
        .iter()
        .zip(&sol.curve.points)
        .map(|(t, p)| std::iter::once(*t).chain(p.coords()).collect())
        .collect();
    let mut header = vec!["t".to_string()];
    header.extend(coord_header(target.x.len()));
    header.push("xbar".into());
    artifacts(
        &json!({
            "source": source.coords(),
            "target": target.coords(),
            "length": sol.length,
            "method": sol.method,
            "curvature_parameter": sol.curvature_parameter,
            "converged": sol.converged,
            "endpoint_error": sol.endpoint_error,
            "horizontality_residual": sol.curve.max_residual(),
        }),
        vec![Table::new("geodesic.csv", header, rows)],
    )
}

fn pansu(s: &Scenario) -> Result<Artifacts> {
    let g = named_lift(s, 0.0)?;
    let x = HPoint::from_coords(s.floats("point"))?;
    if x.x.len() != g.base().dim() {
        return Err(Error::DimensionMismatch { expected: g.base().dim() + 1, got: s.floats("point").len() });
    }
    let opts = PansuOptions {
        t_schedule: (2..=s.int("scales") as i32 + 1).map(|k| 2f64.powi(-k)).collect(),
        probes: s.int("probes"),
        seed: s.seed,
        ..Default::default()
    };
    let f = |p: &HPoint| Ok(g.apply(p));
    let est = estimate_pansu_derivative(&f, &x, &opts)?;
    let expected = HLinMap::new(g.base().jacobian(&x.x), 1.0)?;
    let rows = est.residuals.iter().map(|r| vec![r.t, r.sup_deviation, r.coord_deviation, r.fit_drift]).collect();
    let header = ["t", "sup_deviation", "coord_deviation", "fit_drift"].map(String::from).to_vec();
    artifacts(
        &json!({
            "point": x.coords(),
            "estimate": est,
            "block_error": est.linmap.max_abs_diff(&expected),
            "tolerance": opts.tol,
        }),
        vec![Table::new("pansu.csv", header, rows)],
    )
}

fn ham_dist(s: &Scenario) -> Result<Artifacts> {
    let h = hamiltonian(s)?;
    let t = s.float("T");
    let target = HamPair::flow(&h, t, s.int("steps_per_unit"), 0.15)?;
    let family: Vec<HamiltonianField> = s.floats("family").iter().map(|m| h.scaled(m * t)).collect();
    let half: Vec<f64> = h.support.lo.iter().map(|v| 0.5 * v).collect();
    let half_hi: Vec<f64> = h.support.hi.iter().map(|v| 0.5 * v).collect();
    let grid = regular_grid(&half, &half_hi, s.int("sample_grid"));
    let mut opts = DistOptions::new(grid);
    opts.eta = s.float("eta");
    opts.steps_per_unit = s.int("steps_per_unit");
    let rep = dist_estimate(&HamPair::identity(h.n()), &target, &family, &opts)?;
    let rows = rep
        .candidates
        .iter()
        .zip(s.floats("family"))
        .map(|(c, m)| {
            vec![
                c.index as f64,
                *m,
                c.endpoint_gap,
                if c.feasible { 1.0 } else { 0.0 },
                c.length.unwrap_or(f64::NAN),
                c.hofer_length.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    let header = ["index", "multiplier", "endpoint_gap", "feasible", "length", "hofer_length"].map(String::from).to_vec();
    artifacts(
        &json!({
            "hamiltonian": h.name,
            "T": t,
            "upper": rep.upper,
            "candidate_params": s.floats("family"),
            "argmin": rep.argmin,
            "endpoint_gap": rep.endpoint_gap,
            "eta": rep.eta,
            "candidates": rep.candidates,
            "grid": {"lo": half, "hi": half_hi, "per_axis": s.int("sample_grid")},
        }),
        vec![Table::new("ham_dist.csv", header, rows)],
    )
}

fn selftest(s: &Scenario) -> Result<Artifacts> {
    let mode = if s.flag("quick") { Mode::Quick } else { Mode::Full };
    let results = acceptance::run_all(mode, s.seed);
    for r in &results {
        eprintln!("{}", r.line());
    }
    let passed = results.iter().all(|r| r.passed);
    let mut a = artifacts(&json!({"mode": mode, "passed": passed, "criteria": results}), Vec::new())?;
    a.status = if passed { 0 } else { 3 };
    Ok(a)
}
