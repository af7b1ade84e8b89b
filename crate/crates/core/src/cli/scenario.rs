//! Scenarios: a command, its validated parameters, a seed and an output directory.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    LiftCurve,
    LiftSymp,
    Flow,
    Vertical,
    HoferLength,
    Admissibility,
    Invariants,
    CcDistance,
    Pansu,
    HamDist,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::LiftCurve,
        Command::LiftSymp,
        Command::Flow,
        Command::Vertical,
        Command::HoferLength,
        Command::Admissibility,
        Command::Invariants,
        Command::CcDistance,
        Command::Pansu,
        Command::HamDist,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::LiftCurve => "lift-curve",
            Command::LiftSymp => "lift-symp",
            Command::Flow => "flow",
            Command::Vertical => "vertical",
            Command::HoferLength => "hofer-length",
            Command::Admissibility => "admissibility",
            Command::Invariants => "invariants",
            Command::CcDistance => "cc-distance",
            Command::Pansu => "pansu",
            Command::HamDist => "ham-dist",
            Command::Selftest => "selftest",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::Validation(format!("unknown command `{name}`")))
    }

    /// Library module the command exercises, named in error messages.
    pub fn module(self) -> &'static str {
        match self {
            Command::LiftCurve | Command::LiftSymp => "lifting",
            Command::Flow | Command::Vertical | Command::HoferLength | Command::Admissibility => "flows",
            Command::Invariants => "invariants",
            Command::CcDistance => "cc",
            Command::Pansu => "pansu",
            Command::HamDist => "ham",
            Command::Selftest => "acceptance",
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Command::LiftCurve => "Horizontal lift of a closed or open planar curve",
            Command::LiftSymp => "Lift a named symplectomorphism and check the volume-preservation conditions",
            Command::Flow => "Integrate a Hamiltonian flow from one point",
            Command::Vertical => "Vertical flow of a Hamiltonian and its Hamilton-equation residual",
            Command::HoferLength => "Hofer length of a Hamiltonian on a grid",
            Command::Admissibility => "Search for fast closed orbits of an autonomous Hamiltonian",
            Command::Invariants => "Volume, weight and isodiameter bound of a region and its image",
            Command::CcDistance => "Carnot-Caratheodory distance and geodesic",
            Command::Pansu => "Pansu derivative of a lifted map at a point",
            Command::HamDist => "Upper bound for the pair-group distance to a Hamiltonian flow pair",
            Command::Selftest => "Run the built-in regression suite",
        }
    }

    pub fn schema(self) -> Vec<ParamSpec> {
        use Kind::*;
        let p = |key, kind, default, help| ParamSpec { key, kind, default, help };
        let hamiltonian = || {
            vec![
                p("ham", Str, Some("harmonic"), "harmonic | bump | translation | zero | table"),
                p("n", Int, Some("1"), "degrees of freedom for harmonic and zero"),
                p("scale", Float, Some("1"), "harmonic frequency multiplier"),
                p("inner", Float, Some("1"), "window radius where the cutoff starts"),
                p("outer", Float, Some("3"), "window radius where the field vanishes"),
                p("center", Floats, Some(""), "bump or translation center (default origin)"),
                p("radius", Float, Some("1"), "bump radius"),
                p("amplitude", Float, Some("1"), "bump height"),
                p("speed", Float, Some("1"), "translation speed"),
                p("profile", Str, Some("constant"), "time profile: constant | triangular"),
                p("table", Str, Some(""), "CSV of grid rows x1..x2n,H for ham = table"),
            ]
        };
        let map = |default_k| {
            vec![
                p("map", Str, Some("shear"), "identity | shear | sine-shear | kick | rotation"),
                p("strength", Float, Some(default_k), "map strength (angle for rotation)"),
            ]
        };
        let mut v = match self {
            Command::LiftCurve => vec![
                p("curve", Str, Some("circle"), "circle | ellipse | segment | figure-eight"),
                p("radius", Float, Some("1"), "size of the curve"),
                p("aspect", Float, Some("0.5"), "ellipse semi-axis ratio"),
                p("turns", Float, Some("1"), "number of turns for closed curves"),
                p("samples", Int, Some("2000"), "sample intervals along the curve"),
                p("xbar0", Float, Some("0"), "starting center coordinate"),
            ],
            Command::LiftSymp => {
                let mut v = map("3");
                v.extend([
                    p("a", Float, Some("0"), "value of F at the anchor"),
                    p("extent", Float, Some("1"), "half-width of the tabulation grid"),
                    p("grid", Int, Some("11"), "grid points per axis"),
                    p("h", Float, Some("1e-4"), "difference step for the condition check"),
                    p("probes", Int, Some("20"), "random points for the condition check"),
                ]);
                v
            }
            Command::Flow => {
                let mut v = hamiltonian();
                v.extend([
                    p("T", Float, Some("1"), "final time"),
                    p("steps", Int, Some("2048"), "RK4 steps"),
                    p("point", Floats, Some(""), "initial point (default e1)"),
                    p("store_every", Int, Some("1"), "trajectory thinning"),
                ]);
                v
            }
            Command::Vertical => {
                let mut v = hamiltonian();
                v.extend([
                    p("T", Float, Some("1"), "final time"),
                    p("steps", Int, Some("2048"), "RK4 steps"),
                    p("store_every", Int, Some("16"), "stored time slices are every this many steps"),
                    p("grid", Int, Some("5"), "grid points per axis over the support"),
                ]);
                v
            }
            Command::HoferLength => {
                let mut v = hamiltonian();
                v.extend([
                    p("T", Float, Some("1"), "final time"),
                    p("grid", Int, Some("41"), "grid points per axis over the support"),
                    p("time_samples", Int, Some("33"), "time samples"),
                ]);
                v
            }
            Command::Admissibility => {
                let mut v = hamiltonian();
                v.extend([
                    p("seeds", Int, Some("64"), "orbits followed"),
                    p("horizon", Float, Some("1"), "forbidden period bound"),
                    p("search_time", Float, Some("8"), "how long each orbit is followed"),
                    p("steps_per_unit", Int, Some("512"), "RK4 steps per unit time"),
                ]);
                v
            }
            Command::Invariants => {
                let mut v = vec![
                    p("region", Str, Some("box"), "box | ball"),
                    p("lo", Floats, Some("-0.5,-0.5,-0.25"), "lower box corner"),
                    p("hi", Floats, Some("0.5,0.5,0.25"), "upper box corner"),
                    p("center", Floats, Some("0,0,0"), "ball center"),
                    p("radius", Float, Some("1"), "ball radius"),
                    p("norm", Str, Some("sum"), "ball norm: sum | cc"),
                ];
                v.extend(map("3"));
                v.extend([
                    p("samples", Int, Some("100000"), "Monte Carlo samples"),
                    p("diameter_samples", Int, Some("150"), "points for the diameter estimate"),
                ]);
                v
            }
            Command::CcDistance => vec![
                p("target", Floats, None, "end point x1..x2n,xbar"),
                p("source", Floats, Some(""), "start point (default origin)"),
                p("n", Int, Some("0"), "expected dimension parameter; 0 infers it from the target"),
                p("method", Str, Some("closed-form"), "closed-form | direct"),
                p("segments", Int, Some("64"), "curve samples"),
                p("restarts", Int, Some("8"), "restarts of the direct method"),
            ],
            Command::Pansu => {
                let mut v = map("3");
                v.extend([
                    p("point", Floats, Some("0.3,-0.2,0.1"), "base point x1..x2n,xbar"),
                    p("probes", Int, Some("32"), "random probes besides the coordinate ones"),
                    p("scales", Int, Some("11"), "scales 2^-2 .. 2^-(scales+1)"),
                ]);
                v
            }
            Command::HamDist => {
                let mut v = hamiltonian();
                v.extend([
                    p("T", Float, Some("1"), "time of the target flow pair"),
                    p("family", Floats, Some("0.5,1,2"), "multipliers of the generator tried as paths"),
                    p("sample_grid", Int, Some("3"), "comparison grid points per axis"),
                    p("steps_per_unit", Int, Some("1024"), "flow steps per unit time"),
                    p("eta", Float, Some("1e-3"), "endpoint tolerance"),
                ]);
                v
            }
            Command::Selftest => vec![p("quick", Bool, Some("false"), "reduced sample counts")],
        };
        v.sort_by_key(|s| s.key);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Str,
    /// Comma-separated list (or a TOML array).
    Floats,
    Bool,
}

#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    /// `None` marks a required key.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Float(f64),
    Int(u64),
    Str(String),
    Floats(Vec<f64>),
    Bool(bool),
}

impl Value {
    pub fn parse(key: &str, kind: Kind, text: &str) -> Result<Value> {
        let bad = |what: &str| Error::Validation(format!("parameter `{key}`: expected {what}, got `{text}`"));
        let t = text.trim();
        Ok(match kind {
            Kind::Float => Value::Float(t.parse().map_err(|_| bad("a number"))?),
            Kind::Int => Value::Int(t.parse().map_err(|_| bad("a non-negative integer"))?),
            Kind::Str => Value::Str(t.to_string()),
            Kind::Bool => Value::Bool(t.parse().map_err(|_| bad("true or false"))?),
            Kind::Floats => {
                if t.is_empty() {
                    Value::Floats(Vec::new())
                } else {
                    Value::Floats(
                        t.split(',')
                            .map(|s| s.trim().parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| bad("comma-separated numbers"))?,
                    )
                }
            }
        })
    }

    fn from_toml(key: &str, kind: Kind, v: &toml::Value) -> Result<Value> {
        let bad = || Error::Validation(format!("parameter `{key}`: wrong type {}", v.type_str()));
        Ok(match (kind, v) {
            (Kind::Float, toml::Value::Float(f)) => Value::Float(*f),
            (Kind::Float, toml::Value::Integer(i)) => Value::Float(*i as f64),
            (Kind::Int, toml::Value::Integer(i)) if *i >= 0 => Value::Int(*i as u64),
            (Kind::Str, toml::Value::String(s)) => Value::Str(s.clone()),
            (Kind::Bool, toml::Value::Boolean(b)) => Value::Bool(*b),
            (Kind::Floats, toml::Value::String(s)) => Value::parse(key, kind, s)?,
            (Kind::Floats, toml::Value::Array(a)) => Value::Floats(
                a.iter()
                    .map(|e| match e {
                        toml::Value::Float(f) => Ok(*f),
                        toml::Value::Integer(i) => Ok(*i as f64),
                        _ => Err(bad()),
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(bad()),
        })
    }
}

pub const DEFAULT_OUTPUT_DIR: &str = "hsym-out";
/// Overrides the output directory of config files and the default.
pub const OUTPUT_DIR_ENV: &str = "HSYM_OUTPUT_DIR";

#[derive(Debug, Clone)]
pub struct Scenario {
    pub command: Command,
    /// Every schema key, defaults filled in.
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

/// Reproducibility echo; the output directory is left out so reports can be compared
/// across locations.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho<'a> {
    pub command: Command,
    pub seed: u64,
    pub params: &'a BTreeMap<String, Value>,
}

impl Scenario {
    /// Validate raw `key → text` pairs against the command schema.
    pub fn from_strings(command: Command, raw: &BTreeMap<String, String>, seed: u64, output_dir: PathBuf) -> Result<Self> {
        let schema = command.schema();
        let mut params = BTreeMap::new();
        for (k, v) in raw {
            let spec = lookup(command, &schema, k)?;
            params.insert(k.clone(), Value::parse(k, spec.kind, v)?);
        }
        Scenario::finish(command, schema, params, seed, output_dir)
    }

    fn finish(
        command: Command,
        schema: Vec<ParamSpec>,
        mut params: BTreeMap<String, Value>,
        seed: u64,
        output_dir: PathBuf,
    ) -> Result<Self> {
        for spec in &schema {
            if params.contains_key(spec.key) {
                continue;
            }
            match spec.default {
                Some(d) => {
                    params.insert(spec.key.to_string(), Value::parse(spec.key, spec.kind, d)?);
                }
                None => {
                    return Err(Error::Validation(format!(
                        "{}: missing required parameter `{}`",
                        command.name(),
                        spec.key
                    )))
                }
            }
        }
        Ok(Scenario { command, params, seed, output_dir })
    }

    pub fn echo(&self) -> ScenarioEcho<'_> {
        ScenarioEcho { command: self.command, seed: self.seed, params: &self.params }
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.params.get(key) {
            Some(Value::Float(v)) => *v,
            other => panic!("schema gives `{key}` as a float, found {other:?}"),
        }
    }

    pub fn int(&self, key: &str) -> usize {
        match self.params.get(key) {
            Some(Value::Int(v)) => *v as usize,
            other => panic!("schema gives `{key}` as an integer, found {other:?}"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match self.params.get(key) {
            Some(Value::Str(v)) => v,
            other => panic!("schema gives `{key}` as a string, found {other:?}"),
        }
    }

    pub fn floats(&self, key: &str) -> &[f64] {
        match self.params.get(key) {
            Some(Value::Floats(v)) => v,
            other => panic!("schema gives `{key}` as a list, found {other:?}"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.params.get(key) {
            Some(Value::Bool(v)) => *v,
            other => panic!("schema gives `{key}` as a flag, found {other:?}"),
        }
    }
}

fn lookup<'a>(command: Command, schema: &'a [ParamSpec], key: &str) -> Result<&'a ParamSpec> {
    schema.iter().find(|s| s.key == key).ok_or_else(|| {
        let known: Vec<&str> = schema.iter().map(|s| s.key).collect();
        Error::Validation(format!(
            "{}: unknown parameter `{key}` (known: {})",
            command.name(),
            known.join(", ")
        ))
    })
}

/// Line and column (1-based) of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Position of the first line assigning `key`.
fn key_position(text: &str, key: &str) -> (usize, usize) {
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return (i + 1, line.len() - trimmed.len() + 1);
            }
        }
    }
    (1, 1)
}

/// Parse a scenario document:
///
/// ```toml
/// command = "flow"
/// seed = 0                  # optional
/// output_dir = "out"        # optional
///
/// [params]
/// ham = "harmonic"
/// T = 1.5708
/// ```
pub fn parse_config(text: &str) -> Result<Scenario> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        Error::Config { line, column, message: e.message().to_string() }
    })?;
    let config_err = |key: &str, message: String| {
        let (line, column) = key_position(text, key);
        Error::Config { line, column, message }
    };
    let mut command = None;
    let mut seed = 0u64;
    let mut output_dir = PathBuf::from(DEFAULT_OUTPUT_DIR);
    let mut raw_params = toml::Table::new();
    for (k, v) in &doc {
        match (k.as_str(), v) {
            ("command", toml::Value::String(s)) => {
                command = Some(Command::from_name(s).map_err(|e| config_err(k, e.to_string()))?)
            }
            ("seed", toml::Value::Integer(i)) if *i >= 0 => seed = *i as u64,
            ("output_dir", toml::Value::String(s)) => output_dir = PathBuf::from(s),
            ("params", toml::Value::Table(t)) => raw_params = t.clone(),
            ("command" | "seed" | "output_dir" | "params", _) => {
                return Err(config_err(k, format!("`{k}` has the wrong type {}", v.type_str())))
            }
            _ => return Err(config_err(k, format!("unknown key `{k}`"))),
        }
    }
    let command = command.ok_or_else(|| Error::Config { line: 1, column: 1, message: "missing `command`".into() })?;
    let schema = command.schema();
    let mut params = BTreeMap::new();
    for (k, v) in &raw_params {
        let spec = lookup(command, &schema, k).map_err(|e| config_err(k, e.to_string()))?;
        params.insert(k.clone(), Value::from_toml(k, spec.kind, v).map_err(|e| config_err(k, e.to_string()))?);
    }
    Scenario::finish(command, schema, params, seed, output_dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_applied() {
        let s = parse_config("command = \"flow\"\n[params]\nham = \"harmonic\"\n").unwrap();
        assert_eq!(s.command, Command::Flow);
        assert_eq!(s.int("steps"), 2048);
        assert_eq!(s.seed, 0);
        assert_eq!(s.floats("point"), &[] as &[f64]);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config("command = \"flow\"\n[params]\nstepz = 10\n").unwrap_err();
        match e {
            Error::Config { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("stepz"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_config("command = \"flow\"\ncolour = 1\n").unwrap_err().to_string().contains("colour"));
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_config("command = \"flow\"\nseed = = 3\n").unwrap_err() {
            Error::Config { line, column, .. } => assert_eq!((line, column), (2, 8)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_command_and_missing_keys() {
        assert!(parse_config("command = \"fly\"\n").is_err());
        assert!(parse_config("seed = 1\n").is_err());
        let e = parse_config("command = \"cc-distance\"\n").unwrap_err();
        assert!(e.to_string().contains("target"));
    }

    #[test]
    fn lists_from_strings_and_arrays() {
        let s = parse_config("command = \"cc-distance\"\nseed = 4\n[params]\ntarget = [0, 0, 3.5]\n").unwrap();
        assert_eq!(s.floats("target"), &[0.0, 0.0, 3.5]);
        assert_eq!(s.seed, 4);
        let mut raw = BTreeMap::new();
        raw.insert("target".to_string(), "1, 2,3".to_string());
        let s = Scenario::from_strings(Command::CcDistance, &raw, 0, PathBuf::new()).unwrap();
        assert_eq!(s.floats("target"), &[1.0, 2.0, 3.0]);
        raw.insert("target".to_string(), "1,x".to_string());
        assert!(Scenario::from_strings(Command::CcDistance, &raw, 0, PathBuf::new()).is_err());
    }
}
