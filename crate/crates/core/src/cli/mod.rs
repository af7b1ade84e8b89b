//! The `hsym` command line: scenarios from flags or config files, JSON and CSV out.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 for numerical failure (including
//! a failed selftest criterion), 1 for I/O errors.

mod commands;
mod scenario;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches};
use serde::Serialize;

pub use commands::{execute, hamiltonian, Artifacts, Table};
pub use scenario::{
    parse_config, Command, Kind, ParamSpec, Scenario, ScenarioEcho, Value, DEFAULT_OUTPUT_DIR, OUTPUT_DIR_ENV,
};

use crate::error::{Error, Result};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    tool: &'static str,
    version: &'static str,
    scenario: ScenarioEcho<'a>,
    result: &'a serde_json::Value,
}

/// Report bytes for a finished scenario.
pub fn render_report(s: &Scenario, a: &Artifacts) -> Result<String> {
    let r = Report {
        schema: report::SCHEMA,
        tool: "hsym",
        version: env!("CARGO_PKG_VERSION"),
        scenario: s.echo(),
        result: &a.result,
    };
    Ok(report::to_json(&r)? + "\n")
}

/// Execute a scenario and write `<command>.json` plus its CSV tables to the output
/// directory. Returns the report and the process status.
pub fn run(s: &Scenario) -> Result<(String, i32)> {
    let a = execute(s)?;
    let text = render_report(s, &a)?;
    std::fs::create_dir_all(&s.output_dir)?;
    std::fs::write(s.output_dir.join(format!("{}.json", s.command.name())), &text)?;
    for t in &a.tables {
        let file = std::fs::File::create(s.output_dir.join(&t.file))?;
        let header: Vec<&str> = t.header.iter().map(String::as_str).collect();
        report::write_csv(std::io::BufWriter::new(file), &header, &t.rows)?;
    }
    Ok((text, a.status))
}

fn cli() -> clap::Command {
    let mut app = clap::Command::new("hsym")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Heisenberg group geometry, lifted Hamiltonian flows and Hofer-type invariants")
        .subcommand_required(true)
        .arg(
            Arg::new("seed")
                .long("seed")
                .global(true)
                .value_parser(clap::value_parser!(u64))
                .help("seed for every randomized step [default: 0]"),
        )
        .arg(
            Arg::new("output-dir")
                .long("output-dir")
                .global(true)
                .value_parser(clap::value_parser!(PathBuf))
                .help(format!("where reports are written [env: {OUTPUT_DIR_ENV}] [default: {DEFAULT_OUTPUT_DIR}]")),
        )
        .subcommand(
            clap::Command::new("run")
                .about("Run a scenario from a config file")
                .arg(Arg::new("config").required(true).value_parser(clap::value_parser!(PathBuf))),
        );
    for c in Command::ALL {
        let mut sub = clap::Command::new(c.name()).about(c.about());
        for p in c.schema() {
            let mut arg = Arg::new(p.key).long(p.key).help(p.help.to_string());
            arg = if p.kind == Kind::Bool {
                arg.action(ArgAction::SetTrue)
            } else {
                arg.value_name("VALUE").allow_hyphen_values(true)
            };
            if let Some(d) = p.default.filter(|d| !d.is_empty() && p.kind != Kind::Bool) {
                arg = arg.help(format!("{} [default: {d}]", p.help));
            }
            sub = sub.arg(arg);
        }
        app = app.subcommand(sub);
    }
    app
}

fn output_dir(flag: Option<&PathBuf>, configured: Option<PathBuf>) -> PathBuf {
    if let Some(p) = flag {
        return p.clone();
    }
    if let Some(env) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    configured.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn scenario_from(m: &ArgMatches) -> Result<Scenario> {
    let (name, sub) = m.subcommand().expect("subcommand required");
    let seed = sub.get_one::<u64>("seed").copied();
    let dir = sub.get_one::<PathBuf>("output-dir");
    if name == "run" {
        let path: &Path = sub.get_one::<PathBuf>("config").expect("required");
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut s = parse_config(&text)?;
        s.output_dir = output_dir(dir, Some(s.output_dir.clone()));
        if let Some(seed) = seed {
            s.seed = seed;
        }
        return Ok(s);
    }
    let command = Command::from_name(name)?;
    let mut raw = BTreeMap::new();
    for p in command.schema() {
        if p.kind == Kind::Bool {
            if sub.get_flag(p.key) {
                raw.insert(p.key.to_string(), "true".to_string());
            }
        } else if let Some(v) = sub.get_one::<String>(p.key) {
            raw.insert(p.key.to_string(), v.clone());
        }
    }
    Scenario::from_strings(command, &raw, seed.unwrap_or(0), output_dir(dir, None))
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let scenario = match scenario_from(&matches) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("hsym: {e}");
            return exit_code(&e);
        }
    };
    match run(&scenario) {
        Ok((text, status)) => {
            print!("{text}");
            status
        }
        Err(e) => {
            eprintln!("hsym {} [{}]: {e}", scenario.command.name(), scenario.command.module());
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn flags_become_scenarios() {
        let m = cli()
            .try_get_matches_from(["hsym", "cc-distance", "--target", "0,0,2.5", "--n", "1", "--seed", "7"])
            .unwrap();
        let s = scenario_from(&m).unwrap();
        assert_eq!(s.command, Command::CcDistance);
        assert_eq!(s.seed, 7);
        assert_eq!(s.floats("target"), &[0.0, 0.0, 2.5]);
        assert_eq!(s.str("method"), "closed-form");
    }

    #[test]
    fn negative_values_are_accepted() {
        let m = cli().try_get_matches_from(["hsym", "cc-distance", "--target", "-1,0,-2"]).unwrap();
        assert_eq!(scenario_from(&m).unwrap().floats("target"), &[-1.0, 0.0, -2.0]);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::Validation("x".into())), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::NonFinite("x")), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Io("x".into())), EXIT_IO);
    }
}
