//! Command-line front end: protocol runs, parameter sweeps and the invariant
//! suite, with CSV or JSON reports.
//!
//! Exit codes: 0 success, 1 verification failure, 2 argument or output
//! error, 3 resource limit.

pub mod args;
pub mod report;
pub mod runner;

use std::fs;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use oam_distill::protocols::AcceptanceRule;
use oam_distill::verify::run_suite;

use args::{Cli, Command, Common, Format, Protocol, RunArgs, SweepArgs};
use report::ReportRow;
use runner::{Input, RunSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Output { .. } => EXIT_USAGE,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }
}

impl From<oam_distill::Error> for CliError {
    fn from(e: oam_distill::Error) -> Self {
        match e {
            oam_distill::Error::Domain(m) => CliError::Usage(m),
            oam_distill::Error::ResourceLimit(m) => CliError::Resource(m),
        }
    }
}

/// Parses `argv` (without the program name), runs the command and returns
/// the process exit code. Reports go to `out` unless `--out` is given;
/// diagnostics go to `err`.
pub fn run_command<O: Write, E: Write>(argv: &[String], out: &mut O, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(
        std::iter::once("oam-distill".to_string()).chain(argv.iter().cloned()),
    ) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Verify => return verify(out),
        Command::Bbpssw(a) => single(Protocol::Bbpssw, a),
        Command::Oambs(a) => single(Protocol::Oambs, a),
        Command::Conserving(a) => single(Protocol::Conserving, a),
        Command::Sweep(a) => sweep(a),
    };
    match result.and_then(|(rows, common)| emit_report(&rows, &common, out)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn verify<O: Write>(out: &mut O) -> i32 {
    let checks = run_suite();
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        let _ = writeln!(out, "{c}");
    }
    let _ = writeln!(out, "{} checks, {failed} failed", checks.len());
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

fn rule_for(protocol: Option<Protocol>, common: &Common) -> Result<AcceptanceRule, CliError> {
    match (common.rule, protocol) {
        (Some(_), Some(p)) if p != Protocol::Oambs => Err(CliError::Usage(format!(
            "--rule applies to oambs only, not {}",
            p.name()
        ))),
        (r, _) => Ok(r.unwrap_or_default().into()),
    }
}

fn single(protocol: Protocol, a: RunArgs) -> Result<(Vec<ReportRow>, Common), CliError> {
    // dimension first, so an oversized D reports as a resource limit
    oam_distill::algebra::Dim::new(a.dim)?;
    let input = match (a.fidelity, a.weights) {
        (Some(f), None) => Input::Fidelity(f),
        (None, Some(w)) => Input::Weights(w),
        _ => {
            return Err(CliError::Usage(
                "one of --fidelity or --weights is required".into(),
            ))
        }
    };
    let spec = RunSpec {
        protocol,
        dim: a.dim,
        input,
        rule: rule_for(Some(protocol), &a.common)?,
        steps: a.common.steps,
        engine: a.common.engine,
    };
    Ok((runner::run(&spec)?, a.common))
}

fn sweep(a: SweepArgs) -> Result<(Vec<ReportRow>, Common), CliError> {
    let rule = rule_for(a.protocol, &a.common)?;
    let protocols = match a.protocol {
        Some(p) => vec![p],
        None => vec![Protocol::Bbpssw, Protocol::Oambs, Protocol::Conserving],
    };
    let mut specs = Vec::new();
    for &protocol in &protocols {
        for &dim in &a.dims {
            for &f in &a.f_grid.0 {
                specs.push(RunSpec {
                    protocol,
                    dim,
                    input: Input::Fidelity(f),
                    rule,
                    steps: a.common.steps,
                    engine: a.common.engine,
                });
            }
        }
    }
    Ok((runner::sweep(&specs)?, a.common))
}

/// Renders `rows` in the requested format to `--out` or `out`.
pub fn emit_report<O: Write>(
    rows: &[ReportRow],
    common: &Common,
    out: &mut O,
) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::Usage("nothing to report".into()));
    }
    let text = match common.format {
        Format::Csv => report::to_csv(rows),
        Format::Json => report::to_json(rows),
    };
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        }),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Output {
                path: "standard output".into(),
                source,
            }),
    }
}
