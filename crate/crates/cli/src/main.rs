//! `clairvoyant` command-line front end.
//!
//! Exit codes: 0 success, 2 domain or validation error, 3 infeasible or
//! undecided, 64 usage error. Failures print one JSON object on stderr.

mod args;
mod commands;
mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use clairvoyant::{Error, Params, Result};

use args::{Cli, Command, Global, Overrides};
use commands::{Ctx, Status};
use manifest::{manifest_path, now_ms, RunManifest};

const EXIT_DOMAIN: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    ExitCode::from(run_argv(std::env::args_os().collect()))
}

fn run_argv(argv: Vec<OsString>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            report(kind(&e), &e.to_string(), code);
            code
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_)
        | Error::Exhausted(_)
        | Error::SamplingBudget { .. }
        | Error::InsufficientSamples(_) => EXIT_INFEASIBLE,
        _ => EXIT_DOMAIN,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Overflow { .. } => "overflow",
        Error::Domain(_) => "domain",
        Error::Bounds(_) => "bounds",
        Error::InvalidPath { .. } => "invalid_path",
        Error::NoFullChunk(_) => "no_full_chunk",
        Error::Infeasible(_) => "infeasible",
        Error::SamplingBudget { .. } => "sampling_budget",
        Error::InsufficientSamples(_) => "insufficient_samples",
        Error::Exhausted(_) => "exhausted",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
    }
}

fn report(kind: &str, message: &str, code: u8) {
    let line = json!({ "error": { "kind": kind, "message": message, "exit_code": code } });
    eprintln!("{line}");
}

fn resolve_params(g: &Global, o: &Overrides) -> Result<Params> {
    let mut p = Params::preset(&g.preset)?;
    if let Some(path) = &g.params {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        p = Params::parse_onto(p, &text)?;
    }
    for (k, v) in o.pairs() {
        p.set(k, v)?;
    }
    for kv in &o.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("--set expects key=value, got `{kv}`")))?;
        p.set(k, v)?;
    }
    Ok(p)
}

fn is_stdout(out: &Option<String>) -> bool {
    matches!(out.as_deref(), None | Some("-" | "json" | "csv" | "text"))
}

fn run(cli: &Cli) -> Result<u8> {
    let started = now_ms();
    let g = &cli.global;
    let (cmd, ctx) = match &cli.cmd {
        Command::Rerun(r) => {
            let m = RunManifest::load(&r.manifest)?;
            let ctx = Ctx {
                params: m.params,
                seed: m.seed,
                workers: g.workers.unwrap_or(m.workers),
                force_point: m.force_point_estimate,
            };
            (m.command, ctx)
        }
        other => {
            let ctx = Ctx {
                params: resolve_params(g, &cli.overrides)?,
                seed: g.seed,
                workers: g.workers.unwrap_or(1),
                force_point: g.force_point_estimate,
            };
            (other.clone(), ctx)
        }
    };
    if ctx.workers == 0 {
        return Err(Error::Domain("--workers must be >= 1".into()));
    }
    if !matches!(cmd, Command::ParamsValidate) {
        let rep = ctx.params.validate();
        if !rep.ok {
            return Err(Error::Domain(format!(
                "invalid parameters: {}",
                rep.violations.join(", ")
            )));
        }
    }

    let outcome = commands::execute(&cmd, &ctx)?;
    let code = match outcome.status {
        Status::Ok => 0,
        Status::Invalid => EXIT_DOMAIN,
        Status::Undecided => EXIT_INFEASIBLE,
    };

    if is_stdout(&g.out) {
        let mut out = std::io::stdout().lock();
        out.write_all(&outcome.body)
            .and_then(|_| out.flush())
            .map_err(|e| Error::Io(e.to_string()))?;
    } else {
        let path = g.out.as_deref().unwrap_or_default();
        std::fs::write(path, &outcome.body).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        let m = RunManifest {
            subcommand: cmd.name().to_string(),
            command: cmd.clone(),
            params: ctx.params.clone(),
            seed: ctx.seed,
            force_point_estimate: ctx.force_point,
            workers: ctx.workers,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
            exit_code: code as i32,
            payload: path.to_string(),
        };
        m.save(Path::new(&manifest_path(path)))?;
    }

    match outcome.status {
        Status::Ok => {}
        Status::Invalid => report("validation", "parameter set violates its constraints", code),
        Status::Undecided => report("undecided", "a Monte Carlo verdict is undecided", code),
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        let mut v = vec!["clairvoyant"];
        v.extend_from_slice(args);
        Cli::try_parse_from(v).unwrap()
    }

    #[test]
    fn overrides_apply_after_preset() {
        let cli = parse(&[
            "params-validate",
            "--preset",
            "relaxed",
            "--L0",
            "5",
            "--set",
            "p_run=4",
        ]);
        let p = resolve_params(&cli.global, &cli.overrides).unwrap();
        assert_eq!(p.alpha, Params::relaxed().alpha);
        assert_eq!(p.l0, 5);
        assert_eq!(p.p_run, 4);
        let cli = parse(&["params-validate", "--set", "nope"]);
        assert!(matches!(
            resolve_params(&cli.global, &cli.overrides),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::Domain("x".into())), 2);
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::Infeasible("x".into())), 3);
        assert_eq!(exit_code(&Error::InsufficientSamples("x".into())), 3);
        assert_eq!(run_argv(vec!["clairvoyant".into(), "nope".into()]), 64);
    }

    #[test]
    fn stdout_targets() {
        assert!(is_stdout(&None));
        assert!(is_stdout(&Some("csv".into())));
        assert!(!is_stdout(&Some("out.csv".into())));
    }
}
