//! The `interlace` command line: argument handling, config files and the
//! JSON report shared by every subcommand.
//!
//! Exit codes: 0 when every check passes, 1 on an identity or tolerance
//! failure (including module errors), 2 on a usage error.

pub mod args;
mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command};
use commands::{Failure, Outcome};

pub const OUT_DIR_ENV: &str = "INTERLACE_OUT_DIR";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn dispatch(cmd: &Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Green(a) => commands::green(a),
        Command::Equilibrium(a) => commands::equilibrium(a),
        Command::Soup(a) => commands::soup(a),
        Command::Gff(a) => commands::gff(a),
        Command::Verify(a) => commands::verify(a),
        Command::Moments(a) => commands::moments(a),
        Command::Asymptotics(a) => commands::asymptotics_cmd(a),
        Command::Selftest(a) => commands::selftest(a),
    }
}

/// Report layout: {command, config, results[], pass, versions}. Contains no
/// timestamps, so equal arguments give byte-identical output.
pub fn report(command: &str, config: Value, results: Vec<Value>, pass: bool) -> Value {
    json!({
        "command": command,
        "config": config,
        "results": results,
        "pass": pass,
        "versions": {
            "interlace-cli": env!("CARGO_PKG_VERSION"),
            "interlace-core": interlace_core::VERSION,
        },
    })
}

fn write_outputs(dir: &PathBuf, command: &str, json_text: &str, csv: &[(String, String)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{command}.json")), json_text)?;
    for (name, body) in csv {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Run with the given argv (program name first), printing the report to `out`.
pub fn run_with<W: Write>(argv: Vec<String>, out: &mut W, err: &mut dyn Write) -> i32 {
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let cmd = cli.command;
    let name = cmd.name();
    let config = cmd.config_json();
    let (results, pass, csv) = match dispatch(&cmd) {
        Ok(o) => (o.results, o.pass, o.csv),
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Numerical(msg)) => (vec![json!({"error": msg})], false, Vec::new()),
    };
    let text = serde_json::to_string_pretty(&report(name, config, results, pass)).expect("report serializes");
    let _ = writeln!(out, "{text}");
    let dir = cmd.output().out_dir.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    if let Some(dir) = dir {
        if let Err(e) = write_outputs(&dir, name, &text, &csv) {
            let _ = writeln!(err, "error: writing to {}: {e}", dir.display());
            return EXIT_FAIL;
        }
    }
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

pub fn run(argv: Vec<String>) -> i32 {
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr())
}
