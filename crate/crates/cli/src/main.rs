mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command, Format};

/// Invalid invocation or input (exit status 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Finds the subcommand name and `--config` path without validating anything else.
fn prescan(argv: &[OsString]) -> (Option<String>, Option<PathBuf>) {
    let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let (mut sub, mut cfg) = (None, None);
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].to_string_lossy();
        if let Some(p) = a.strip_prefix("--config=") {
            cfg = Some(PathBuf::from(p));
        } else if a == "--config" {
            cfg = argv.get(i + 1).map(PathBuf::from);
            i += 1;
        } else if a == "--format" || a == "--output" {
            i += 1;
        } else if sub.is_none() && names.iter().any(|n| *n == a) {
            sub = Some(a.to_string());
        }
        i += 1;
    }
    (sub, cfg)
}

fn threads() -> anyhow::Result<Option<usize>> {
    match std::env::var("QED_DIM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Usage(format!("QED_DIM_THREADS must be a positive integer (got '{v}')")).into()),
        },
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let threads = threads()?;
    let table = match &cli.command {
        Command::Eval(a) => commands::eval(a)?,
        Command::Expand(a) => commands::expand(a)?,
        Command::Optimize(a) => commands::optimize(a)?,
        Command::DelayStaff(a) => commands::delay_staff(a)?,
        Command::Joint(a) => commands::joint(a)?,
        Command::JointTable(a) => commands::joint_table_cmd(a, threads)?,
        Command::GapSweep(a) => commands::gap_sweep_cmd(a, threads)?,
        Command::Fit(a) => commands::fit(a, threads)?,
        Command::Simulate(a) => commands::simulate_cmd(a)?,
    };
    let mut text = match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn exit_status(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<qed_core::Error>() {
        return if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL };
    }
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_VALIDATION;
    }
    EXIT_IO
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match prescan(&argv) {
        (Some(sub), Some(path)) => match config::config_args(&path, &sub) {
            Ok(extra) => config::splice(&argv, &sub, extra),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(exit_status(&e));
            }
        },
        _ => argv,
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout with status 0
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
