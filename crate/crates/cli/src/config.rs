//! TOML configuration files: keys are the subcommand's long flag names and
//! are spliced into the argument list ahead of the user's own flags, which
//! therefore take precedence.

use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;
use crate::Usage;

const GLOBAL_KEYS: [&str; 2] = ["format", "output"];

fn value_to_arg(key: &str, v: &toml::Value) -> Result<Option<String>, Usage> {
    let text = match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) if f.is_infinite() => if *f > 0.0 { "inf".into() } else { "-inf".into() },
        toml::Value::Float(f) => format!("{f:?}"),
        toml::Value::Boolean(true) => return Ok(None),
        toml::Value::Array(items) => items
            .iter()
            .map(|i| value_to_arg(key, i)?.ok_or_else(|| Usage(format!("config key '{key}': unsupported list item"))))
            .collect::<Result<Vec<_>, _>>()?
            .join(","),
        _ => return Err(Usage(format!("config key '{key}' has an unsupported value"))),
    };
    Ok(Some(text))
}

/// Long flags accepted by `subcommand`.
fn known_flags(subcommand: &str) -> Vec<String> {
    let cmd = Cli::command();
    cmd.find_subcommand(subcommand)
        .map(|sc| sc.get_arguments().filter_map(|a| a.get_long().map(String::from)).collect())
        .unwrap_or_default()
}

/// Reads `path` and returns `--key=value` arguments for `subcommand`.
pub fn config_args(path: &Path, subcommand: &str) -> anyhow::Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Usage(format!("cannot read config file {}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text)
        .map_err(|e| Usage(format!("config file {} is not valid TOML: {e}", path.display())))?;
    let known = known_flags(subcommand);
    let mut out = Vec::new();
    for (key, value) in &table {
        if !(known.iter().any(|k| k == key) || GLOBAL_KEYS.contains(&key.as_str())) {
            return Err(Usage(format!("unknown config key '{key}' for subcommand '{subcommand}'")).into());
        }
        match value_to_arg(key, value)? {
            Some(v) => out.push(OsString::from(format!("--{key}={v}"))),
            None => out.push(OsString::from(format!("--{key}"))),
        }
    }
    Ok(out)
}

/// Inserts `extra` right after the subcommand token of `argv`.
pub fn splice(argv: &[OsString], subcommand: &str, extra: Vec<OsString>) -> Vec<OsString> {
    let takes_value = ["--format", "--output", "--config"];
    let mut idx = None;
    for (i, a) in argv.iter().enumerate().skip(1) {
        if a == subcommand && !takes_value.iter().any(|f| argv[i - 1] == *f) {
            idx = Some(i);
            break;
        }
    }
    let at = idx.map_or(argv.len(), |i| i + 1);
    let mut out = argv[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at..]);
    out
}
