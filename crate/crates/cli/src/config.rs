//! Plain-text `key=value` config files. Keys are long flag names without the
//! leading dashes; values from the file are spliced in ahead of the command
//! line so explicit flags win.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use crate::UsageError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(UsageError(format!("config line {}: expected key=value", lineno + 1)).into());
        };
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(UsageError(format!("config line {}: empty key", lineno + 1)).into());
        }
        entries.push((key.to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

fn config_path(args: &[String]) -> Option<&str> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(String::as_str);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p);
        }
    }
    None
}

/// Returns `args` with the config file's entries inserted after the
/// subcommand name.
pub fn expand(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(path))
        .with_context(|| format!("reading config file {path}"))
        .map_err(|e| UsageError(format!("{e:#}")))?;
    let entries = parse(&text)?;
    let split = args.len().min(2);
    let mut out: Vec<String> = args[..split].to_vec();
    for (k, v) in entries {
        if k == "config" {
            continue;
        }
        out.push(format!("--{k}"));
        out.push(v);
    }
    out.extend_from_slice(&args[split..]);
    Ok(out)
}
