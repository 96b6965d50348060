//! Flat `key = value` run files whose keys are the long flag names.

use std::path::Path;

use crate::error::{CliError, Result};

/// Parse a run file into `--key value` arguments.
pub fn parse(text: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(CliError::Config(format!("line {}: invalid key `{key}`", i + 1)));
        }
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_string());
            }
        }
    }
    Ok(args)
}

/// Splice the contents of any `--config FILE` into `argv` right after the
/// subcommand, so later command-line flags override them.
pub fn expand(argv: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut files = Vec::new();
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            let path = iter
                .next()
                .ok_or_else(|| CliError::Config("--config needs a file path".into()))?;
            files.push(path);
        } else if let Some(path) = arg.strip_prefix("--config=") {
            files.push(path.to_string());
        } else {
            rest.push(arg);
        }
    }
    if files.is_empty() {
        return Ok(rest);
    }
    let mut injected = Vec::new();
    for path in &files {
        let text = std::fs::read_to_string(Path::new(path))
            .map_err(|e| CliError::Config(format!("cannot read config file {path}: {e}")))?;
        injected.extend(parse(&text)?);
    }
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map_or(rest.len(), |p| p + 2);
    rest.splice(at..at, injected);
    Ok(rest)
}
