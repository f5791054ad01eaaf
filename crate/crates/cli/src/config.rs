use std::ffi::OsString;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;

/// Finds `--config FILE` or `--config=FILE` in raw arguments.
pub fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Turns a JSON object into flag tokens. Keys are flag names with `_` or `-`;
/// `true` becomes a bare flag, `false` and `null` are dropped, arrays are
/// comma joined.
pub fn config_flags(path: &Path) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::User(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::User(format!(
            "config {} must be a JSON object",
            path.display()
        )));
    };
    let mut flags = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" {
            continue;
        }
        let scalar = |v: &Value| match v {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => None,
        };
        match &v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => flags.push(flag.into()),
            Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
                let parts = parts.ok_or_else(|| CliError::User(format!("config key {key:?} must hold scalars")))?;
                flags.push(flag.into());
                flags.push(parts.join(",").into());
            }
            Value::Object(_) => return Err(CliError::User(format!("config key {key:?} cannot be an object"))),
            other => {
                flags.push(flag.into());
                flags.push(scalar(other).expect("string or number").into());
            }
        }
    }
    Ok(flags)
}

/// Inserts config flags right after the subcommand so that explicit flags,
/// which come later, override them.
pub fn merge(argv: Vec<OsString>, flags: Vec<OsString>, subcommands: &[&str]) -> Vec<OsString> {
    let pos = argv
        .iter()
        .position(|a| subcommands.iter().any(|s| a == *s))
        .map(|p| p + 1)
        .unwrap_or(argv.len());
    let mut out = argv[..pos].to_vec();
    out.extend(flags);
    out.extend_from_slice(&argv[pos..]);
    out
}
