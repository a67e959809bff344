//! `--config FILE` support: `key=value` lines or a JSON object, turned into
//! `--key value` tokens placed ahead of the command-line flags so that the
//! flags take precedence.

use std::ffi::OsString;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

/// Removes `--config PATH` / `--config=PATH` from `argv` and splices the
/// file's entries in right after the subcommand name.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let p = it.next().ok_or_else(|| Error::config("--config needs a file path"))?;
            path = Some(p);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    // program name, then the subcommand
    let sub = rest.get(1).map(|s| s.to_string_lossy().into_owned());
    let tokens = tokens_from_text(&text, sub.as_deref())?;
    let at = rest.len().min(2);
    rest.splice(at..at, tokens);
    Ok(rest)
}

fn tokens_from_text(text: &str, subcommand: Option<&str>) -> Result<Vec<OsString>> {
    let trimmed = text.trim_start();
    let entries = if trimmed.starts_with('{') {
        json_entries(trimmed, subcommand)?
    } else {
        kv_entries(text)?
    };
    let mut out = Vec::new();
    for (key, value) in entries {
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(Error::config(format!("invalid config key '{key}'")));
        }
        match value.as_str() {
            "true" => out.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                out.push(OsString::from(format!("--{key}")));
                out.push(OsString::from(value));
            }
        }
    }
    Ok(out)
}

fn kv_entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("config line {} is not key=value: {line}", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Accepts either a flat object or a run summary with a `config` member.
fn json_entries(text: &str, subcommand: Option<&str>) -> Result<Vec<(String, String)>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::config(format!("malformed JSON config: {e}")))?;
    let obj = match &value {
        Value::Object(o) => match o.get("config") {
            Some(Value::Object(inner)) => inner,
            _ => o,
        },
        _ => return Err(Error::config("JSON config must be an object")),
    };
    let mut out = Vec::new();
    for (k, v) in obj {
        if k == "command" {
            if let (Value::String(cmd), Some(sub)) = (v, subcommand) {
                if cmd != sub {
                    return Err(Error::config(format!("config is for '{cmd}', not '{sub}'")));
                }
            }
            continue;
        }
        let text = match v {
            Value::Null => continue,
            Value::Bool(b) => b.to_string(),
            Value::Number(n) => n.to_string(),
            Value::String(s) => s.clone(),
            Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(Error::config(format!("unsupported list entry for '{k}'"))),
                })
                .collect::<Result<Vec<_>>>()?
                .join(","),
            Value::Object(_) => return Err(Error::config(format!("nested objects are not allowed for '{k}'"))),
        };
        out.push((k.clone(), text));
    }
    Ok(out)
}
