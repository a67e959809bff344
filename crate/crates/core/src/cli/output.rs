//! Output sinks and number formatting.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Number, Value};

/// Environment variable naming the default directory for data files.
pub const OUT_DIR_ENV: &str = "MCKV_OUT_DIR";

/// A JSON number carrying 17 significant digits; non-finite values become null.
pub fn num17(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format!("{x:.16e}")).map(Value::Number).unwrap_or(Value::Null)
}

/// Rewrites every float in `v` through [`num17`].
pub fn precise(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num17(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => {
            // arbitrary precision keeps the original text; integers stay integers
            let s = n.to_string();
            if s.contains(['.', 'e', 'E']) {
                s.parse::<f64>().map(num17).unwrap_or(Value::Number(n))
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(precise).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, precise(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    precise(serde_json::to_value(x).expect("serializable report"))
}

pub fn write_json(out: &mut dyn Write, v: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)
}

/// Where a data product goes: an explicit path, the default directory, or stdout.
pub fn resolve(explicit: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name))
}

pub fn create(path: &Path) -> io::Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}
