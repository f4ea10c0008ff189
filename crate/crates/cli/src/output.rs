//! Writers for JSON reports and CSV tables. Floats carry 17 significant
//! digits and files are replaced atomically.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // JSON has no NaN or infinity; CSV readers accept these spellings
        format!("{v}")
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => write!(out, "{u}").unwrap(),
            (None, Some(i)) => write!(out, "{i}").unwrap(),
            _ => out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                write!(out, "{}{}: ", pad(indent + 1), Value::String(k.clone())).unwrap();
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Io(format!("serialization: {e}")))?;
    let mut s = String::new();
    write_value(&mut s, &v, 0);
    s.push('\n');
    Ok(s)
}

/// A table whose numeric cells are written with [`fmt_f64`].
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: impl IntoIterator<Item = f64>) {
        self.push(row.into_iter().map(fmt_f64).collect());
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        Ok(Self(path))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    /// Writes through a temporary file in the same directory and renames.
    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let target = self.path(name);
        let io = |e: std::io::Error| CliError::Io(format!("writing {}: {e}", target.display()));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.0).map_err(io)?;
        tmp.write_all(contents.as_bytes()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&target).map_err(|e| io(e.error))?;
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        self.write(name, &to_json(value)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_seventeen_digits() {
        let x = 0.1 + 0.2;
        let s = fmt_f64(x);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_output_parses_back() {
        let v = serde_json::json!({"a": [1.5, 2, -3], "b": {"c": null, "d": "x\"y"}, "e": []});
        let s = to_json(&v).unwrap();
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(s.contains("1.5000000000000000e0"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("sub");
        let out = OutDir::create(sub.clone()).unwrap();
        out.write("a.txt", "one").unwrap();
        out.write("a.txt", "two").unwrap();
        assert_eq!(std::fs::read_to_string(out.path("a.txt")).unwrap(), "two");
        assert_eq!(std::fs::read_dir(&sub).unwrap().count(), 1);
    }
}
