//! Text output: JSON with 17-significant-digit reals, CSV helpers and run
//! manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Result;

/// Format a real with 17 significant digits; non-finite values print as `nan`,
/// `inf` or `-inf`.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// A JSON value with ordered object keys.
#[derive(Clone, Debug, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Self {
        Json::Obj(Vec::new())
    }

    /// Append a field; panics if `self` is not an object.
    pub fn field(mut self, key: &str, value: impl Into<Json>) -> Self {
        match &mut self {
            Json::Obj(fields) => fields.push((key.to_string(), value.into())),
            _ => panic!("field on non-object"),
        }
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0, false);
        out
    }

    pub fn render_pretty(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0, true);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, depth: usize, pretty: bool) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(x) if x.is_finite() => out.push_str(&real(*x)),
            Json::Num(_) => out.push_str("null"),
            Json::Str(s) => out.push_str(&serde_json::Value::String(s.clone()).to_string()),
            Json::Arr(items) => Self::write_seq(out, depth, pretty, '[', ']', items.iter().map(|v| (None, v))),
            Json::Obj(fields) => {
                Self::write_seq(out, depth, pretty, '{', '}', fields.iter().map(|(k, v)| (Some(k.as_str()), v)))
            }
        }
    }

    fn write_seq<'a>(
        out: &mut String,
        depth: usize,
        pretty: bool,
        open: char,
        close: char,
        items: impl Iterator<Item = (Option<&'a str>, &'a Json)>,
    ) {
        out.push(open);
        let mut empty = true;
        for (i, (key, value)) in items.enumerate() {
            empty = false;
            if i > 0 {
                out.push(',');
            }
            if pretty {
                out.push('\n');
                out.push_str(&"  ".repeat(depth + 1));
            }
            if let Some(k) = key {
                out.push_str(&serde_json::Value::String(k.to_string()).to_string());
                out.push_str(if pretty { ": " } else { ":" });
            }
            value.write(out, depth + 1, pretty);
        }
        if pretty && !empty {
            out.push('\n');
            out.push_str(&"  ".repeat(depth));
        }
        out.push(close);
    }
}

impl From<f64> for Json {
    fn from(x: f64) -> Self {
        Json::Num(x)
    }
}

impl From<Option<f64>> for Json {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Json::Null, Json::Num)
    }
}

impl From<bool> for Json {
    fn from(b: bool) -> Self {
        Json::Bool(b)
    }
}

impl From<usize> for Json {
    fn from(i: usize) -> Self {
        Json::Int(i as i64)
    }
}

impl From<u32> for Json {
    fn from(i: u32) -> Self {
        Json::Int(i as i64)
    }
}

impl From<u64> for Json {
    /// Seeds are full 64-bit values, so they are written as strings when they
    /// do not fit an `i64`.
    fn from(i: u64) -> Self {
        i64::try_from(i).map_or_else(|_| Json::Str(i.to_string()), Json::Int)
    }
}

impl From<&str> for Json {
    fn from(s: &str) -> Self {
        Json::Str(s.to_string())
    }
}

impl From<String> for Json {
    fn from(s: String) -> Self {
        Json::Str(s)
    }
}

impl From<Vec<Json>> for Json {
    fn from(v: Vec<Json>) -> Self {
        Json::Arr(v)
    }
}

/// Convert any serializable value, keeping field order and writing floats
/// with 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<Json> {
    Ok(from_value(serde_json::to_value(value)?))
}

fn from_value(v: serde_json::Value) -> Json {
    use serde_json::Value;
    match v {
        Value::Null => Json::Null,
        Value::Bool(b) => Json::Bool(b),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => Json::Int(i),
            (None, Some(u)) => u.into(),
            _ => Json::Num(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => Json::Str(s),
        Value::Array(items) => Json::Arr(items.into_iter().map(from_value).collect()),
        Value::Object(map) => Json::Obj(map.into_iter().map(|(k, v)| (k, from_value(v))).collect()),
    }
}

/// Write `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Run provenance written next to every set of outputs.
pub fn manifest(subcommand: &str, config: Json, wall_ms: f64, artifacts: &[&str]) -> Json {
    Json::obj()
        .field("tool", env!("CARGO_PKG_NAME"))
        .field("version", env!("CARGO_PKG_VERSION"))
        .field("subcommand", subcommand)
        .field("config", config)
        .field("wall_ms", wall_ms)
        .field("artifacts", Json::Arr(artifacts.iter().map(|a| Json::from(*a)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, f64::MIN_POSITIVE] {
            let s = real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits: String = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
            assert_eq!(digits.len(), 17);
        }
        assert_eq!(real(f64::NAN), "nan");
        assert_eq!(opt_real(None), "");
    }

    #[test]
    fn json_is_valid() {
        let j = Json::obj()
            .field("a", 0.5)
            .field("b", "x\"y")
            .field("c", Json::Arr(vec![Json::Null, true.into(), 3usize.into()]))
            .field("d", f64::NAN)
            .field("e", u64::MAX)
            .field("f", Json::obj());
        for text in [j.render(), j.render_pretty()] {
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(v["a"], 0.5);
            assert_eq!(v["b"], "x\"y");
            assert!(v["d"].is_null());
            assert_eq!(v["e"], u64::MAX.to_string());
        }
    }

    #[test]
    fn serializable_values_keep_order_and_precision() {
        #[derive(Serialize)]
        struct S {
            z: f64,
            a: usize,
            m: Option<f64>,
        }
        let j = to_json(&S { z: 0.1, a: 3, m: None }).unwrap();
        assert_eq!(j.render(), format!("{{\"z\":{},\"a\":3,\"m\":null}}", real(0.1)));
    }
}
