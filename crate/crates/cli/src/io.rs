//! Deterministic text output and atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use neurocart::control::SimTrace;
use serde::Serialize;
use serde_json::Value;

/// Nine significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

/// `v` rounded to nine significant digits.
pub fn round9(v: f64) -> f64 {
    if v.is_finite() {
        num(v).parse().expect("formatted float parses")
    } else {
        v
    }
}

fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .map(|f| serde_json::json!(round9(f)))
            .unwrap_or(Value::Number(n)),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

/// Pretty JSON with every float cut to nine significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = round_floats(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn trace_header(n_links: usize) -> String {
    let mut cols = vec!["t".to_string(), "x".into(), "xdot".into()];
    cols.extend((1..=n_links).map(|i| format!("theta_{i}")));
    cols.extend((1..=n_links).map(|i| format!("thetadot_{i}")));
    cols.push("u".into());
    cols.join(",")
}

pub fn trace_csv(trace: &SimTrace) -> String {
    let n = trace.states.first().map_or(0, |s| s.n_links());
    let mut out = trace_header(n);
    out.push('\n');
    for ((t, s), u) in trace.times.iter().zip(&trace.states).zip(&trace.controls) {
        let mut row = vec![num(*t), num(s.x()), num(s.x_dot())];
        row.extend(s.angles().iter().map(|v| num(*v)));
        row.extend((0..n).map(|i| num(s.theta_dot(i))));
        row.push(num(*u));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn raster_csv(trace: &SimTrace) -> String {
    let mut out = String::from("t,neuron_id\n");
    for s in &trace.raster {
        let _ = writeln!(out, "{},{}", num(s.t), s.neuron);
    }
    out
}

/// Header and rows of a comma-separated file.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .with_context(|| format!("{} is empty", path.display()))?;
    let header = header.split(',').map(str::to_string).collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(0.1), "1.00000000e-1");
        assert_eq!(num(-123456789.25), "-1.23456789e8");
        assert_eq!(round9(1.0 / 3.0), 0.333333333);
        assert!(round9(f64::NAN).is_nan());
    }

    #[test]
    fn json_floats_are_rounded() {
        let s = to_json(&serde_json::json!({"a": 2.0f64 / 3.0, "b": 3, "c": [0.1234567891234]}))
            .unwrap();
        assert!(s.contains("0.666666667"), "{s}");
        assert!(s.contains("\"b\": 3"));
        assert!(s.contains("0.123456789"));
    }
}
