//! Plot-ready artifacts. Floats carry 15 significant digits, rows keep sweep
//! order, and nothing depends on time or thread count, so identical configs
//! give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// x rounded to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.14e}").parse().unwrap_or(x)
    } else {
        x
    }
}

/// Shortest text that parses back to `round15(x)`.
pub fn fmt_float(x: f64) -> String {
    let r = round15(x);
    let a = r.abs();
    if r == 0.0 || !r.is_finite() || (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round15(x))) {
                *n = x;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).with_context(|| format!("cannot create output directory {}", path.display()))?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, to_json(value)?).with_context(|| format!("cannot write {}", p.display()))?;
        Ok(p)
    }

    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).with_context(|| format!("cannot write {}", p.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_at_15_digits() {
        for x in [0.0, 1.0, -0.25, 1.0 / 3.0, 6.02214076e23, -1.6e-19, 123456.789012345, f64::NAN, f64::INFINITY] {
            let back: f64 = fmt_float(x).parse().unwrap();
            if x.is_nan() {
                assert!(back.is_nan());
            } else {
                assert_eq!(back, round15(x));
                assert!(x == 0.0 || !x.is_finite() || ((back - x) / x).abs() < 1e-14);
            }
        }
        assert_eq!(fmt_float(0.1 + 0.2), "0.3");
        assert_eq!(fmt_float(2.5e-7), "2.5e-7");
    }

    #[test]
    fn json_numbers_are_rounded() {
        let s = to_json(&serde_json::json!({"a": [0.1 + 0.2], "b": 3})).unwrap();
        assert!(s.contains("0.3") && !s.contains("0.30000000000000004"));
        assert!(s.contains("\"b\": 3"));
    }
}
