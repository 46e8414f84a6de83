use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::geometry::GeometryConstants;

/// One row of a report: inputs, measured values and a pass/fail verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    pub params: BTreeMap<String, Value>,
    pub values: BTreeMap<String, Value>,
    /// Distance from the expected outcome; `pass` iff it is within `tolerance`.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Case {
    pub fn new() -> Self {
        Self {
            params: BTreeMap::new(),
            values: BTreeMap::new(),
            residual: 0.0,
            tolerance: 0.0,
            pass: true,
        }
    }

    pub fn param(mut self, key: &str, v: impl Serialize) -> Self {
        self.params.insert(key.to_string(), to_value(v));
        self
    }

    pub fn value(mut self, key: &str, v: impl Serialize) -> Self {
        self.values.insert(key.to_string(), to_value(v));
        self
    }

    /// Passes iff `residual <= tolerance` (a NaN residual fails).
    pub fn check(mut self, residual: f64, tolerance: f64) -> Self {
        self.residual = residual;
        self.tolerance = tolerance;
        self.pass = residual <= tolerance;
        self
    }

    /// A yes/no property; the residual is 0 or 1.
    pub fn holds(self, ok: bool) -> Self {
        self.check(if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).and_then(Value::as_f64)
    }
}

impl Default for Case {
    fn default() -> Self {
        Self::new()
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub geometry: Vec<GeometryConstants>,
    pub cases: Vec<Case>,
    pub pass: bool,
    pub wall_ms: f64,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }

    /// Cases whose `params[key] == value`.
    pub fn select<'a>(&'a self, key: &'a str, value: impl Serialize) -> impl Iterator<Item = &'a Case> + 'a {
        let v = to_value(value);
        self.cases.iter().filter(move |c| c.params.get(key) == Some(&v))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report without its timing, for determinism comparisons.
    pub fn content_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(m) = &mut v {
            m.remove("wall_ms");
        }
        Ok(serde_json::to_string(&v)?)
    }

    /// One CSV row per case: every param and value key as a column, then
    /// `residual, tolerance, pass`.
    pub fn to_csv(&self) -> Result<String> {
        let params: BTreeSet<&String> = self.cases.iter().flat_map(|c| c.params.keys()).collect();
        let values: BTreeSet<&String> = self
            .cases
            .iter()
            .flat_map(|c| c.values.keys())
            .filter(|k| !params.contains(k))
            .collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        header.extend(values.iter().map(|s| s.to_string()));
        header.extend(["residual", "tolerance", "pass"].map(String::from));
        w.write_record(&header)?;
        let cell = |v: Option<&Value>| match v {
            None | Some(Value::Null) => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
        };
        for c in &self.cases {
            let mut row: Vec<String> = params.iter().map(|k| cell(c.params.get(*k))).collect();
            row.extend(values.iter().map(|k| cell(c.values.get(*k))));
            row.push(c.residual.to_string());
            row.push(c.tolerance.to_string());
            row.push(c.pass.to_string());
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    /// Writes `<command>.json` and `<command>.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let json = dir.join(format!("{}.json", self.command));
        let csv = dir.join(format!("{}.csv", self.command));
        fs::write(&json, self.to_json()?)?;
        fs::write(&csv, self.to_csv()?)?;
        Ok((json, csv))
    }
}
