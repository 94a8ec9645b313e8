use crate::error::Result;
use crate::rng::GENERATOR_ID;
use crate::stats::Estimate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Version of the JSON summary layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Integral values print without a fraction; the rest use the shortest
/// representation that round-trips.
fn fmt_cell(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Outcome of one named check and the tolerance it was held to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassFlag {
    pub passed: bool,
    pub criterion: String,
    pub tolerance: f64,
}

/// Everything a run produced. Maps are ordered so serialized output is stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub generator_id: String,
    pub parameters: BTreeMap<String, Value>,
    pub exact: BTreeMap<String, f64>,
    pub estimates: BTreeMap<String, Estimate>,
    pub bounds: BTreeMap<String, f64>,
    pub distances: BTreeMap<String, f64>,
    pub pass_flags: BTreeMap<String, PassFlag>,
    pub labels: BTreeMap<String, String>,
    /// Grids and curves that are not per-replicate, e.g. `x` and a density on it.
    pub series: BTreeMap<String, Vec<f64>>,
    /// CSV header; the first column is always `replicate`.
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        ExperimentReport {
            name: name.to_string(),
            generator_id: GENERATOR_ID.to_string(),
            parameters: BTreeMap::new(),
            exact: BTreeMap::new(),
            estimates: BTreeMap::new(),
            bounds: BTreeMap::new(),
            distances: BTreeMap::new(),
            pass_flags: BTreeMap::new(),
            labels: BTreeMap::new(),
            series: BTreeMap::new(),
            columns: vec!["replicate".to_string(), "value".to_string()],
            rows: Vec::new(),
        }
    }

    pub fn param<T: Serialize>(&mut self, key: &str, value: T) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.parameters.insert(key.to_string(), v);
        self
    }

    pub fn flag(&mut self, key: &str, passed: bool, criterion: impl Into<String>, tolerance: f64) {
        self.pass_flags.insert(
            key.to_string(),
            PassFlag {
                passed,
                criterion: criterion.into(),
                tolerance,
            },
        );
    }

    pub fn all_passed(&self) -> bool {
        self.pass_flags.values().all(|f| f.passed)
    }

    /// Per-replicate rows; `values[j][k]` is column `j + 1` of replicate `k`.
    pub fn set_rows(&mut self, columns: &[&str], values: &[&[f64]]) {
        self.columns = std::iter::once("replicate")
            .chain(columns.iter().copied())
            .map(str::to_string)
            .collect();
        let reps = values.first().map_or(0, |v| v.len());
        self.rows = (0..reps)
            .map(|k| {
                std::iter::once(k as f64)
                    .chain(values.iter().map(|v| v[k]))
                    .collect()
            })
            .collect();
    }

    /// Rows without a replicate column, for calculators that emit a table.
    pub fn set_table(&mut self, columns: &[&str], values: &[&[f64]]) {
        self.columns = columns.iter().map(|c| c.to_string()).collect();
        let len = values.first().map_or(0, |v| v.len());
        self.rows = (0..len)
            .map(|k| values.iter().map(|v| v[k]).collect())
            .collect();
    }

    pub fn write_csv_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let mut line = String::with_capacity(24 * row.len());
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&fmt_cell(*v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// JSON summary: the report plus `schema_version` and any extra
    /// top-level fields (the CLI adds the resolved config and a timestamp).
    pub fn to_json(&self, extra: &[(&str, Value)]) -> Result<Value> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(map) = &mut v {
            map.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
            map.insert("rows".into(), Value::from(self.rows.len()));
            for (k, x) in extra {
                map.insert((*k).to_string(), x.clone());
            }
        }
        Ok(v)
    }

    pub fn write_json(&self, path: &Path, extra: &[(&str, Value)]) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json(extra)?)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
