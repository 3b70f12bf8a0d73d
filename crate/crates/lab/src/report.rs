//! Structured output. Reports are JSON objects tagged with [`SCHEMA`];
//! per-replicate rows go to CSV with one header line per experiment.

use std::io::Write;
use std::path::Path;

use hardcore_core::estimators::Estimate;
use hardcore_core::Graph;
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};

pub const SCHEMA: &str = "hardcore-lab.report.v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub max_degree: usize,
}

impl GraphSummary {
    pub fn of(g: &Graph) -> Self {
        Self {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            max_degree: g.max_degree(),
        }
    }
}

/// A point estimate. `half_width` is absent for exact quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    pub replicates: u64,
    pub seed: u64,
}

impl Metric {
    pub fn exact(name: &str, value: f64, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            value,
            half_width: None,
            replicates: 1,
            seed,
        }
    }

    pub fn estimate(name: &str, e: &Estimate, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            value: e.mean,
            half_width: Some(e.half_width),
            replicates: e.count,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::AtMost => "<=",
            Self::AtLeast => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            comparison: Comparison::AtMost,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            comparison: Comparison::AtLeast,
            passed: value >= threshold,
        }
    }

    /// A yes/no condition, recorded as 1 or 0 against 1.
    pub fn holds(name: &str, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub experiment: String,
    pub inputs: Option<ExperimentConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSummary>,
    pub parameters: Value,
    pub metrics: Vec<Metric>,
    pub details: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Only present with `--timing`, so plain runs stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl Report {
    pub fn new(experiment: &str, inputs: Option<ExperimentConfig>) -> Self {
        Self {
            schema: SCHEMA,
            experiment: experiment.to_string(),
            inputs,
            lambda: None,
            graph: None,
            parameters: Value::Object(Default::default()),
            metrics: Vec::new(),
            details: Value::Object(Default::default()),
            checks: Vec::new(),
            passed: true,
            wall_clock_seconds: None,
        }
    }

    pub fn push_check(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// Writes to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::write(p, text).map_err(|e| LabError::io(p, e)),
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| LabError::io("<stdout>", e))
        }
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| LabError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_check_fails_report() {
        let mut r = Report::new("x", None);
        r.push_check(Check::at_most("a", 1.0, 2.0));
        assert!(r.passed);
        r.push_check(Check::at_least("b", 1.0, 2.0));
        assert!(!r.passed);
        let json: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["checks"][1]["comparison"], ">=");
        assert_eq!(json["schema"], SCHEMA);
        assert!(json.get("wall_clock_seconds").is_none());
    }

    #[test]
    fn csv_rows_have_headers() {
        #[derive(Serialize)]
        struct Row {
            replicate: usize,
            value: f64,
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        write_csv(&path, &[Row { replicate: 0, value: 0.5 }, Row { replicate: 1, value: 2.0 }]).unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "replicate,value\n0,0.5\n1,2.0\n");
    }
}
