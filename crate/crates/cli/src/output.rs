//! Result tables and the artifact set written per run.

use std::path::{Path, PathBuf};
use std::time::Duration;

use carleson_core::Verdict;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};
use crate::spec::{ExperimentSpec, Format};

pub const RESULTS_CSV: &str = "results.csv";
pub const RESULTS_JSON: &str = "results.json";
pub const SUMMARY: &str = "summary.json";
pub const MANIFEST: &str = "manifest.json";
/// Resolved spec; `run --spec <out>/spec.json` replays the run.
pub const RESOLVED_SPEC: &str = "spec.json";

/// Plot-ready table. Reals are printed in shortest round-trip form so
/// replays compare byte for byte.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    /// Array of objects; numeric cells become JSON numbers.
    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(r)
                    .map(|(k, v)| (k.clone(), cell_value(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }
}

fn cell_value(s: &str) -> Value {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => serde_json::Number::from_f64(x).map_or(Value::String(s.into()), Value::Number),
        _ => Value::String(s.into()),
    }
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// What an operation returns: its table, summary fields and verdict.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    pub summary: Map<String, Value>,
    pub verdict: Verdict,
}

impl Outcome {
    pub fn new(table: Table, verdict: Verdict) -> Self {
        Self {
            table,
            summary: Map::new(),
            verdict,
        }
    }

    pub fn with<T: Serialize>(mut self, key: &str, value: T) -> Self {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    name: &'a str,
    seed: u64,
    n_samples: usize,
    threads: usize,
    elapsed_seconds: f64,
    verdict: Verdict,
    exit_code: i32,
    spec: &'a str,
    artifacts: Vec<String>,
}

/// Writes results, summary, resolved spec and manifest into `dir`.
pub fn write_artifacts(
    dir: &Path,
    spec: &ExperimentSpec,
    outcome: &Outcome,
    format: Format,
    elapsed: Duration,
    exit_code: i32,
) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    let results = match format {
        Format::Csv => (RESULTS_CSV, outcome.table.to_csv()),
        Format::Json => (RESULTS_JSON, pretty(&outcome.table.to_json())),
    };
    let mut summary = Map::new();
    summary.insert("name".into(), Value::String(spec.name.clone()));
    summary.insert("operation".into(), Value::String(spec.operation.tag().into()));
    summary.insert("verdict".into(), Value::String(outcome.verdict.to_string()));
    summary.insert("exit_code".into(), Value::from(exit_code));
    summary.extend(outcome.summary.clone());
    let files = [
        (results.0, results.1),
        (SUMMARY, pretty(&Value::Object(summary))),
        (RESOLVED_SPEC, pretty(&serde_json::to_value(spec).expect("spec serializes"))),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        written.push(write(dir, name, &body)?);
    }
    let manifest = Manifest {
        tool: "carleson-lab",
        version: env!("CARGO_PKG_VERSION"),
        command: spec.operation.tag(),
        name: &spec.name,
        seed: spec.mc.seed,
        n_samples: spec.mc.n_samples,
        threads: rayon::current_num_threads(),
        elapsed_seconds: elapsed.as_secs_f64(),
        verdict: outcome.verdict,
        exit_code,
        spec: RESOLVED_SPEC,
        artifacts: written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
    };
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    written.push(write(dir, MANIFEST, &body)?);
    Ok(written)
}

pub fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

pub fn write(dir: &Path, name: &str, body: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| output_error(&path, e))?;
    Ok(path)
}

fn output_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Output {
        path: path.display().to_string(),
        source,
    }
}
