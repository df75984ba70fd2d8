use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub name: String,
    pub value: f64,
    pub anchor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub assertion: String,
    pub anchor: String,
    pub measured: f64,
    pub expected: String,
    pub pass: bool,
}

/// Side table, written as `table_<name>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A figure for the plotting component: `kind` is one of `decay`,
/// `histogram`, `strata`, `path3d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureEntry {
    pub kind: String,
    pub table: String,
    pub x: String,
    pub y: String,
    /// Metric holding the fitted slope to annotate, for decay plots.
    pub slope_metric: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub started_unix_ms: u64,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub id: String,
    pub anchor: String,
    pub config: ExperimentConfig,
    pub conventions: BTreeMap<String, String>,
    pub metrics: Vec<MetricRecord>,
    pub verdicts: Vec<Verdict>,
    pub tables: Vec<Table>,
    pub figures: Vec<FigureEntry>,
    pub timestamp: Timestamp,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// `report.json` contents with the timestamp zeroed.
    pub fn canonical_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.timestamp = Timestamp {
            started_unix_ms: 0,
            runtime_ms: 0,
        };
        Ok(serde_json::to_string_pretty(&r)?)
    }
}

pub(crate) struct ReportBuilder {
    report: ExperimentReport,
}

impl ReportBuilder {
    pub(crate) fn new(id: &str, anchor: &str, config: ExperimentConfig) -> Self {
        let mut conventions = crate::heisenberg::conventions();
        conventions.insert(
            "content".into(),
            "sum of r^s over a greedy farthest-point cover of radius r".into(),
        );
        conventions.insert(
            "jet_rank".into(),
            "#{sigma_i > tol * sigma_max} of a symmetric-stencil least-squares jet".into(),
        );
        Self {
            report: ExperimentReport {
                schema_version: SCHEMA_VERSION,
                id: id.into(),
                anchor: anchor.into(),
                config,
                conventions,
                metrics: Vec::new(),
                verdicts: Vec::new(),
                tables: Vec::new(),
                figures: Vec::new(),
                timestamp: Timestamp {
                    started_unix_ms: 0,
                    runtime_ms: 0,
                },
            },
        }
    }

    pub(crate) fn metric(&mut self, name: impl Into<String>, value: f64, anchor: &str) {
        self.report.metrics.push(MetricRecord {
            name: name.into(),
            value,
            anchor: anchor.into(),
        });
    }

    /// Records `measured` both as a metric and as a verdict.
    pub(crate) fn check(
        &mut self,
        assertion: impl Into<String>,
        anchor: &str,
        measured: f64,
        expected: impl Into<String>,
        pass: bool,
    ) {
        let assertion = assertion.into();
        self.metric(assertion.clone(), measured, anchor);
        self.report.verdicts.push(Verdict {
            assertion,
            anchor: anchor.into(),
            measured,
            expected: expected.into(),
            pass,
        });
    }

    pub(crate) fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.report.tables.push(Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        });
    }

    pub(crate) fn figure(&mut self, kind: &str, table: &str, x: &str, y: &str, slope_metric: Option<&str>) {
        self.report.figures.push(FigureEntry {
            kind: kind.into(),
            table: table.into(),
            x: x.into(),
            y: y.into(),
            slope_metric: slope_metric.map(String::from),
        });
    }

    pub(crate) fn finish(mut self, timestamp: Timestamp) -> ExperimentReport {
        self.report.timestamp = timestamp;
        self.report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `report.json`
    Json,
    /// `metrics.csv`, one row per metric.
    Csv,
    /// One `table_<name>.csv` per side table.
    Tables,
    /// `manifest.json` listing figures to render.
    Manifest,
}

/// Figure list consumed by the plotting component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub id: String,
    pub report: String,
    pub figures: Vec<ManifestFigure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFigure {
    #[serde(flatten)]
    pub entry: FigureEntry,
    pub source: String,
    pub output: String,
    pub slope: Option<f64>,
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf> {
    fs::write(&path, bytes).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn csv_bytes(columns: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
}

/// Writes the requested files into `dir` (created if needed) and returns
/// their paths.
pub fn emit_report(report: &ExperimentReport, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    if report.metrics.is_empty() || report.verdicts.is_empty() {
        return Err(Error::EmptyReport(report.id.clone()));
    }
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for f in formats {
        match f {
            Format::Json => {
                out.push(write(
                    dir.join("report.json"),
                    serde_json::to_string_pretty(report)?.as_bytes(),
                )?);
            }
            Format::Csv => {
                let cols = ["name", "value", "anchor"].map(String::from);
                let bytes = csv_bytes(
                    &cols,
                    report
                        .metrics
                        .iter()
                        .map(|m| vec![m.name.clone(), m.value.to_string(), m.anchor.clone()]),
                )?;
                out.push(write(dir.join("metrics.csv"), &bytes)?);
            }
            Format::Tables => {
                for t in &report.tables {
                    let bytes = csv_bytes(
                        &t.columns,
                        t.rows.iter().map(|r| r.iter().map(f64::to_string).collect()),
                    )?;
                    out.push(write(dir.join(format!("table_{}.csv", t.name)), &bytes)?);
                }
            }
            Format::Manifest => {
                let figures = report
                    .figures
                    .iter()
                    .enumerate()
                    .map(|(i, e)| ManifestFigure {
                        source: format!("table_{}.csv", e.table),
                        output: format!("{}_{}_{}", report.id, i, e.kind),
                        slope: e.slope_metric.as_deref().and_then(|m| report.metric(m)),
                        entry: e.clone(),
                    })
                    .collect();
                let manifest = Manifest {
                    schema_version: SCHEMA_VERSION,
                    id: report.id.clone(),
                    report: "report.json".into(),
                    figures,
                };
                out.push(write(
                    dir.join("manifest.json"),
                    serde_json::to_string_pretty(&manifest)?.as_bytes(),
                )?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let cfg = ExperimentConfig::load("E9_straightening", None, None).unwrap();
        let mut b = ReportBuilder::new("E9_straightening", "anchor", cfg);
        b.metric("a", 1.0, "anchor");
        b.check("b", "anchor", 2.0, "< 3", true);
        b.table("series", &["x", "y"], vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        b.figure("decay", "series", "x", "y", Some("a"));
        b.finish(Timestamp {
            started_unix_ms: 5,
            runtime_ms: 7,
        })
    }

    #[test]
    fn json_only_is_one_file() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&sample(), &[Format::Json], dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        let back: ExperimentReport = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn csv_rows_match_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        let files = emit_report(&r, &[Format::Json, Format::Csv], dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let rows = csv::Reader::from_path(&files[1]).unwrap().records().count();
        assert_eq!(rows, r.metrics.len());
    }

    #[test]
    fn manifest_carries_slopes() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&sample(), &[Format::Tables, Format::Manifest], dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let m: Manifest = serde_json::from_str(&fs::read_to_string(&files[1]).unwrap()).unwrap();
        assert_eq!(m.figures[0].slope, Some(1.0));
        assert_eq!(m.figures[0].source, "table_series.csv");
    }

    #[test]
    fn empty_report_is_refused() {
        let mut r = sample();
        r.metrics.clear();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_report(&r, &[Format::Json], dir.path()),
            Err(Error::EmptyReport(_))
        ));
    }
}
