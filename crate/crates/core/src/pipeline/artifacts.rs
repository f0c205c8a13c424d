//! Artifact names and on-disk formats shared by the stages.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::ingest::{ReleaseRef, SourceFile};

pub const COMMITS: &str = "commits.jsonl";
pub const WINDOWS: &str = "windows.csv";
pub const TRANSITION: &str = "transition.json";
pub const RELEASES: &str = "releases.json";
pub const GRAPHS_DIR: &str = "graphs";
pub const SNAPSHOTS_DIR: &str = "snapshots";
pub const METRICS_DIR: &str = "metrics";
pub const DIFFS: &str = "diffs.json";
pub const CHANGE_RATES: &str = "change_rates.csv";
pub const SERIES: &str = "series.csv";
pub const CORRELATION: &str = "correlation.json";
pub const FORECAST: &str = "forecast.json";
pub const HOTSPOTS: &str = "hotspots.json";
pub const PLOT_CSV: &str = "plot.csv";
pub const PLOT_SVG: &str = "plot.svg";
pub const REPORT: &str = "report.json";

/// File stem for release `i`: zero-padded ordinal plus a filesystem-safe label.
pub fn release_stem(i: usize, label: &str) -> String {
    let safe: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{i:03}-{safe}")
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| PipelineError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact types serialize");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_text(path: &Path) -> Result<String, PipelineError> {
    match std::fs::read_to_string(path) {
        Ok(t) => Ok(t),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(PipelineError::MissingArtifact(path.to_path_buf())),
        Err(e) => Err(PipelineError::io(path, e)),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| PipelineError::artifact(path, e))
}

/// Sorted `*.json` / `*.csv` files of a directory.
pub fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, PipelineError> {
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(PipelineError::MissingArtifact(dir.to_path_buf()))
        }
        Err(e) => return Err(PipelineError::io(dir, e)),
    };
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| PipelineError::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == ext) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Source files of one release plus the file declaring each top-level class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub release: ReleaseRef,
    pub files: Vec<SourceFile>,
    pub classes: BTreeMap<String, String>,
    pub skipped_units: Vec<String>,
    pub ambiguous_references: usize,
}

/// One row of `series.csv`: a release and the activity window ending at it.
/// Decimal columns hold six-place decimals, or nothing when undefined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub index: i64,
    pub label: String,
    pub timestamp: i64,
    pub window_start: i64,
    pub window_end: i64,
    pub system_instability: String,
    pub system_instability_unweighted: String,
    pub instability_delta: String,
    pub modified_ratio: String,
    pub modified_files: usize,
    pub tracked_files: usize,
    pub commits: usize,
    pub feature: usize,
    pub bugfix: usize,
    pub refactoring: usize,
    pub other: usize,
}

pub fn write_series_csv(path: &Path, rows: &[SeriesRow]) -> Result<(), PipelineError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(SERIES_HEADER)
            .map_err(|e| PipelineError::artifact(path, e))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| PipelineError::artifact(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::artifact(path, e))?;
    write_bytes(path, &bytes)
}

pub const SERIES_HEADER: [&str; 16] = [
    "index",
    "label",
    "timestamp",
    "window_start",
    "window_end",
    "system_instability",
    "system_instability_unweighted",
    "instability_delta",
    "modified_ratio",
    "modified_files",
    "tracked_files",
    "commits",
    "feature",
    "bugfix",
    "refactoring",
    "other",
];

pub fn read_series_csv(path: &Path) -> Result<Vec<SeriesRow>, PipelineError> {
    let text = read_text(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| PipelineError::artifact(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != SERIES_HEADER {
        return Err(PipelineError::artifact(path, "unexpected header"));
    }
    let rows: Vec<SeriesRow> = r
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| PipelineError::artifact(path, e))?;
    for row in &rows {
        for cell in [
            &row.system_instability,
            &row.system_instability_unweighted,
            &row.instability_delta,
            &row.modified_ratio,
        ] {
            parse_decimal(cell).map_err(|m| PipelineError::artifact(path, m))?;
        }
    }
    Ok(rows)
}

/// Empty cell → `None`.
pub fn parse_decimal(cell: &str) -> Result<Option<f64>, String> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| format!("not a decimal: {cell:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_ordered_and_safe() {
        assert_eq!(release_stem(3, "rel/2.0 beta"), "003-rel_2.0_beta");
        assert!(release_stem(9, "z") < release_stem(10, "a"));
    }

    #[test]
    fn series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(SERIES);
        let row = SeriesRow {
            index: 0,
            label: "v1".into(),
            timestamp: 10,
            window_start: 1,
            window_end: 11,
            system_instability: "0.500000".into(),
            system_instability_unweighted: String::new(),
            instability_delta: String::new(),
            modified_ratio: "0.250000".into(),
            modified_files: 1,
            tracked_files: 4,
            commits: 2,
            feature: 1,
            bugfix: 0,
            refactoring: 0,
            other: 1,
        };
        write_series_csv(&path, std::slice::from_ref(&row)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&SERIES_HEADER.join(",")));
        assert_eq!(read_series_csv(&path).unwrap(), vec![row]);

        write_series_csv(&path, &[]).unwrap();
        assert!(read_series_csv(&path).unwrap().is_empty());
    }
}
