//! Schema checks for an output directory.

use std::path::Path;

use serde::Serialize;

use super::artifacts::*;
use super::{PipelineError, TransitionArtifact};
use crate::deps::DependencyGraph;
use crate::ingest::{parse_commit_log, ReleaseRef};
use crate::metrics::METRICS_CSV_HEADER;
use crate::phase::read_windows_csv;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArtifactCheck {
    /// Relative to the output directory.
    pub path: String,
    pub error: Option<String>,
}

impl ArtifactCheck {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

type Check = fn(&Path) -> Result<(), String>;

fn check_commits(p: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
    parse_commit_log(text.as_bytes(), "")
        .map(|_| ())
        .map_err(|e| e.to_string())
}

fn check_windows(p: &Path) -> Result<(), String> {
    let text = std::fs::read(p).map_err(|e| e.to_string())?;
    read_windows_csv(text.as_slice()).map(|_| ()).map_err(|e| e.to_string())
}

fn check_transition(p: &Path) -> Result<(), String> {
    let t: TransitionArtifact = read_json(p).map_err(|e| e.to_string())?;
    let r = &t.report;
    let complete = r.span_months.is_some() && r.transition_start.is_some() && r.transition_end.is_some();
    let empty = r.span_months.is_none() && r.transition_start.is_none() && r.transition_end.is_none();
    match (r.found, complete, empty) {
        (true, true, _) if r.transition_start <= r.transition_end => Ok(()),
        (false, _, true) => Ok(()),
        _ => Err("interval fields inconsistent with `found`".into()),
    }
}

fn check_releases(p: &Path) -> Result<(), String> {
    let rels: Vec<ReleaseRef> = read_json(p).map_err(|e| e.to_string())?;
    if rels.windows(2).any(|w| w[0].timestamp > w[1].timestamp) {
        return Err("releases not sorted by time".into());
    }
    Ok(())
}

fn check_graph(p: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
    DependencyGraph::from_json(&text).map(|_| ()).map_err(|e| e.to_string())
}

fn check_snapshot(p: &Path) -> Result<(), String> {
    read_json::<SnapshotRecord>(p).map(|_| ()).map_err(|e| e.to_string())
}

fn check_metrics_csv(p: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    if lines.next() != Some(METRICS_CSV_HEADER) {
        return Err("unexpected header".into());
    }
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut last = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        for (i, cell) in rec.iter().enumerate().skip(1) {
            let ok = match i {
                1 | 2 | 5 => cell.is_empty() || cell.parse::<u64>().is_ok(),
                _ => parse_decimal(cell).is_ok_and(|v| v.is_none_or(|v| (-1.0..=1.0).contains(&v))),
            };
            if !ok {
                return Err(format!("bad cell {cell:?} in row {}", &rec[0]));
            }
        }
        last.push(rec[0].to_string());
    }
    if last.len() < 2 || last[last.len() - 2] != "<system>" || last[last.len() - 1] != "<system-unweighted>" {
        return Err("missing system rows".into());
    }
    Ok(())
}

fn check_series(p: &Path) -> Result<(), String> {
    read_series_csv(p).map(|_| ()).map_err(|e| e.to_string())
}

fn check_json_report(p: &Path) -> Result<(), String> {
    let v: serde_json::Value = read_json(p).map_err(|e| e.to_string())?;
    if v.get("project").and_then(|x| x.as_str()).is_none() {
        return Err("missing `project`".into());
    }
    Ok(())
}

fn check_json_array(p: &Path) -> Result<(), String> {
    let v: serde_json::Value = read_json(p).map_err(|e| e.to_string())?;
    v.as_array().map(|_| ()).ok_or_else(|| "expected a JSON array".into())
}

fn check_change_rates(p: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    if lines.next() != Some("class,change_rate") {
        return Err("unexpected header".into());
    }
    for l in lines {
        let ok = l
            .split_once(',')
            .and_then(|(_, v)| v.parse::<f64>().ok())
            .is_some_and(|v| (0.0..=1.0).contains(&v));
        if !ok {
            return Err(format!("bad row {l:?}"));
        }
    }
    Ok(())
}

fn check_plot_csv(p: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
    if !text.starts_with("index,label,instability,modified_ratio\n") {
        return Err("unexpected header".into());
    }
    Ok(())
}

fn check_svg(p: &Path) -> Result<(), String> {
    let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
    if text.starts_with("<svg") && text.ends_with("</svg>\n") {
        Ok(())
    } else {
        Err("not a standalone SVG document".into())
    }
}

/// Checks every known artifact present in `dir`. `commits.jsonl`,
/// `windows.csv` and `transition.json` are required; the rest are checked
/// when present, and any file listed in `report.json` must exist.
pub fn validate_artifacts(dir: &Path) -> Result<Vec<ArtifactCheck>, PipelineError> {
    if !dir.is_dir() {
        return Err(PipelineError::MissingArtifact(dir.to_path_buf()));
    }
    let single: [(&str, Check, bool); 13] = [
        (COMMITS, check_commits, true),
        (WINDOWS, check_windows, true),
        (TRANSITION, check_transition, true),
        (RELEASES, check_releases, false),
        (DIFFS, check_json_array, false),
        (CHANGE_RATES, check_change_rates, false),
        (SERIES, check_series, false),
        (CORRELATION, check_json_report, false),
        (FORECAST, check_json_report, false),
        (HOTSPOTS, check_json_report, false),
        (PLOT_CSV, check_plot_csv, false),
        (PLOT_SVG, check_svg, false),
        (REPORT, check_json_report, false),
    ];
    let mut checks = Vec::new();
    for (name, check, required) in single {
        let path = dir.join(name);
        if path.exists() {
            checks.push(ArtifactCheck {
                path: name.to_string(),
                error: check(&path).err(),
            });
        } else if required {
            checks.push(ArtifactCheck {
                path: name.to_string(),
                error: Some("missing".into()),
            });
        }
    }
    let dirs: [(&str, &str, Check); 3] = [
        (GRAPHS_DIR, "json", check_graph),
        (SNAPSHOTS_DIR, "json", check_snapshot),
        (METRICS_DIR, "csv", check_metrics_csv),
    ];
    for (sub, ext, check) in dirs {
        if !dir.join(sub).is_dir() {
            continue;
        }
        for path in list_files(&dir.join(sub), ext)? {
            let name = path.file_name().expect("listed file").to_string_lossy();
            checks.push(ArtifactCheck {
                path: format!("{sub}/{name}"),
                error: check(&path).err(),
            });
        }
    }
    if let Ok(report) = read_json::<serde_json::Value>(&dir.join(REPORT)) {
        for f in report["artifacts"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|v| v.as_str())
        {
            if !dir.join(f).is_file() {
                checks.push(ArtifactCheck {
                    path: f.to_string(),
                    error: Some("listed in report.json but missing".into()),
                });
            }
        }
    }
    Ok(checks)
}
