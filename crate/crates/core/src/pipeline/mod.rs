//! End-to-end orchestration and report artifacts.
//!
//! Each stage reads the artifacts of the stages before it from the output
//! directory and writes its own, so stages can be run one at a time. A full
//! run writes, relative to `output_dir`:
//!
//! | file | stage |
//! |---|---|
//! | `commits.jsonl` | ingest |
//! | `windows.csv`, `transition.json` | phases |
//! | `releases.json` | releases |
//! | `graphs/NNN-label.json`, `snapshots/NNN-label.json` | deps |
//! | `metrics/NNN-label.csv`, `diffs.json`, `change_rates.csv`, `series.csv` | metrics |
//! | `correlation.json` | correlate |
//! | `forecast.json`, `hotspots.json` | predict |
//! | `plot.csv`, `plot.svg`, `report.json` | report |
//!
//! Artifacts never contain absolute paths, timings or other run-specific
//! data, so identical inputs give byte-identical output.

pub mod artifacts;
mod config;
mod plot;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use config::{PipelineConfig, DEFAULT_TAG_PATTERN};
pub use plot::emit_plot_data;
pub use validate::{validate_artifacts, ArtifactCheck};

use crate::deps::{extract_snapshot, DependencyGraph, DepsError, ParseOptions};
use crate::ingest::{
    enumerate_releases, ingest_repository, materialize_snapshot, normalize_identities, parse_commit_log,
    write_commit_log, ChangeCategory, ClassifierRules, CommitLog, IngestError, MergeMap, ReleaseRef, SnapshotTree,
};
use crate::metrics::{
    change_rate, compute_release_metrics, diff_releases, modified_file_ratio, render, write_metrics_csv, MetricsError,
    ReleaseMetrics,
};
use crate::phase::{committer_series, detect_transition, write_windows_csv, PhaseError, TransitionReport};
use crate::stats::{
    detect_hotspots, fit_and_evaluate_forecast, pearson_test, spearman_test, Point, Series, StatsError,
};
use crate::time::iso8601;
use artifacts::*;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("ingest: {0}")]
    Ingest(#[from] IngestError),
    #[error("phase: {0}")]
    Phase(#[from] PhaseError),
    #[error("deps: {0}")]
    Deps(#[from] DepsError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("stats: {0}")]
    Stats(#[from] StatsError),
    #[error("report: plot needs two non-empty series")]
    EmptySeries,
    #[error("missing artifact {0}; run the stage that produces it first")]
    MissingArtifact(PathBuf),
    #[error("malformed artifact {path}: {reason}")]
    Artifact { path: PathBuf, reason: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn artifact(path: &Path, reason: impl std::fmt::Display) -> Self {
        PipelineError::Artifact {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        }
    }
}

/// Process exit status for a successful run with a transition.
pub const EXIT_OK: i32 = 0;
/// Process exit status for a fatal error.
pub const EXIT_FATAL: i32 = 1;
/// Process exit status when the analysis ran but no transition was found.
pub const EXIT_NO_TRANSITION: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOutcome {
    pub transition: TransitionReport,
    pub releases: usize,
}

impl PipelineOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.transition.found {
            EXIT_OK
        } else {
            EXIT_NO_TRANSITION
        }
    }
}

/// `transition.json`: the report plus the parameters it was found with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionArtifact {
    pub project: String,
    #[serde(flatten)]
    pub report: TransitionReport,
    pub transition_start_iso: Option<String>,
    pub transition_end_iso: Option<String>,
    pub window_days: i64,
    pub step_days: i64,
    pub cathedral_max: usize,
    pub bazaar_min: usize,
    /// What the span bounds: the cathedral-to-bazaar gap.
    pub span_bounds: String,
}

fn out(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn require_repo(cfg: &PipelineConfig, stage: &str) -> Result<PathBuf, PipelineError> {
    cfg.repo_path
        .clone()
        .ok_or_else(|| PipelineError::Config(format!("the {stage} stage needs repo_path")))
}

/// Reads history from the repository or commit-log file and writes `commits.jsonl`.
pub fn stage_ingest(cfg: &PipelineConfig) -> Result<CommitLog, PipelineError> {
    let filter = cfg.filter()?;
    let log = match (&cfg.repo_path, &cfg.commit_log) {
        (Some(repo), _) => ingest_repository(repo, &filter)?,
        (None, Some(path)) => {
            let file = std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
            parse_commit_log(BufReader::new(file), cfg.project.clone())?
        }
        (None, None) => {
            return Err(PipelineError::Config(
                "one of repo_path or commit_log is required".into(),
            ))
        }
    };
    let merge = match &cfg.merge_map {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
            Some(MergeMap::parse(BufReader::new(file))?)
        }
        None => None,
    };
    let mut log = normalize_identities(log, merge.as_ref());
    log.source = cfg.project.clone();
    let mut buf = Vec::new();
    write_commit_log(&log, &mut buf)?;
    write_bytes(&out(cfg, COMMITS), &buf)?;
    tracing::info!(commits = log.len(), "ingested history");
    Ok(log)
}

fn load_commits(cfg: &PipelineConfig) -> Result<CommitLog, PipelineError> {
    let path = out(cfg, COMMITS);
    let text = read_text(&path)?;
    Ok(parse_commit_log(text.as_bytes(), cfg.project.clone())?)
}

/// Committer windows and transition detection: `windows.csv`, `transition.json`.
pub fn stage_phases(cfg: &PipelineConfig) -> Result<TransitionReport, PipelineError> {
    let log = load_commits(cfg)?;
    let windows = committer_series(&log, cfg.window_days, cfg.step_days, cfg.thresholds())?;
    let mut buf = Vec::new();
    write_windows_csv(&windows, &mut buf).map_err(|e| PipelineError::io(&out(cfg, WINDOWS), e))?;
    write_bytes(&out(cfg, WINDOWS), &buf)?;
    let report = detect_transition(&windows, cfg.sustain);
    write_json(
        &out(cfg, TRANSITION),
        &TransitionArtifact {
            project: cfg.project.clone(),
            transition_start_iso: report.transition_start.map(iso8601),
            transition_end_iso: report.transition_end.map(iso8601),
            report: report.clone(),
            window_days: cfg.window_days,
            step_days: cfg.step_days,
            cathedral_max: cfg.cathedral_max,
            bazaar_min: cfg.bazaar_min,
            span_bounds: "gap between last cathedral window end and first sustained bazaar window start".into(),
        },
    )?;
    tracing::info!(found = report.found, windows = windows.len(), "phase detection done");
    Ok(report)
}

/// Tagged or periodic releases: `releases.json`.
pub fn stage_releases(cfg: &PipelineConfig) -> Result<Vec<ReleaseRef>, PipelineError> {
    let repo = require_repo(cfg, "releases")?;
    let releases = enumerate_releases(&repo, &cfg.tag_regex()?, cfg.fallback_interval_days)?;
    write_json(&out(cfg, RELEASES), &releases)?;
    tracing::info!(releases = releases.len(), "releases enumerated");
    Ok(releases)
}

fn load_releases(cfg: &PipelineConfig) -> Result<Vec<ReleaseRef>, PipelineError> {
    read_json(&out(cfg, RELEASES))
}

/// Dependency graphs per release: `graphs/*.json`, `snapshots/*.json`.
pub fn stage_deps(cfg: &PipelineConfig) -> Result<Vec<DependencyGraph>, PipelineError> {
    let repo = require_repo(cfg, "deps")?;
    let releases = load_releases(cfg)?;
    let filter = cfg.filter()?;
    let opts = ParseOptions {
        include_annotations: cfg.include_annotations,
    };
    let extracted: Vec<(DependencyGraph, SnapshotRecord)> = releases
        .par_iter()
        .map(|rel| {
            let tmp = tempfile::tempdir().map_err(|e| PipelineError::io(&std::env::temp_dir(), e))?;
            let tree = materialize_snapshot(&repo, rel, &tmp.path().join("tree"), &filter)?;
            let ex = extract_snapshot(&tree, rel.clone(), opts)?;
            let record = SnapshotRecord {
                release: rel.clone(),
                files: tree.files,
                classes: ex.class_files,
                skipped_units: ex.skipped,
                ambiguous_references: ex.warnings.len(),
            };
            Ok((ex.graph, record))
        })
        .collect::<Result<_, PipelineError>>()?;

    let mut graphs = Vec::with_capacity(extracted.len());
    for (i, (graph, record)) in extracted.into_iter().enumerate() {
        let stem = release_stem(i, &graph.release.label);
        write_bytes(
            &out(cfg, GRAPHS_DIR).join(format!("{stem}.json")),
            graph.to_json_string().as_bytes(),
        )?;
        write_json(&out(cfg, SNAPSHOTS_DIR).join(format!("{stem}.json")), &record)?;
        graphs.push(graph);
    }
    std::fs::create_dir_all(out(cfg, GRAPHS_DIR)).map_err(|e| PipelineError::io(&out(cfg, GRAPHS_DIR), e))?;
    tracing::info!(graphs = graphs.len(), "dependency graphs extracted");
    Ok(graphs)
}

fn load_release_inputs(cfg: &PipelineConfig) -> Result<Vec<(DependencyGraph, SnapshotRecord)>, PipelineError> {
    let releases = load_releases(cfg)?;
    releases
        .iter()
        .enumerate()
        .map(|(i, rel)| {
            let stem = release_stem(i, &rel.label);
            let gpath = out(cfg, GRAPHS_DIR).join(format!("{stem}.json"));
            let graph =
                DependencyGraph::from_json(&read_text(&gpath)?).map_err(|e| PipelineError::artifact(&gpath, e))?;
            let snapshot: SnapshotRecord = read_json(&out(cfg, SNAPSHOTS_DIR).join(format!("{stem}.json")))?;
            if graph.release != *rel || snapshot.release != *rel {
                return Err(PipelineError::artifact(
                    &gpath,
                    format!("does not belong to release {}", rel.label),
                ));
            }
            Ok((graph, snapshot))
        })
        .collect()
}

fn ratio(num: usize, den: usize) -> Option<BigRational> {
    (den > 0).then(|| BigRational::new(BigInt::from(num), BigInt::from(den)))
}

fn render_opt(v: Option<&BigRational>) -> String {
    v.map(render).unwrap_or_default()
}

/// Per-release metrics, diffs, change rates and the release series:
/// `metrics/*.csv`, `diffs.json`, `change_rates.csv`, `series.csv`.
pub fn stage_metrics(cfg: &PipelineConfig) -> Result<Vec<ReleaseMetrics>, PipelineError> {
    let inputs = load_release_inputs(cfg)?;
    let log = load_commits(cfg)?;
    let filter = cfg.filter()?;
    let rules = ClassifierRules::default();

    let metrics: Vec<ReleaseMetrics> = inputs.par_iter().map(|(g, _)| compute_release_metrics(g)).collect();
    std::fs::create_dir_all(out(cfg, METRICS_DIR)).map_err(|e| PipelineError::io(&out(cfg, METRICS_DIR), e))?;
    for (i, rm) in metrics.iter().enumerate() {
        let path = out(cfg, METRICS_DIR).join(format!("{}.csv", release_stem(i, &rm.release.label)));
        let mut buf = Vec::new();
        write_metrics_csv(rm, &mut buf).map_err(|e| PipelineError::artifact(&path, e))?;
        write_bytes(&path, &buf)?;
    }

    let diffs: Vec<_> = metrics.windows(2).map(|w| diff_releases(&w[0], &w[1])).collect();
    write_json(&out(cfg, DIFFS), &diffs)?;

    write_change_rates(cfg, &inputs)?;

    let first_ts = log.commits.first().map(|c| c.timestamp);
    let mut rows = Vec::with_capacity(inputs.len());
    for (i, ((_, snap), rm)) in inputs.iter().zip(&metrics).enumerate() {
        let rel = &snap.release;
        let start = if i == 0 {
            first_ts.unwrap_or(rel.timestamp).min(rel.timestamp)
        } else {
            inputs[i - 1].1.release.timestamp + 1
        };
        let end = rel.timestamp + 1;
        let tree = SnapshotTree {
            root: PathBuf::new(),
            files: snap.files.clone(),
        };
        let act = modified_file_ratio(&log, start, end, &tree, &filter, &rules);
        let delta = match (
            i.checked_sub(1).map(|p| &metrics[p].system.weighted),
            &rm.system.weighted,
        ) {
            (Some(Some(a)), Some(b)) => Some(b - a),
            _ => None,
        };
        let count = |c: ChangeCategory| act.category_counts.get(&c).copied().unwrap_or(0);
        rows.push(SeriesRow {
            index: i as i64,
            label: rel.label.clone(),
            timestamp: rel.timestamp,
            window_start: start,
            window_end: end,
            system_instability: render_opt(rm.system.weighted.as_ref()),
            system_instability_unweighted: render_opt(rm.system.unweighted.as_ref()),
            instability_delta: render_opt(delta.as_ref()),
            modified_ratio: render_opt(ratio(act.modified_files, act.tracked_files).as_ref()),
            modified_files: act.modified_files,
            tracked_files: act.tracked_files,
            commits: act.commits,
            feature: count(ChangeCategory::Feature),
            bugfix: count(ChangeCategory::BugFix),
            refactoring: count(ChangeCategory::Refactoring),
            other: count(ChangeCategory::Other),
        });
    }
    write_series_csv(&out(cfg, SERIES), &rows)?;
    tracing::info!(releases = metrics.len(), "metrics computed");
    Ok(metrics)
}

fn write_change_rates(cfg: &PipelineConfig, inputs: &[(DependencyGraph, SnapshotRecord)]) -> Result<(), PipelineError> {
    let versions: Vec<BTreeMap<String, String>> = inputs
        .iter()
        .map(|(_, snap)| {
            let digests: BTreeMap<&str, &str> = snap
                .files
                .iter()
                .map(|f| (f.path.as_str(), f.digest.as_str()))
                .collect();
            snap.classes
                .iter()
                .filter_map(|(class, file)| digests.get(file.as_str()).map(|d| (class.clone(), d.to_string())))
                .collect()
        })
        .collect();
    let classes: BTreeSet<&String> = versions.iter().flat_map(|v| v.keys()).collect();
    let mut text = String::from("class,change_rate\n");
    if versions.len() >= 2 {
        for class in classes {
            let rate = change_rate(class, &versions)?;
            text.push_str(&format!("{class},{}\n", render(&rate)));
        }
    }
    write_bytes(&out(cfg, CHANGE_RATES), text.as_bytes())
}

/// The three release-indexed series derived from `series.csv`.
pub struct ReleaseSeries {
    pub instability: Series,
    pub instability_delta: Series,
    pub modified_ratio: Series,
}

pub fn load_release_series(cfg: &PipelineConfig) -> Result<ReleaseSeries, PipelineError> {
    let path = out(cfg, SERIES);
    let rows = read_series_csv(&path)?;
    let make = |name: &str, get: fn(&SeriesRow) -> &str| -> Result<Series, PipelineError> {
        let points = rows
            .iter()
            .map(|r| {
                Ok(Point {
                    index: r.index,
                    label: r.label.clone(),
                    value: parse_decimal(get(r)).map_err(|m| PipelineError::artifact(&path, m))?,
                })
            })
            .collect::<Result<_, PipelineError>>()?;
        Series::new(name, points).map_err(|e| PipelineError::artifact(&path, e))
    };
    Ok(ReleaseSeries {
        instability: make("system_instability", |r| &r.system_instability)?,
        instability_delta: make("instability_delta", |r| &r.instability_delta)?,
        modified_ratio: make("modified_ratio", |r| &r.modified_ratio)?,
    })
}

fn outcome<T: Serialize>(res: Result<T, StatsError>) -> serde_json::Value {
    match res {
        Ok(v) => json!({ "result": v, "error": null }),
        Err(e) => json!({ "result": null, "error": e.to_string() }),
    }
}

/// Pearson (with a Spearman follow-up when not significant) of the
/// modified-file ratio against instability level and delta: `correlation.json`.
pub fn stage_correlate(cfg: &PipelineConfig) -> Result<serde_json::Value, PipelineError> {
    let s = load_release_series(cfg)?;
    let mut pairs = Vec::new();
    for y in [&s.instability, &s.instability_delta] {
        let pearson = pearson_test(&s.modified_ratio, y, cfg.permutations, cfg.seed);
        let spearman = match &pearson {
            Ok(p) if !p.significant => Some(spearman_test(&s.modified_ratio, y, cfg.permutations, cfg.seed)),
            _ => None,
        };
        pairs.push(json!({
            "x": s.modified_ratio.name,
            "y": y.name,
            "pearson": outcome(pearson),
            "spearman": spearman.map(outcome),
        }));
    }
    let report = json!({
        "project": cfg.project,
        "permutations": cfg.permutations,
        "seed": cfg.seed,
        "pairs": pairs,
    });
    write_json(&out(cfg, CORRELATION), &report)?;
    Ok(report)
}

/// Forecast of instability deltas and modified-ratio hot-spots:
/// `forecast.json`, `hotspots.json`.
pub fn stage_predict(cfg: &PipelineConfig) -> Result<(serde_json::Value, serde_json::Value), PipelineError> {
    let s = load_release_series(cfg)?;
    let forecast = json!({
        "project": cfg.project,
        "x": s.modified_ratio.name,
        "y": s.instability.name,
        "lag": cfg.lag,
        "train_fraction": cfg.train_fraction,
        "forecast": outcome(fit_and_evaluate_forecast(&s.modified_ratio, &s.instability, cfg.lag, cfg.train_fraction)),
    });
    write_json(&out(cfg, FORECAST), &forecast)?;
    let hotspots = json!({
        "project": cfg.project,
        "series": s.modified_ratio.name,
        "hotspots": outcome(detect_hotspots(&s.modified_ratio, cfg.z_threshold)),
    });
    write_json(&out(cfg, HOTSPOTS), &hotspots)?;
    Ok((forecast, hotspots))
}

/// Plot data and the run summary: `plot.csv`, `plot.svg`, `report.json`.
pub fn stage_report(cfg: &PipelineConfig) -> Result<serde_json::Value, PipelineError> {
    let transition: TransitionArtifact = read_json(&out(cfg, TRANSITION))?;
    let releases = match load_release_series(cfg) {
        Ok(s) => {
            if s.instability.is_empty() {
                tracing::warn!("no releases; skipping plot");
            } else {
                emit_plot_data(&s.instability, &s.modified_ratio, &cfg.output_dir)?;
            }
            s.instability.len()
        }
        Err(PipelineError::MissingArtifact(_)) => 0,
        Err(e) => return Err(e),
    };
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(&cfg.output_dir).sort_by_file_name() {
        let entry = entry.map_err(|e| PipelineError::io(&cfg.output_dir, std::io::Error::other(e.to_string())))?;
        if entry.file_type().is_file() {
            let rel = entry
                .path()
                .strip_prefix(&cfg.output_dir)
                .expect("walk stays under output_dir");
            let rel: Vec<String> = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            files.push(rel.join("/"));
        }
    }
    files.retain(|f| f != REPORT);
    files.push(REPORT.to_string());
    files.sort();
    let exit_code = if transition.report.found {
        EXIT_OK
    } else {
        EXIT_NO_TRANSITION
    };
    let report = json!({
        "project": cfg.project,
        "transition_found": transition.report.found,
        "exit_code": exit_code,
        "releases": releases,
        "artifacts": files,
    });
    write_json(&out(cfg, REPORT), &report)?;
    Ok(report)
}

/// Runs every stage. Without a repository only history and phase artifacts
/// are produced.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome, PipelineError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| PipelineError::io(&cfg.output_dir, e))?;
    stage_ingest(cfg)?;
    let transition = stage_phases(cfg)?;
    let mut releases = 0;
    if cfg.repo_path.is_some() {
        releases = stage_releases(cfg)?.len();
        stage_deps(cfg)?;
        stage_metrics(cfg)?;
        stage_correlate(cfg)?;
        stage_predict(cfg)?;
    } else {
        tracing::info!("no repository: skipping release, dependency and metric stages");
    }
    stage_report(cfg)?;
    Ok(PipelineOutcome { transition, releases })
}
