//! Mining Java project history for architectural instability.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ingest`] acquires commit history, releases and file-tree snapshots,
//!   either from a git repository or from the portable JSONL commit log.
//! * [`phase`] counts distinct committers over rolling windows and locates
//!   the transition from a small closed team to broad community participation.
//! * [`deps`] extracts class-level dependency graphs from Java sources.
//! * [`metrics`] computes afferent/efferent coupling, instability, degree of
//!   unstable dependency, modified-file ratios and release diffs.
//! * [`stats`] correlates and forecasts instability from modified-file ratios.
//! * [`pipeline`] wires the stages together and writes the report artifacts.

pub mod deps;
pub mod ingest;
pub mod metrics;
pub mod phase;
pub mod pipeline;
pub mod stats;

mod time;

pub use deps::{DependencyGraph, PackageGraph, UnitFacts};
pub use ingest::{ChangeCategory, CommitLog, CommitRecord, FileChange, Identity, ReleaseRef, SnapshotTree};
pub use metrics::{Coupling, Instability, ReleaseMetrics};
pub use phase::{CommitterWindow, PhaseLabel, TransitionReport};
pub use pipeline::{run_pipeline, PipelineConfig};
pub use stats::Series;
