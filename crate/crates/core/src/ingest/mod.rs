//! Commit history, releases and snapshots.

mod classify;
mod filter;
mod git;
mod identity;
mod jsonl;
mod model;
mod snapshot;

use std::path::PathBuf;

use thiserror::Error;

pub use classify::{classify_commit, ClassifierRules};
pub use filter::SourceFilter;
pub use git::{
    enumerate_releases, enumerate_releases_with, ingest_repository, ingest_repository_with, materialize_snapshot,
    materialize_snapshot_with, GitTool, GIT_ENV_VAR,
};
pub use identity::{normalize_identities, MergeMap};
pub use jsonl::{parse_commit_log, write_commit_log};
pub use model::{ChangeCategory, ChangeKind, CommitLog, CommitRecord, FileChange, Identity, ReleaseRef};
pub use snapshot::{SnapshotTree, SourceFile};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("not a git repository: {0}")]
    NotARepository(PathBuf),
    #[error("cannot execute version-control tool `{tool}`: {source}")]
    VcsToolUnavailable {
        tool: String,
        #[source]
        source: std::io::Error,
    },
    #[error("`git {command}` failed: {stderr}")]
    VcsFailed { command: String, stderr: String },
    #[error("malformed commit record on line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate commit id {0}")]
    DuplicateCommitId(String),
    #[error("malformed merge map on line {line}: {reason}")]
    MalformedMergeMap { line: usize, reason: String },
    #[error("repository has no commits")]
    NoCommits,
    #[error("unknown commit {0}")]
    UnknownCommit(String),
    #[error("destination is not empty: {0}")]
    DestinationNotEmpty(PathBuf),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;
