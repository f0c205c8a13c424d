//! Repository access through the `git` command-line tool.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use regex::Regex;
use tracing::debug;

use super::filter::SourceFilter;
use super::model::{ChangeKind, CommitLog, CommitRecord, FileChange, Identity, ReleaseRef};
use super::snapshot::{digest_bytes, SnapshotTree, SourceFile};
use super::{IngestError, Result};
use crate::time::{compact_date, DAY_SECS};

/// Overrides the path of the `git` executable.
pub const GIT_ENV_VAR: &str = "INSTAB_GIT";

const RS: char = '\u{1e}';
const US: char = '\u{1f}';

#[derive(Debug, Clone)]
pub struct GitTool {
    program: String,
}

impl Default for GitTool {
    fn default() -> Self {
        Self::from_env()
    }
}

impl GitTool {
    pub fn from_env() -> Self {
        GitTool {
            program: std::env::var(GIT_ENV_VAR).unwrap_or_else(|_| "git".to_string()),
        }
    }

    pub fn with_program(program: impl Into<String>) -> Self {
        GitTool {
            program: program.into(),
        }
    }

    fn command(&self, repo: &Path) -> Command {
        let mut cmd = Command::new(&self.program);
        cmd.arg("-C")
            .arg(repo)
            .args(["-c", "core.quotePath=false", "-c", "log.showSignature=false"])
            .env("GIT_TERMINAL_PROMPT", "0")
            .stdin(Stdio::null());
        cmd
    }

    fn spawn_error(&self, e: std::io::Error) -> IngestError {
        IngestError::VcsToolUnavailable {
            tool: self.program.clone(),
            source: e,
        }
    }

    /// Runs git; `Ok(None)` when it exits unsuccessfully.
    fn try_run(&self, repo: &Path, args: &[&str]) -> Result<Option<Vec<u8>>> {
        debug!(?args, "git");
        let out = self
            .command(repo)
            .args(args)
            .output()
            .map_err(|e| self.spawn_error(e))?;
        Ok(out.status.success().then_some(out.stdout))
    }

    fn run(&self, repo: &Path, args: &[&str]) -> Result<Vec<u8>> {
        let out = self
            .command(repo)
            .args(args)
            .output()
            .map_err(|e| self.spawn_error(e))?;
        if !out.status.success() {
            return Err(IngestError::VcsFailed {
                command: args.join(" "),
                stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
            });
        }
        Ok(out.stdout)
    }

    fn ensure_repository(&self, repo: &Path) -> Result<()> {
        if !repo.is_dir() {
            return Err(IngestError::NotARepository(repo.to_path_buf()));
        }
        match self.try_run(repo, &["rev-parse", "--git-dir"])? {
            Some(_) => Ok(()),
            None => Err(IngestError::NotARepository(repo.to_path_buf())),
        }
    }

    fn has_head(&self, repo: &Path) -> Result<bool> {
        Ok(self
            .try_run(repo, &["rev-parse", "--verify", "-q", "HEAD^{commit}"])?
            .is_some())
    }

    /// (hash, author timestamp) along the first-parent chain, oldest first.
    fn first_parent_commits(&self, repo: &Path) -> Result<Vec<(String, i64)>> {
        let out = self.run(repo, &["log", "--first-parent", "--format=%H %at", "HEAD"])?;
        let mut commits: Vec<(String, i64)> = String::from_utf8_lossy(&out)
            .lines()
            .filter_map(|l| {
                let (h, t) = l.split_once(' ')?;
                Some((h.to_string(), t.trim().parse().ok()?))
            })
            .collect();
        commits.reverse();
        // Stable, so equal timestamps keep topological order.
        commits.sort_by_key(|c| c.1);
        Ok(commits)
    }
}

fn parse_name_status(block: &str, filter: &SourceFilter) -> Vec<FileChange> {
    let mut changes = Vec::new();
    for line in block.lines() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let status = fields[0];
        let change = match (status.chars().next(), fields.len()) {
            (Some('A'), 2) => FileChange::new(fields[1], ChangeKind::Added),
            (Some('M' | 'T'), 2) => FileChange::new(fields[1], ChangeKind::Modified),
            (Some('D'), 2) => FileChange::new(fields[1], ChangeKind::Deleted),
            (Some('R'), 3) => FileChange::renamed(fields[1], fields[2]),
            (Some('C'), 3) => FileChange::new(fields[2], ChangeKind::Added),
            _ => {
                debug!(line, "skipping unrecognised name-status line");
                continue;
            }
        };
        match change.kind {
            ChangeKind::Renamed if !filter.matches(&change.path) => {
                // Renamed away from a source path: the source file is gone.
                let old = change.old_path.expect("rename carries old path");
                if filter.matches(&old) {
                    changes.push(FileChange::new(old, ChangeKind::Deleted));
                }
            }
            _ if filter.matches(&change.path) => changes.push(change),
            _ => {}
        }
    }
    changes
}

fn parse_log_output(raw: &str, filter: &SourceFilter) -> Vec<CommitRecord> {
    raw.split(RS)
        .filter(|chunk| !chunk.trim().is_empty())
        .filter_map(|chunk| {
            let mut parts = chunk.splitn(6, US);
            let id = parts.next()?.trim().to_string();
            let name = parts.next()?.to_string();
            let email = parts.next()?;
            let timestamp: i64 = parts.next()?.trim().parse().ok()?;
            let message = parts.next()?.trim_end().to_string();
            let rest = parts.next().unwrap_or("");
            Some(CommitRecord {
                id,
                author: Identity::new(name, email),
                timestamp,
                message,
                changes: parse_name_status(rest, filter),
            })
        })
        .collect()
}

/// Reads the first-parent history of the default branch (`HEAD`).
///
/// Merge commits keep their author and take their file changes from the diff
/// against the first parent. Changes are restricted to `filter`.
pub fn ingest_repository(repo: &Path, filter: &SourceFilter) -> Result<CommitLog> {
    ingest_repository_with(&GitTool::from_env(), repo, filter)
}

pub fn ingest_repository_with(git: &GitTool, repo: &Path, filter: &SourceFilter) -> Result<CommitLog> {
    git.ensure_repository(repo)?;
    let source = repo.display().to_string();
    if !git.has_head(repo)? {
        return Ok(CommitLog {
            commits: Vec::new(),
            source,
        });
    }
    let out = git.run(
        repo,
        &[
            "log",
            "--first-parent",
            "--diff-merges=first-parent",
            "--name-status",
            "-M",
            "--no-color",
            "--no-ext-diff",
            "--format=%x1e%H%x1f%an%x1f%ae%x1f%at%x1f%B%x1f",
            "HEAD",
        ],
    )?;
    let mut commits = parse_log_output(&String::from_utf8_lossy(&out), filter);
    commits.reverse();
    CommitLog::from_commits(commits, source)
}

/// Tags matching `tag_pattern` when at least two do, else periodic snapshots.
///
/// Synthetic snapshots are taken every `fallback_interval_days` starting at the
/// first commit; each picks the latest first-parent commit at or before the
/// boundary. Boundaries that land on the same commit collapse to one release.
pub fn enumerate_releases(repo: &Path, tag_pattern: &Regex, fallback_interval_days: i64) -> Result<Vec<ReleaseRef>> {
    enumerate_releases_with(&GitTool::from_env(), repo, tag_pattern, fallback_interval_days)
}

pub fn enumerate_releases_with(
    git: &GitTool,
    repo: &Path,
    tag_pattern: &Regex,
    fallback_interval_days: i64,
) -> Result<Vec<ReleaseRef>> {
    if fallback_interval_days < 7 {
        return Err(IngestError::InvalidArgument(format!(
            "fallback interval must be at least 7 days, got {fallback_interval_days}"
        )));
    }
    git.ensure_repository(repo)?;
    if !git.has_head(repo)? {
        return Err(IngestError::NoCommits);
    }

    let out = git.run(
        repo,
        &[
            "for-each-ref",
            "--format=%(refname:strip=2)%1f%(objecttype)%1f%(objectname)%1f%(authordate:unix)%1f%(*objecttype)%1f%(*objectname)%1f%(*authordate:unix)",
            "refs/tags",
        ],
    )?;
    let mut tagged: Vec<ReleaseRef> = String::from_utf8_lossy(&out)
        .lines()
        .filter_map(|line| {
            let f: Vec<&str> = line.split(US).collect();
            if f.len() != 7 || !tag_pattern.is_match(f[0]) {
                return None;
            }
            let (id, ts) = match (f[1], f[4]) {
                ("commit", _) => (f[2], f[3]),
                ("tag", "commit") => (f[5], f[6]),
                _ => return None,
            };
            Some(ReleaseRef {
                label: f[0].to_string(),
                commit_id: id.to_string(),
                timestamp: ts.trim().parse().ok()?,
            })
        })
        .collect();
    if tagged.len() >= 2 {
        tagged.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.label.cmp(&b.label)));
        return Ok(tagged);
    }
    debug!(
        matched = tagged.len(),
        "too few matching tags, using periodic snapshots"
    );

    let commits = git.first_parent_commits(repo)?;
    Ok(periodic_releases(&commits, fallback_interval_days))
}

fn periodic_releases(commits: &[(String, i64)], interval_days: i64) -> Vec<ReleaseRef> {
    let Some(first) = commits.first() else {
        return Vec::new();
    };
    let last_ts = commits.last().expect("non-empty").1;
    let step = interval_days * DAY_SECS;
    let mut releases: Vec<ReleaseRef> = Vec::new();
    let mut boundary = first.1;
    while boundary <= last_ts {
        let idx = commits.partition_point(|c| c.1 <= boundary) - 1;
        let (id, ts) = &commits[idx];
        if releases.last().map(|r| &r.commit_id) != Some(id) {
            releases.push(ReleaseRef {
                label: format!("snap-{}", compact_date(boundary)),
                commit_id: id.clone(),
                timestamp: *ts,
            });
        }
        boundary += step;
    }
    releases
}

/// Writes the source files of `release` into `dest` and indexes them.
pub fn materialize_snapshot(
    repo: &Path,
    release: &ReleaseRef,
    dest: &Path,
    filter: &SourceFilter,
) -> Result<SnapshotTree> {
    materialize_snapshot_with(&GitTool::from_env(), repo, release, dest, filter)
}

pub fn materialize_snapshot_with(
    git: &GitTool,
    repo: &Path,
    release: &ReleaseRef,
    dest: &Path,
    filter: &SourceFilter,
) -> Result<SnapshotTree> {
    if dest.exists() && std::fs::read_dir(dest)?.next().is_some() {
        return Err(IngestError::DestinationNotEmpty(dest.to_path_buf()));
    }
    git.ensure_repository(repo)?;
    let id = &release.commit_id;
    let spec = format!("{id}^{{commit}}");
    if id.is_empty() || id.starts_with('-') || git.try_run(repo, &["cat-file", "-e", &spec])?.is_none() {
        return Err(IngestError::UnknownCommit(id.clone()));
    }

    let listing = git.run(repo, &["ls-tree", "-r", "-z", "--full-tree", id])?;
    let mut entries: Vec<(String, String)> = Vec::new();
    for rec in listing.split(|b| *b == 0).filter(|r| !r.is_empty()) {
        let rec = String::from_utf8_lossy(rec);
        let Some((meta, path)) = rec.split_once('\t') else {
            continue;
        };
        let meta: Vec<&str> = meta.split(' ').collect();
        // Skip symlinks, submodules and anything that is not a plain blob.
        if meta.len() != 3 || meta[1] != "blob" || meta[0] == "120000" || !filter.matches(path) {
            continue;
        }
        entries.push((path.to_string(), meta[2].to_string()));
    }
    entries.sort();

    let blobs = read_blobs(git, repo, entries.iter().map(|e| e.1.as_str()))?;
    std::fs::create_dir_all(dest)?;
    let mut files = Vec::with_capacity(entries.len());
    for ((path, _), content) in entries.into_iter().zip(blobs) {
        let target = path.split('/').fold(PathBuf::from(dest), |p, c| p.join(c));
        if let Some(parent) = target.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&target, &content)?;
        files.push(SourceFile {
            digest: digest_bytes(&content),
            path,
        });
    }
    Ok(SnapshotTree {
        root: dest.to_path_buf(),
        files,
    })
}

/// Streams blob contents through a single `git cat-file --batch` process.
fn read_blobs<'a>(git: &GitTool, repo: &Path, ids: impl Iterator<Item = &'a str>) -> Result<Vec<Vec<u8>>> {
    let request: String = ids.map(|id| format!("{id}\n")).collect();
    if request.is_empty() {
        return Ok(Vec::new());
    }
    let mut child = git
        .command(repo)
        .args(["cat-file", "--batch"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| git.spawn_error(e))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = std::thread::spawn(move || stdin.write_all(request.as_bytes()));
    let mut raw = Vec::new();
    child.stdout.take().expect("piped stdout").read_to_end(&mut raw)?;
    writer.join().expect("writer thread")?;
    let status = child.wait()?;
    if !status.success() {
        return Err(IngestError::VcsFailed {
            command: "cat-file --batch".into(),
            stderr: status.to_string(),
        });
    }

    let mut blobs = Vec::new();
    let mut pos = 0;
    while pos < raw.len() {
        let nl = raw[pos..]
            .iter()
            .position(|b| *b == b'\n')
            .map(|i| pos + i)
            .ok_or_else(|| std::io::Error::other("truncated cat-file header"))?;
        let header = String::from_utf8_lossy(&raw[pos..nl]).to_string();
        let size: usize = header
            .rsplit(' ')
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| std::io::Error::other(format!("bad cat-file header {header:?}")))?;
        let start = nl + 1;
        let end = start + size;
        if end > raw.len() {
            return Err(std::io::Error::other("truncated cat-file body").into());
        }
        blobs.push(raw[start..end].to_vec());
        pos = end + 1;
    }
    Ok(blobs)
}
