use serde::{Deserialize, Serialize};

/// Commit author as seen by committer counting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Identity {
    pub name: String,
    /// Always lowercase.
    pub email: String,
    /// Two identities denote the same committer iff their keys are equal.
    pub canonical_key: String,
}

impl Identity {
    /// Identity keyed by its own lowercased email.
    pub fn new(name: impl Into<String>, email: &str) -> Self {
        let email = email.trim().to_lowercase();
        Identity {
            name: name.into(),
            canonical_key: email.clone(),
            email,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChangeKind {
    #[serde(rename = "A")]
    Added,
    #[serde(rename = "M")]
    Modified,
    #[serde(rename = "D")]
    Deleted,
    #[serde(rename = "R")]
    Renamed,
}

impl ChangeKind {
    /// Whether the change leaves a live, touched file at `path`.
    pub fn is_modification(self) -> bool {
        !matches!(self, ChangeKind::Deleted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub kind: ChangeKind,
    /// Present iff `kind` is [`ChangeKind::Renamed`].
    pub old_path: Option<String>,
}

impl FileChange {
    pub fn new(path: impl Into<String>, kind: ChangeKind) -> Self {
        FileChange {
            path: path.into(),
            kind,
            old_path: None,
        }
    }

    pub fn renamed(old: impl Into<String>, new: impl Into<String>) -> Self {
        FileChange {
            path: new.into(),
            kind: ChangeKind::Renamed,
            old_path: Some(old.into()),
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.path.is_empty() {
            return Err("change path is empty".into());
        }
        match (self.kind, &self.old_path) {
            (ChangeKind::Renamed, None) => Err(format!("rename of {} lacks old_path", self.path)),
            (ChangeKind::Renamed, Some(old)) if old.is_empty() => Err("old_path is empty".into()),
            (k, Some(_)) if k != ChangeKind::Renamed => {
                Err(format!("old_path given for non-rename change of {}", self.path))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitRecord {
    pub id: String,
    pub author: Identity,
    /// UTC seconds since the epoch.
    pub timestamp: i64,
    pub message: String,
    /// Empty for merges that change nothing relative to the first parent.
    pub changes: Vec<FileChange>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommitLog {
    /// Sorted by timestamp, non-decreasing; ids are unique.
    pub commits: Vec<CommitRecord>,
    /// Where the history came from (repository path or log file).
    pub source: String,
}

impl CommitLog {
    /// Builds a log, enforcing the ordering and uniqueness invariants.
    pub fn from_commits(mut commits: Vec<CommitRecord>, source: impl Into<String>) -> Result<Self, super::IngestError> {
        let mut seen = std::collections::HashSet::with_capacity(commits.len());
        for c in &commits {
            if !seen.insert(c.id.as_str()) {
                return Err(super::IngestError::DuplicateCommitId(c.id.clone()));
            }
        }
        commits.sort_by_key(|c| c.timestamp);
        Ok(CommitLog {
            commits,
            source: source.into(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.commits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.commits.len()
    }

    /// Commits with `start <= timestamp < end`.
    pub fn in_window(&self, start: i64, end: i64) -> &[CommitRecord] {
        let lo = self.commits.partition_point(|c| c.timestamp < start);
        let hi = self.commits.partition_point(|c| c.timestamp < end);
        &self.commits[lo..hi.max(lo)]
    }
}

/// A release: a tag, or a synthetic periodic snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReleaseRef {
    pub label: String,
    pub commit_id: String,
    pub timestamp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChangeCategory {
    Feature,
    BugFix,
    Refactoring,
    Other,
}

impl ChangeCategory {
    pub const ALL: [ChangeCategory; 4] = [
        ChangeCategory::Feature,
        ChangeCategory::BugFix,
        ChangeCategory::Refactoring,
        ChangeCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChangeCategory::Feature => "feature",
            ChangeCategory::BugFix => "bugfix",
            ChangeCategory::Refactoring => "refactoring",
            ChangeCategory::Other => "other",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commit(id: &str, ts: i64) -> CommitRecord {
        CommitRecord {
            id: id.into(),
            author: Identity::new("a", "a@x"),
            timestamp: ts,
            message: String::new(),
            changes: vec![],
        }
    }

    #[test]
    fn file_change_rename_invariant() {
        assert!(FileChange::renamed("a", "b").validate().is_ok());
        let mut bad = FileChange::new("b", ChangeKind::Renamed);
        assert!(bad.validate().is_err());
        bad.kind = ChangeKind::Modified;
        bad.old_path = Some("a".into());
        assert!(bad.validate().is_err());
        assert!(FileChange::new("", ChangeKind::Added).validate().is_err());
    }

    #[test]
    fn from_commits_sorts_and_rejects_duplicates() {
        let log = CommitLog::from_commits(vec![commit("b", 20), commit("a", 10)], "t").unwrap();
        assert_eq!(log.commits[0].id, "a");
        assert!(matches!(
            CommitLog::from_commits(vec![commit("a", 1), commit("a", 2)], "t"),
            Err(super::super::IngestError::DuplicateCommitId(_))
        ));
    }

    #[test]
    fn window_slicing_is_half_open() {
        let log = CommitLog::from_commits(vec![commit("a", 10), commit("b", 20), commit("c", 30)], "t").unwrap();
        let ids: Vec<_> = log.in_window(10, 30).iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert!(log.in_window(31, 40).is_empty());
        assert!(log.in_window(40, 10).is_empty());
    }
}
