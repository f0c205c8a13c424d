use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::ingest::{classify_commit, ChangeCategory, ClassifierRules, CommitLog, SnapshotTree, SourceFilter};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowActivity {
    pub start: i64,
    /// Exclusive.
    pub end: i64,
    /// `modified_files / tracked_files`; `None` when nothing is tracked.
    pub modified_ratio: Option<f64>,
    pub modified_files: usize,
    pub tracked_files: usize,
    pub commits: usize,
    pub category_counts: BTreeMap<ChangeCategory, usize>,
}

/// Distinct source files added, modified or renamed in `[start, end)`,
/// relative to the source files tracked in `snapshot`. Every commit counts
/// once per file regardless of how often the file was touched.
pub fn modified_file_ratio(
    log: &CommitLog,
    start: i64,
    end: i64,
    snapshot: &SnapshotTree,
    filter: &SourceFilter,
    rules: &ClassifierRules,
) -> WindowActivity {
    let commits = log.in_window(start, end);
    let mut touched = BTreeSet::new();
    let mut category_counts: BTreeMap<ChangeCategory, usize> = ChangeCategory::ALL.iter().map(|c| (*c, 0)).collect();
    for c in commits {
        *category_counts.entry(classify_commit(c, rules)).or_default() += 1;
        for ch in &c.changes {
            if ch.kind.is_modification() && filter.matches(&ch.path) {
                touched.insert(ch.path.as_str());
            }
        }
    }
    let tracked = snapshot.files.iter().filter(|f| filter.matches(&f.path)).count();
    WindowActivity {
        start,
        end,
        modified_ratio: (tracked > 0).then(|| touched.len() as f64 / tracked as f64),
        modified_files: touched.len(),
        tracked_files: tracked,
        commits: commits.len(),
        category_counts,
    }
}
