use std::collections::BTreeMap;
use std::io::BufRead;

use super::model::CommitLog;
use super::{IngestError, Result};

/// Alias email → canonical email, both lowercased.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeMap {
    aliases: BTreeMap<String, String>,
}

impl MergeMap {
    /// Parses `alias_email canonical_email` pairs, one per line. `#` starts a comment.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut aliases = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(IngestError::MalformedMergeMap {
                    line: idx + 1,
                    reason: format!("expected 2 fields, found {}", fields.len()),
                });
            }
            aliases.insert(fields[0].to_lowercase(), fields[1].to_lowercase());
        }
        Ok(MergeMap { aliases })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        MergeMap {
            aliases: pairs
                .into_iter()
                .map(|(a, c)| (a.to_lowercase(), c.to_lowercase()))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    /// Key for a (lowercased) email.
    pub fn canonical(&self, email: &str) -> String {
        self.aliases.get(email).cloned().unwrap_or_else(|| email.to_string())
    }
}

/// Recomputes every author's `canonical_key` from its email and the merge map.
///
/// Keys depend only on the email, so the operation is idempotent. Names and
/// commit order are left untouched.
pub fn normalize_identities(mut log: CommitLog, merge_map: Option<&MergeMap>) -> CommitLog {
    for c in &mut log.commits {
        let email = c.author.email.trim().to_lowercase();
        c.author.canonical_key = match merge_map {
            Some(map) => map.canonical(&email),
            None => email.clone(),
        };
        c.author.email = email;
    }
    log
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{CommitRecord, Identity};

    fn log_of(emails: &[&str]) -> CommitLog {
        let commits = emails
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut author = Identity::new("A", e);
                // Simulate un-normalized input.
                author.email = e.to_string();
                author.canonical_key = e.to_string();
                CommitRecord {
                    id: format!("c{i}"),
                    author,
                    timestamp: 1 + i as i64,
                    message: String::new(),
                    changes: vec![],
                }
            })
            .collect();
        CommitLog::from_commits(commits, "t").unwrap()
    }

    fn distinct_keys(log: &CommitLog) -> usize {
        log.commits
            .iter()
            .map(|c| c.author.canonical_key.as_str())
            .collect::<std::collections::BTreeSet<_>>()
            .len()
    }

    #[test]
    fn case_variants_share_a_key() {
        let log = normalize_identities(log_of(&["X@a.com", "x@a.com"]), None);
        assert_eq!(distinct_keys(&log), 1);
        assert_eq!(log.commits[0].author.name, "A");
    }

    #[test]
    fn merge_map_unifies_aliases() {
        let map = MergeMap::parse("# aliases\nx@old.com x@a.com  # moved\n\n".as_bytes()).unwrap();
        let log = normalize_identities(log_of(&["x@old.com", "X@A.com"]), Some(&map));
        assert_eq!(distinct_keys(&log), 1);
        assert_eq!(log.commits[0].author.canonical_key, "x@a.com");
    }

    #[test]
    fn empty_merge_map_equals_lowercase_only() {
        let input = log_of(&["P@q.org", "r@S.org"]);
        let empty = MergeMap::parse("".as_bytes()).unwrap();
        assert!(empty.is_empty());
        assert_eq!(
            normalize_identities(input.clone(), Some(&empty)),
            normalize_identities(input, None)
        );
    }

    #[test]
    fn malformed_merge_map_reports_line() {
        let err = MergeMap::parse("a@b c@d\nonly-one\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedMergeMap { line: 2, .. }));
    }

    #[test]
    fn normalization_is_idempotent() {
        let map = MergeMap::from_pairs([("a@x", "b@x"), ("b@x", "c@x")]);
        let once = normalize_identities(log_of(&["A@x", "b@X", "c@x"]), Some(&map));
        let twice = normalize_identities(once.clone(), Some(&map));
        assert_eq!(once, twice);
    }
}
