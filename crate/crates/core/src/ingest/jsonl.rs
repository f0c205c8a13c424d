//! The portable commit-log format: one JSON object per line.
//!
//! ```text
//! {"id":"…","author_name":"…","author_email":"…","timestamp":1262563200,"message":"…","changes":[{"path":"A.java","kind":"M"}]}
//! ```
//!
//! `canonical_key` is written only when identity merging assigned a key other
//! than the author's own email, so plain logs keep exactly the six base keys.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::model::{ChangeKind, CommitLog, CommitRecord, FileChange, Identity};
use super::{IngestError, Result};

#[derive(Serialize, Deserialize)]
struct ChangeLine {
    path: String,
    kind: ChangeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    old_path: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: String,
    author_name: String,
    author_email: String,
    timestamp: i64,
    message: String,
    changes: Vec<ChangeLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    canonical_key: Option<String>,
}

fn to_record(line: RecordLine, line_no: usize) -> Result<CommitRecord> {
    let malformed = |reason: String| IngestError::MalformedRecord { line: line_no, reason };
    if line.id.is_empty() {
        return Err(malformed("empty id".into()));
    }
    if line.timestamp <= 0 {
        return Err(malformed(format!("non-positive timestamp {}", line.timestamp)));
    }
    let mut author = Identity::new(line.author_name, &line.author_email);
    if let Some(key) = line.canonical_key {
        author.canonical_key = key;
    }
    let changes = line
        .changes
        .into_iter()
        .map(|c| {
            let fc = FileChange {
                path: c.path,
                kind: c.kind,
                old_path: c.old_path,
            };
            fc.validate().map(|_| fc).map_err(malformed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommitRecord {
        id: line.id,
        author,
        timestamp: line.timestamp,
        message: line.message,
        changes,
    })
}

/// Reads a JSONL commit log. Out-of-order lines are sorted by timestamp
/// (stable, so equal timestamps keep file order). Blank lines are skipped.
pub fn parse_commit_log<R: BufRead>(reader: R, source: impl Into<String>) -> Result<CommitLog> {
    let mut commits = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RecordLine = serde_json::from_str(&line).map_err(|e| IngestError::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        commits.push(to_record(parsed, line_no)?);
    }
    CommitLog::from_commits(commits, source)
}

/// Writes `log` as JSONL with LF line endings, one commit per line in log order.
pub fn write_commit_log<W: Write>(log: &CommitLog, mut out: W) -> Result<()> {
    for c in &log.commits {
        let line = RecordLine {
            id: c.id.clone(),
            author_name: c.author.name.clone(),
            author_email: c.author.email.clone(),
            timestamp: c.timestamp,
            message: c.message.clone(),
            changes: c
                .changes
                .iter()
                .map(|fc| ChangeLine {
                    path: fc.path.clone(),
                    kind: fc.kind,
                    old_path: fc.old_path.clone(),
                })
                .collect(),
            canonical_key: (c.author.canonical_key != c.author.email).then(|| c.author.canonical_key.clone()),
        };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<CommitLog> {
        parse_commit_log(s.as_bytes(), "test")
    }

    #[test]
    fn empty_stream_gives_empty_log() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn out_of_order_lines_are_sorted() {
        let text = concat!(
            r#"{"id":"b","author_name":"B","author_email":"b@x","timestamp":200,"message":"two","changes":[]}"#,
            "\n",
            r#"{"id":"a","author_name":"A","author_email":"a@x","timestamp":100,"message":"one","changes":[{"path":"A.java","kind":"A"}]}"#,
            "\n"
        );
        let log = parse(text).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log.commits[0].id, "a");
        assert_eq!(log.commits[1].id, "b");
    }

    #[test]
    fn missing_id_is_malformed_on_line_one() {
        let text = r#"{"author_name":"A","author_email":"a@x","timestamp":1,"message":"m","changes":[]}"#;
        match parse(text) {
            Err(IngestError::MalformedRecord { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let l = r#"{"id":"a","author_name":"A","author_email":"a@x","timestamp":1,"message":"m","changes":[]}"#;
        assert!(matches!(parse(&format!("{l}\n{l}\n")), Err(IngestError::DuplicateCommitId(id)) if id == "a"));
    }

    #[test]
    fn rename_requires_old_path() {
        let l = r#"{"id":"a","author_name":"A","author_email":"a@x","timestamp":1,"message":"m","changes":[{"path":"B.java","kind":"R"}]}"#;
        assert!(matches!(parse(l), Err(IngestError::MalformedRecord { line: 1, .. })));
    }

    #[test]
    fn canonical_input_round_trips_byte_identically() {
        let text = concat!(
            r#"{"id":"a","author_name":"Ann","author_email":"ann@x.org","timestamp":100,"message":"Fix \"quoted\"\nbody","changes":[{"path":"src/A.java","kind":"M"},{"path":"src/C.java","kind":"R","old_path":"src/B.java"}]}"#,
            "\n",
            r#"{"id":"b","author_name":"Bo","author_email":"bo@x.org","timestamp":100,"message":"","changes":[],"canonical_key":"ann@x.org"}"#,
            "\n"
        );
        let log = parse(text).unwrap();
        let mut out = Vec::new();
        write_commit_log(&log, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }
}
