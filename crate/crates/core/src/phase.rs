//! Committer activity windows and cathedral/bazaar transition detection.
//!
//! A project is in its cathedral phase while fewer than `cathedral_max`
//! distinct people commit within a window, and in its bazaar phase once more
//! than `bazaar_min` do. The transition is the gap between the last cathedral
//! window and the first sustained run of bazaar windows, searched with a
//! maximum gap of 12, then 18, then 24 months.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::CommitLog;
use crate::time::{floor_to_day, iso8601, parse_iso8601, DAY_SECS};

/// Month length used for span bounds: the same 30 days as a default window.
pub const MONTH_SECS: i64 = 30 * DAY_SECS;

/// Gap bounds tried in order; the first that yields a transition wins.
pub const SPAN_MONTHS: [u32; 3] = [12, 18, 24];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PhaseError {
    #[error("commit log is empty")]
    EmptyLog,
    #[error("invalid window parameters: {0}")]
    InvalidWindow(String),
    #[error("malformed window CSV on line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseThresholds {
    /// Cathedral iff distinct committers `<` this.
    pub cathedral_max: usize,
    /// Bazaar iff distinct committers `>` this.
    pub bazaar_min: usize,
}

impl Default for PhaseThresholds {
    fn default() -> Self {
        PhaseThresholds {
            cathedral_max: 10,
            bazaar_min: 50,
        }
    }
}

impl PhaseThresholds {
    pub fn label(&self, distinct_committers: usize) -> PhaseLabel {
        if distinct_committers < self.cathedral_max {
            PhaseLabel::Cathedral
        } else if distinct_committers > self.bazaar_min {
            PhaseLabel::Bazaar
        } else {
            PhaseLabel::Intermediate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseLabel {
    Cathedral,
    Intermediate,
    Bazaar,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::Cathedral => "cathedral",
            PhaseLabel::Intermediate => "intermediate",
            PhaseLabel::Bazaar => "bazaar",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cathedral" => Some(PhaseLabel::Cathedral),
            "intermediate" => Some(PhaseLabel::Intermediate),
            "bazaar" => Some(PhaseLabel::Bazaar),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitterWindow {
    pub start: i64,
    /// Exclusive.
    pub end: i64,
    pub distinct_committers: usize,
    pub label: PhaseLabel,
}

/// Rolling distinct-committer counts.
///
/// Windows start at midnight UTC of the first commit's day and advance by
/// `step_days` until the last commit is covered. A commit falls in a window
/// when `start <= timestamp < end`; committers are told apart by canonical key.
pub fn committer_series(
    log: &CommitLog,
    window_days: i64,
    step_days: i64,
    thresholds: PhaseThresholds,
) -> Result<Vec<CommitterWindow>, PhaseError> {
    if step_days < 1 || window_days < step_days {
        return Err(PhaseError::InvalidWindow(format!(
            "need window_days >= step_days >= 1, got window {window_days}, step {step_days}"
        )));
    }
    let commits = &log.commits;
    let (Some(first), Some(last)) = (commits.first(), commits.last()) else {
        return Err(PhaseError::EmptyLog);
    };
    let window = window_days * DAY_SECS;
    let step = step_days * DAY_SECS;

    let mut counts: HashMap<&str, usize> = HashMap::new();
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut windows = Vec::new();
    let mut start = floor_to_day(first.timestamp);
    while start <= last.timestamp {
        let end = start + window;
        while hi < commits.len() && commits[hi].timestamp < end {
            *counts.entry(commits[hi].author.canonical_key.as_str()).or_default() += 1;
            hi += 1;
        }
        while lo < hi && commits[lo].timestamp < start {
            let key = commits[lo].author.canonical_key.as_str();
            let n = counts.get_mut(key).expect("counted on entry");
            *n -= 1;
            if *n == 0 {
                counts.remove(key);
            }
            lo += 1;
        }
        windows.push(CommitterWindow {
            start,
            end,
            distinct_committers: counts.len(),
            label: thresholds.label(counts.len()),
        });
        start += step;
    }
    Ok(windows)
}

/// Re-applies `thresholds` to existing counts.
pub fn relabel(windows: &[CommitterWindow], thresholds: PhaseThresholds) -> Vec<CommitterWindow> {
    windows
        .iter()
        .map(|w| CommitterWindow {
            label: thresholds.label(w.distinct_committers),
            ..*w
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub found: bool,
    pub span_months: Option<u32>,
    /// End of the last qualifying cathedral window.
    pub transition_start: Option<i64>,
    /// Start of the first sustained bazaar window.
    pub transition_end: Option<i64>,
    pub sustain_windows: usize,
}

impl TransitionReport {
    fn not_found(sustain: usize) -> Self {
        TransitionReport {
            found: false,
            span_months: None,
            transition_start: None,
            transition_end: None,
            sustain_windows: sustain,
        }
    }
}

/// Searches for the cathedral→bazaar transition.
///
/// For each span (12, 18, 24 months): the earliest bazaar window that opens a
/// run of at least `sustain` consecutive bazaar windows and that has a
/// cathedral window ending no later than its start and no more than the span
/// before it. The report uses the latest such cathedral window. The span
/// bounds the gap between the two windows, not the observation period.
pub fn detect_transition(windows: &[CommitterWindow], sustain: usize) -> TransitionReport {
    let sustain = sustain.max(1);
    let n = windows.len();
    // run[i]: consecutive bazaar windows starting at i
    let mut run = vec![0usize; n + 1];
    for i in (0..n).rev() {
        run[i] = if windows[i].label == PhaseLabel::Bazaar {
            run[i + 1] + 1
        } else {
            0
        };
    }
    for span in SPAN_MONTHS {
        let limit = i64::from(span) * MONTH_SECS;
        for b in (0..n).filter(|&b| run[b] >= sustain) {
            let b_start = windows[b].start;
            let latest_cathedral = windows[..b]
                .iter()
                .filter(|c| c.label == PhaseLabel::Cathedral && c.end <= b_start)
                .map(|c| c.end)
                .max();
            if let Some(c_end) = latest_cathedral {
                if b_start - c_end <= limit {
                    return TransitionReport {
                        found: true,
                        span_months: Some(span),
                        transition_start: Some(c_end),
                        transition_end: Some(b_start),
                        sustain_windows: sustain,
                    };
                }
            }
        }
    }
    TransitionReport::not_found(sustain)
}

/// `start_iso,end_iso,distinct_committers,label`
pub fn write_windows_csv<W: Write>(windows: &[CommitterWindow], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["start_iso", "end_iso", "distinct_committers", "label"])?;
    for win in windows {
        w.write_record([
            iso8601(win.start),
            iso8601(win.end),
            win.distinct_committers.to_string(),
            win.label.as_str().to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_windows_csv<R: std::io::Read>(input: R) -> Result<Vec<CommitterWindow>, PhaseError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header_ok = rdr
        .headers()
        .map(|h| h.iter().eq(["start_iso", "end_iso", "distinct_committers", "label"]))
        .unwrap_or(false);
    if !header_ok {
        return Err(PhaseError::MalformedCsv {
            line: 1,
            reason: "unexpected header".into(),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |reason: &str| PhaseError::MalformedCsv {
            line,
            reason: reason.to_string(),
        };
        let rec = rec.map_err(|e| bad(&e.to_string()))?;
        if rec.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let start = parse_iso8601(&rec[0]).ok_or_else(|| bad("bad start"))?;
        let end = parse_iso8601(&rec[1]).ok_or_else(|| bad("bad end"))?;
        if end <= start {
            return Err(bad("end not after start"));
        }
        out.push(CommitterWindow {
            start,
            end,
            distinct_committers: rec[2].parse().map_err(|_| bad("bad count"))?,
            label: PhaseLabel::parse(&rec[3]).ok_or_else(|| bad("bad label"))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{CommitRecord, Identity};
    use proptest::prelude::*;

    const T0: i64 = 1_262_563_200;

    fn log_from(entries: &[(i64, String)]) -> CommitLog {
        let commits = entries
            .iter()
            .enumerate()
            .map(|(i, (ts, who))| CommitRecord {
                id: format!("c{i}"),
                author: Identity::new(who.clone(), &format!("{who}@x.org")),
                timestamp: *ts,
                message: String::new(),
                changes: vec![],
            })
            .collect();
        CommitLog::from_commits(commits, "test").unwrap()
    }

    fn windows_with(labels: &[PhaseLabel], len_days: i64, step_days: i64) -> Vec<CommitterWindow> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &label)| CommitterWindow {
                start: T0 + i as i64 * step_days * DAY_SECS,
                end: T0 + i as i64 * step_days * DAY_SECS + len_days * DAY_SECS,
                distinct_committers: match label {
                    PhaseLabel::Cathedral => 3,
                    PhaseLabel::Intermediate => 20,
                    PhaseLabel::Bazaar => 60,
                },
                label,
            })
            .collect()
    }

    use PhaseLabel::{Bazaar as B, Cathedral as C, Intermediate as I};

    #[test]
    fn single_commit_is_one_cathedral_window() {
        let log = log_from(&[(T0 + 500, "a".into())]);
        let w = committer_series(&log, 30, 7, PhaseThresholds::default()).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].start, T0);
        assert_eq!(w[0].distinct_committers, 1);
        assert_eq!(w[0].label, C);
    }

    #[test]
    fn sixty_authors_in_a_month_is_bazaar() {
        let entries: Vec<_> = (0..60).map(|i| (T0 + i * 3600, format!("dev{i}"))).collect();
        let w = committer_series(&log_from(&entries), 30, 7, PhaseThresholds::default()).unwrap();
        assert_eq!(w[0].label, B);
        assert_eq!(w[0].distinct_committers, 60);
    }

    #[test]
    fn scripted_monthly_author_counts() {
        // Window k holds commits from `counts[k]` fresh authors, so the
        // distinct count of each non-overlapping 30-day window is exactly counts[k].
        let counts = [3usize, 4, 5, 8, 20, 35, 60, 70];
        let mut entries = Vec::new();
        for (k, &c) in counts.iter().enumerate() {
            for a in 0..c {
                let ts = T0 + k as i64 * 30 * DAY_SECS + a as i64 * 600;
                entries.push((ts, format!("w{k}a{a}")));
            }
        }
        let w = committer_series(&log_from(&entries), 30, 30, PhaseThresholds::default()).unwrap();
        let got: Vec<_> = w.iter().map(|w| w.distinct_committers).collect();
        assert_eq!(got, counts);
        let labels: Vec<_> = w.iter().map(|w| w.label).collect();
        assert_eq!(labels, [C, C, C, C, I, I, B, B]);
    }

    #[test]
    fn thresholds_are_strict() {
        let t = PhaseThresholds::default();
        assert_eq!(t.label(9), C);
        assert_eq!(t.label(10), I);
        assert_eq!(t.label(50), I);
        assert_eq!(t.label(51), B);
    }

    #[test]
    fn empty_log_and_bad_params() {
        assert_eq!(
            committer_series(&CommitLog::default(), 30, 7, PhaseThresholds::default()),
            Err(PhaseError::EmptyLog)
        );
        let log = log_from(&[(T0, "a".into())]);
        assert!(committer_series(&log, 5, 7, PhaseThresholds::default()).is_err());
        assert!(committer_series(&log, 5, 0, PhaseThresholds::default()).is_err());
    }

    #[test]
    fn adjacent_cathedral_then_sustained_bazaar() {
        let w = windows_with(&[C, C, B, B, B, B], 30, 30);
        let r = detect_transition(&w, 4);
        assert!(r.found);
        assert_eq!(r.span_months, Some(12));
        // Window 2 (1-based) ends where window 3 starts.
        assert_eq!(r.transition_start, Some(w[1].end));
        assert_eq!(r.transition_end, Some(w[2].start));
    }

    #[test]
    fn fourteen_month_gap_needs_eighteen_month_span() {
        // Two cathedral windows, then intermediate windows stepped so that the
        // gap between the last cathedral end and the bazaar run is 14 months.
        let mut labels = vec![C, C];
        labels.extend(std::iter::repeat_n(I, 14));
        labels.extend([B, B, B, B]);
        let w = windows_with(&labels, 30, 30);
        let gap = w[16].start - w[1].end;
        assert_eq!(gap, 14 * MONTH_SECS);
        let r = detect_transition(&w, 4);
        assert!(r.found);
        assert_eq!(r.span_months, Some(18));
    }

    #[test]
    fn all_cathedral_is_not_found() {
        let r = detect_transition(&windows_with(&[C; 12], 30, 7), 4);
        assert!(!r.found);
        assert_eq!(r.transition_start, None);
        assert!(!detect_transition(&[], 4).found);
    }

    #[test]
    fn short_spike_is_rejected() {
        let r = detect_transition(&windows_with(&[C, B, B, C, B, B, B, B], 30, 30), 4);
        assert_eq!(r.transition_end, Some(T0 + 4 * 30 * DAY_SECS));
        assert_eq!(r.transition_start, Some(T0 + 4 * 30 * DAY_SECS));
    }

    #[test]
    fn overlapping_cathedral_window_does_not_qualify() {
        // 30-day windows stepped weekly: the cathedral window right before the
        // bazaar run overlaps it, so the last fully preceding one is used.
        let w = windows_with(&[C, C, C, C, C, C, B, B, B, B], 30, 7);
        let r = detect_transition(&w, 4);
        let c_end = r.transition_start.unwrap();
        assert!(c_end <= r.transition_end.unwrap());
        assert_eq!(c_end, w[1].end);
    }

    #[test]
    fn csv_round_trip() {
        let w = windows_with(&[C, I, B], 30, 7);
        let mut buf = Vec::new();
        write_windows_csv(&w, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "start_iso,end_iso,distinct_committers,label\n2010-01-04T00:00:00Z,2010-02-03T00:00:00Z,3,cathedral\n"
        ));
        assert_eq!(read_windows_csv(buf.as_slice()).unwrap(), w);
    }

    fn arb_labels() -> impl Strategy<Value = Vec<PhaseLabel>> {
        prop::collection::vec(prop_oneof![Just(C), Just(I), Just(B)], 0..80)
    }

    proptest! {
        #[test]
        fn found_reports_are_checkable(labels in arb_labels(), sustain in 1usize..5, step in prop_oneof![Just(7i64), Just(30i64)]) {
            let w = windows_with(&labels, 30, step);
            let r = detect_transition(&w, sustain);
            if r.found {
                let (s, e) = (r.transition_start.unwrap(), r.transition_end.unwrap());
                prop_assert!(s <= e);
                prop_assert!(e - s <= i64::from(r.span_months.unwrap()) * MONTH_SECS);
                let b = w.iter().position(|x| x.start == e).unwrap();
                prop_assert!(w[b..].len() >= sustain);
                prop_assert!(w[b..b + sustain].iter().all(|x| x.label == B));
                prop_assert!(w.iter().any(|x| x.label == C && x.end == s));
            } else {
                prop_assert!(r.transition_start.is_none() && r.transition_end.is_none() && r.span_months.is_none());
            }
        }

        #[test]
        fn appending_after_transition_changes_nothing(labels in arb_labels(), tail in arb_labels()) {
            let w = windows_with(&labels, 30, 30);
            let r = detect_transition(&w, 2);
            // Later windows can still open a shorter-span success when the
            // found span is above the minimum, so only the 12-month case is stable.
            prop_assume!(r.found && r.span_months == Some(12));
            let cutoff = r.transition_end.unwrap() + i64::from(r.span_months.unwrap()) * MONTH_SECS;
            let mut extended: Vec<_> = w.iter().copied().filter(|x| x.start <= cutoff).collect();
            let mut next = extended.last().unwrap().start;
            for &label in &tail {
                next = next.max(cutoff) + 30 * DAY_SECS;
                extended.push(CommitterWindow { start: next, end: next + 30 * DAY_SECS, distinct_committers: 0, label });
            }
            prop_assert_eq!(detect_transition(&extended, 2), r);
        }

        #[test]
        fn raising_bazaar_min_never_advances_the_search(
            counts in prop::collection::vec(0usize..90, 0..60),
            low in 20usize..60,
            raise in 1usize..30,
        ) {
            let base: Vec<_> = counts.iter().enumerate().map(|(i, &n)| CommitterWindow {
                start: T0 + i as i64 * 30 * DAY_SECS,
                end: T0 + (i as i64 + 1) * 30 * DAY_SECS,
                distinct_committers: n,
                label: C,
            }).collect();
            let lo = detect_transition(&relabel(&base, PhaseThresholds { cathedral_max: 10, bazaar_min: low }), 2);
            let hi = detect_transition(&relabel(&base, PhaseThresholds { cathedral_max: 10, bazaar_min: low + raise }), 2);
            if hi.found {
                prop_assert!(lo.found);
                prop_assert!((hi.span_months, hi.transition_end) >= (lo.span_months, lo.transition_end));
            }
        }

        #[test]
        fn relabel_is_idempotent(counts in prop::collection::vec(0usize..100, 0..40), cm in 1usize..30, bm in 20usize..80) {
            let t = PhaseThresholds { cathedral_max: cm, bazaar_min: bm };
            let w: Vec<_> = counts.iter().enumerate().map(|(i, &n)| CommitterWindow {
                start: i as i64, end: i as i64 + 1, distinct_committers: n, label: C }).collect();
            let once = relabel(&w, t);
            prop_assert_eq!(relabel(&once, t), once);
        }
    }
}
