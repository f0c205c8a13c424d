use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::ingest::SourceFilter;
use crate::phase::PhaseThresholds;

/// Matches `1.2`, `v1.2.3`, `release-0.20.0`, `rel/2.0`, `REL_1_0` and similar.
pub const DEFAULT_TAG_PATTERN: &str = r"^(?:v|V|release-|rel-|rel/|REL_|RELEASE_)?\d+(?:[._]\d+)+$";

/// Every setting of a pipeline run. Loaded from a JSON document; absent keys
/// take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Name recorded in reports.
    pub project: String,
    pub repo_path: Option<PathBuf>,
    pub commit_log: Option<PathBuf>,
    /// Optional `alias canonical` identity merge file.
    pub merge_map: Option<PathBuf>,
    pub source_filter: Vec<String>,
    pub window_days: i64,
    pub step_days: i64,
    pub cathedral_max: usize,
    pub bazaar_min: usize,
    pub sustain: usize,
    pub tag_pattern: String,
    pub fallback_interval_days: i64,
    pub include_annotations: bool,
    pub z_threshold: f64,
    pub lag: usize,
    pub train_fraction: f64,
    pub permutations: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            project: "project".into(),
            repo_path: None,
            commit_log: None,
            merge_map: None,
            source_filter: vec!["*.java".into()],
            window_days: 30,
            step_days: 7,
            cathedral_max: 10,
            bazaar_min: 50,
            sustain: 4,
            tag_pattern: DEFAULT_TAG_PATTERN.into(),
            fallback_interval_days: 90,
            include_annotations: false,
            z_threshold: 1.0,
            lag: 1,
            train_fraction: 0.7,
            permutations: 10_000,
            seed: 0,
            output_dir: PathBuf::from("instab-out"),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| PipelineError::Config(format!("invalid config: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn thresholds(&self) -> PhaseThresholds {
        PhaseThresholds {
            cathedral_max: self.cathedral_max,
            bazaar_min: self.bazaar_min,
        }
    }

    pub fn filter(&self) -> Result<SourceFilter, PipelineError> {
        SourceFilter::new(&self.source_filter).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn tag_regex(&self) -> Result<Regex, PipelineError> {
        Regex::new(&self.tag_pattern).map_err(|e| PipelineError::Config(format!("bad tag_pattern: {e}")))
    }

    /// Checks the cross-field constraints that serde cannot express.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        match (&self.repo_path, &self.commit_log) {
            (Some(_), Some(_)) => return bad("set only one of repo_path and commit_log".into()),
            (None, None) => return bad("one of repo_path or commit_log is required".into()),
            _ => {}
        }
        if self.window_days < 1 || self.step_days < 1 || self.step_days > self.window_days {
            return bad(format!(
                "need window_days >= step_days >= 1, got {} and {}",
                self.window_days, self.step_days
            ));
        }
        if self.cathedral_max == 0 || self.bazaar_min == 0 || self.sustain == 0 {
            return bad("cathedral_max, bazaar_min and sustain must be positive".into());
        }
        if self.cathedral_max > self.bazaar_min {
            return bad(format!(
                "cathedral_max ({}) must not exceed bazaar_min ({})",
                self.cathedral_max, self.bazaar_min
            ));
        }
        if self.fallback_interval_days < 7 {
            return bad(format!(
                "fallback_interval_days must be >= 7, got {}",
                self.fallback_interval_days
            ));
        }
        if !(self.z_threshold.is_finite() && self.z_threshold > 0.0) {
            return bad(format!("z_threshold must be positive, got {}", self.z_threshold));
        }
        if self.lag < 1 {
            return bad("lag must be >= 1".into());
        }
        if !(0.5..1.0).contains(&self.train_fraction) {
            return bad(format!(
                "train_fraction must be in [0.5, 1), got {}",
                self.train_fraction
            ));
        }
        if self.permutations == 0 {
            return bad("permutations must be positive".into());
        }
        if self.source_filter.is_empty() {
            return bad("source_filter must not be empty".into());
        }
        self.filter()?;
        self.tag_regex()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_documents() {
        let cfg = PipelineConfig::from_json(r#"{"repo_path": "x", "sustain": 2}"#).unwrap();
        assert_eq!(cfg.sustain, 2);
        assert_eq!(cfg.window_days, 30);
        assert_eq!(cfg.bazaar_min, 50);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(PipelineConfig::from_json(r#"{"windw_days": 3}"#).is_err());
        let mut cfg = PipelineConfig {
            repo_path: Some("x".into()),
            ..Default::default()
        };
        cfg.commit_log = Some("y".into());
        assert!(cfg.validate().is_err());
        cfg.commit_log = None;
        cfg.train_fraction = 1.0;
        assert!(cfg.validate().is_err());
        cfg.train_fraction = 0.7;
        cfg.fallback_interval_days = 3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_tag_pattern() {
        let re = Regex::new(DEFAULT_TAG_PATTERN).unwrap();
        for t in ["v0.1", "1.2.3", "release-0.20.0", "rel/2.0", "REL_1_0"] {
            assert!(re.is_match(t), "{t}");
        }
        for t in ["nightly", "v1", "release-candidate"] {
            assert!(!re.is_match(t), "{t}");
        }
    }
}
