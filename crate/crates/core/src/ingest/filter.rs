use globset::{Glob, GlobSet, GlobSetBuilder};

use super::{IngestError, Result};

/// Glob patterns selecting source files; `*` crosses directory separators,
/// so `*.java` matches at any depth.
#[derive(Debug, Clone)]
pub struct SourceFilter {
    patterns: Vec<String>,
    set: GlobSet,
}

impl SourceFilter {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self> {
        let mut builder = GlobSetBuilder::new();
        for p in patterns {
            let glob = Glob::new(p.as_ref())
                .map_err(|e| IngestError::InvalidArgument(format!("bad glob {:?}: {e}", p.as_ref())))?;
            builder.add(glob);
        }
        let set = builder
            .build()
            .map_err(|e| IngestError::InvalidArgument(e.to_string()))?;
        Ok(SourceFilter {
            patterns: patterns.iter().map(|p| p.as_ref().to_string()).collect(),
            set,
        })
    }

    pub fn java() -> Self {
        Self::new(&["*.java"]).expect("static glob")
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    pub fn matches(&self, path: &str) -> bool {
        self.set.is_match(path)
    }
}

impl Default for SourceFilter {
    fn default() -> Self {
        Self::java()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn java_default_matches_nested_paths() {
        let f = SourceFilter::default();
        assert!(f.matches("A.java"));
        assert!(f.matches("src/main/java/a/B.java"));
        assert!(!f.matches("notes.txt"));
        assert!(!f.matches("A.java.orig"));
    }

    #[test]
    fn multiple_patterns_and_bad_glob() {
        let f = SourceFilter::new(&["src/**/*.java", "*.kt"]).unwrap();
        assert!(f.matches("src/x/Y.java"));
        assert!(f.matches("Z.kt"));
        assert!(!f.matches("test/Y.java"));
        assert!(SourceFilter::new(&["a[b"]).is_err());
    }
}
