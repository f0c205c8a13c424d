use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::filter::SourceFilter;
use super::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    /// Repository-relative, `/`-separated.
    pub path: String,
    /// Hex SHA-256 of the file content.
    pub digest: String,
}

/// A release's source tree on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotTree {
    pub root: PathBuf,
    /// Sorted by path.
    pub files: Vec<SourceFile>,
}

pub(crate) fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl SnapshotTree {
    /// Indexes source files already present under `root` (e.g. an unpacked
    /// release or a working copy). Hidden directories such as `.git` are skipped.
    pub fn scan(root: &Path, filter: &SourceFilter) -> Result<Self> {
        let mut files = Vec::new();
        let walker = walkdir::WalkDir::new(root)
            .follow_links(false)
            .into_iter()
            .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
        for entry in walker {
            let entry = entry.map_err(|e| std::io::Error::other(e.to_string()))?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(root)
                .expect("walk stays under root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            if !filter.matches(&rel) {
                continue;
            }
            let bytes = std::fs::read(entry.path())?;
            files.push(SourceFile {
                path: rel,
                digest: digest_bytes(&bytes),
            });
        }
        files.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(SnapshotTree {
            root: root.to_path_buf(),
            files,
        })
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|f| f.path.as_str())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn abs_path(&self, rel: &str) -> PathBuf {
        rel.split('/').fold(self.root.clone(), |p, c| p.join(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_filters_sorts_and_skips_hidden() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        std::fs::create_dir_all(root.join("b/c")).unwrap();
        std::fs::create_dir_all(root.join(".git")).unwrap();
        std::fs::write(root.join("b/c/Z.java"), "class Z {}").unwrap();
        std::fs::write(root.join("A.java"), "class A {}").unwrap();
        std::fs::write(root.join("readme.md"), "x").unwrap();
        std::fs::write(root.join(".git/H.java"), "class H {}").unwrap();
        let tree = SnapshotTree::scan(root, &SourceFilter::java()).unwrap();
        let paths: Vec<_> = tree.paths().collect();
        assert_eq!(paths, ["A.java", "b/c/Z.java"]);
        assert_eq!(tree.files[0].digest, digest_bytes(b"class A {}"));
        assert_eq!(tree.abs_path("b/c/Z.java"), root.join("b").join("c").join("Z.java"));
    }
}
