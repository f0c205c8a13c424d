//! Class- and package-level dependency graphs extracted from Java sources.

mod graph;
mod lexer;
mod parser;
mod resolve;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use graph::{aggregate_packages, package_of, DependencyGraph, GraphFormatError, PackageGraph};
pub use parser::{parse_compilation_unit, DeclaredType, Import, ParseError, ParseOptions, UnitFacts};
pub use resolve::{resolve_dependencies, ResolveWarning};

use crate::ingest::{ReleaseRef, SnapshotTree};

#[derive(Debug, thiserror::Error)]
pub enum DepsError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Everything extracted from one snapshot.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub graph: DependencyGraph,
    pub units: Vec<UnitFacts>,
    pub warnings: Vec<ResolveWarning>,
    /// Files skipped because no type declaration was found.
    pub skipped: Vec<String>,
    /// Top-level class → repository-relative file declaring it.
    pub class_files: BTreeMap<String, String>,
}

/// Parses every file of `tree` (in parallel) and resolves the class graph.
/// Output does not depend on worker count or discovery order.
pub fn extract_snapshot(tree: &SnapshotTree, release: ReleaseRef, opts: ParseOptions) -> Result<Extraction, DepsError> {
    let parsed: Vec<(String, Result<UnitFacts, ParseError>)> = tree
        .files
        .par_iter()
        .map(|f| {
            let bytes = std::fs::read(tree.abs_path(&f.path)).map_err(|source| DepsError::Read {
                path: f.path.clone(),
                source,
            })?;
            let text = String::from_utf8_lossy(&bytes);
            Ok((f.path.clone(), parse_compilation_unit(&text, &f.path, opts)))
        })
        .collect::<Result<_, DepsError>>()?;

    let mut units = Vec::new();
    let mut skipped = Vec::new();
    for (path, res) in parsed {
        match res {
            Ok(u) => units.push(u),
            Err(e) => {
                tracing::warn!("{e}");
                skipped.push(path);
            }
        }
    }
    units.sort_by(|a, b| a.file.cmp(&b.file));

    let mut class_files = BTreeMap::new();
    for u in &units {
        for t in u.top_level_types() {
            class_files.entry(u.qualify(t)).or_insert_with(|| u.file.clone());
        }
    }
    let (graph, warnings) = resolve_dependencies(&units, release);
    for w in &warnings {
        tracing::warn!("{w}");
    }
    Ok(Extraction {
        graph,
        units,
        warnings,
        skipped,
        class_files,
    })
}
