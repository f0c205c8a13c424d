use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ingest::ReleaseRef;

/// Project-internal class dependencies of one release.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub release: ReleaseRef,
    /// Fully-qualified top-level type names.
    pub nodes: BTreeSet<String>,
    /// `(from, to)`; both endpoints are nodes and `from != to`.
    pub edges: BTreeSet<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum GraphFormatError {
    #[error("invalid dependency graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("edge {0} -> {1} references an unknown node")]
    DanglingEdge(String, String),
    #[error("self edge on {0}")]
    SelfEdge(String),
}

/// Package of a top-level FQN; `""` for the default package.
pub fn package_of(class: &str) -> &str {
    class.rsplit_once('.').map(|(p, _)| p).unwrap_or("")
}

impl DependencyGraph {
    pub fn check(&self) -> Result<(), GraphFormatError> {
        for (a, b) in &self.edges {
            if a == b {
                return Err(GraphFormatError::SelfEdge(a.clone()));
            }
            if !self.nodes.contains(a) || !self.nodes.contains(b) {
                return Err(GraphFormatError::DanglingEdge(a.clone(), b.clone()));
            }
        }
        Ok(())
    }

    /// Stable, line-oriented JSON: sorted nodes, one `[from, to]` edge per line.
    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let s = |v: &str| serde_json::to_string(v).expect("string serializes");
        writeln!(out, "{{")?;
        writeln!(out, "  \"release\": {},", serde_json::to_string(&self.release)?)?;
        write!(out, "  \"nodes\": [")?;
        for (i, n) in self.nodes.iter().enumerate() {
            write!(out, "{}\n    {}", if i == 0 { "" } else { "," }, s(n))?;
        }
        writeln!(out, "{}],", if self.nodes.is_empty() { "" } else { "\n  " })?;
        write!(out, "  \"edges\": [")?;
        for (i, (a, b)) in self.edges.iter().enumerate() {
            write!(out, "{}\n    [{}, {}]", if i == 0 { "" } else { "," }, s(a), s(b))?;
        }
        writeln!(out, "{}]", if self.edges.is_empty() { "" } else { "\n  " })?;
        writeln!(out, "}}")?;
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphFormatError> {
        let g: DependencyGraph = serde_json::from_str(text)?;
        g.check()?;
        Ok(g)
    }
}

/// Class graph folded onto packages.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PackageGraph {
    pub packages: BTreeSet<String>,
    /// `(P, Q)` with `P != Q` → number of class edges from P into Q.
    pub edges: BTreeMap<(String, String), usize>,
    pub class_count: BTreeMap<String, usize>,
    /// Class edges that stay inside a package.
    pub intra_edges: BTreeMap<String, usize>,
}

impl PackageGraph {
    pub fn intra_total(&self) -> usize {
        self.intra_edges.values().sum()
    }

    /// Distinct target packages of `p`.
    pub fn targets<'a>(&'a self, p: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .keys()
            .filter(move |(from, _)| from == p)
            .map(|(_, to)| to.as_str())
    }
}

pub fn aggregate_packages(graph: &DependencyGraph) -> PackageGraph {
    let mut pg = PackageGraph::default();
    for node in &graph.nodes {
        let p = package_of(node).to_string();
        *pg.class_count.entry(p.clone()).or_default() += 1;
        pg.packages.insert(p);
    }
    for (a, b) in &graph.edges {
        let (pa, pb) = (package_of(a), package_of(b));
        if pa == pb {
            *pg.intra_edges.entry(pa.to_string()).or_default() += 1;
        } else {
            *pg.edges.entry((pa.to_string(), pb.to_string())).or_default() += 1;
        }
    }
    pg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> DependencyGraph {
        DependencyGraph {
            release: ReleaseRef {
                label: "v1".into(),
                commit_id: "abc".into(),
                timestamp: 42,
            },
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            edges: edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }

    #[test]
    fn counts_crossing_edges() {
        let pg = aggregate_packages(&graph(&["a.X", "a.Z", "b.Y"], &[("a.X", "b.Y"), ("a.Z", "b.Y")]));
        assert_eq!(pg.edges[&("a".to_string(), "b".to_string())], 2);
        assert_eq!(pg.class_count["a"], 2);
        assert_eq!(pg.intra_total(), 0);
    }

    #[test]
    fn intra_package_edges_are_dropped_but_counted() {
        let pg = aggregate_packages(&graph(&["a.X", "a.Y", "a.Z"], &[("a.X", "a.Y"), ("a.Y", "a.Z")]));
        assert!(pg.edges.is_empty());
        assert_eq!(pg.intra_edges["a"], 2);
    }

    #[test]
    fn empty_graph() {
        assert_eq!(aggregate_packages(&graph(&[], &[])), PackageGraph::default());
    }

    #[test]
    fn default_package() {
        let pg = aggregate_packages(&graph(&["Main", "a.B"], &[("Main", "a.B")]));
        assert!(pg.packages.contains(""));
        assert_eq!(pg.edges[&(String::new(), "a".to_string())], 1);
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let g = graph(&["b.Y", "a.X"], &[("b.Y", "a.X"), ("a.X", "b.Y")]);
        let text = g.to_json_string();
        assert_eq!(
            text,
            "{\n  \"release\": {\"label\":\"v1\",\"commit_id\":\"abc\",\"timestamp\":42},\n  \"nodes\": [\n    \"a.X\",\n    \"b.Y\"\n  ],\n  \"edges\": [\n    [\"a.X\", \"b.Y\"],\n    [\"b.Y\", \"a.X\"]\n  ]\n}\n"
        );
        assert_eq!(DependencyGraph::from_json(&text).unwrap(), g);
        let empty = graph(&[], &[]);
        assert_eq!(DependencyGraph::from_json(&empty.to_json_string()).unwrap(), empty);
    }

    #[test]
    fn invalid_graphs_are_rejected() {
        let dangling = graph(&["a.X"], &[("a.X", "b.Y")]);
        assert!(matches!(
            DependencyGraph::from_json(&dangling.to_json_string()),
            Err(GraphFormatError::DanglingEdge(..))
        ));
        let selfy = graph(&["a.X"], &[("a.X", "a.X")]);
        assert!(matches!(selfy.check(), Err(GraphFormatError::SelfEdge(_))));
    }
}
