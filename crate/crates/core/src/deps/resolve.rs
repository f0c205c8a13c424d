//! Name resolution over the facts of one snapshot.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::graph::DependencyGraph;
use super::parser::UnitFacts;
use crate::ingest::ReleaseRef;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResolveWarning {
    /// Several wildcard imports supply a type with this name.
    AmbiguousWildcard {
        name: String,
        file: String,
        candidates: Vec<String>,
    },
}

impl std::fmt::Display for ResolveWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResolveWarning::AmbiguousWildcard { name, file, candidates } => {
                write!(
                    f,
                    "ambiguous wildcard import of {name} in {file}: {}",
                    candidates.join(", ")
                )
            }
        }
    }
}

enum Resolution {
    Internal(String),
    External,
    Ambiguous(Vec<String>),
    Unresolved,
}

struct Index {
    nodes: BTreeSet<String>,
    by_package: BTreeMap<String, BTreeSet<String>>,
    /// Top-level FQN → simple names of its nested types.
    nested: BTreeMap<String, BTreeSet<String>>,
}

impl Index {
    fn build(units: &[UnitFacts]) -> Self {
        let mut nodes = BTreeSet::new();
        let mut by_package: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut nested: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for u in units {
            for d in &u.declared_types {
                let owner = u.qualify(&d.top_level);
                if d.is_top_level() {
                    nodes.insert(owner);
                    by_package
                        .entry(u.package_name.clone())
                        .or_default()
                        .insert(d.name.clone());
                } else {
                    nested.entry(owner).or_default().insert(d.name.clone());
                }
            }
        }
        Index {
            nodes,
            by_package,
            nested,
        }
    }

    /// Longest dotted prefix of `name` that is a project class.
    fn longest_node_prefix(&self, name: &str) -> Option<String> {
        let segments: Vec<&str> = name.split('.').collect();
        (1..=segments.len())
            .rev()
            .map(|k| segments[..k].join("."))
            .find(|prefix| self.nodes.contains(prefix))
    }
}

struct UnitScope<'a> {
    unit: &'a UnitFacts,
    /// Every simple name declared in the unit → its top-level FQN.
    local: BTreeMap<&'a str, String>,
}

impl<'a> UnitScope<'a> {
    fn new(unit: &'a UnitFacts) -> Self {
        let local = unit
            .declared_types
            .iter()
            .map(|d| (d.name.as_str(), unit.qualify(&d.top_level)))
            .collect();
        UnitScope { unit, local }
    }

    fn resolve_simple(&self, idx: &Index, n: &str) -> Resolution {
        // Types declared in this unit, nested ones included, shadow everything else.
        if let Some(owner) = self.local.get(n) {
            return Resolution::Internal(owner.clone());
        }
        // (1) single-type import ending in `.n`
        for imp in self.unit.imports.iter().filter(|i| !i.wildcard) {
            if imp.name.rsplit('.').next() == Some(n) {
                match idx.longest_node_prefix(&imp.name) {
                    Some(target) => return Resolution::Internal(target),
                    None if !imp.is_static => return Resolution::External,
                    None => {}
                }
            }
        }
        // (2) same package
        if idx
            .by_package
            .get(&self.unit.package_name)
            .is_some_and(|names| names.contains(n))
        {
            return Resolution::Internal(self.unit.qualify(n));
        }
        // (3) unique match among wildcard imports of project packages/classes
        let mut candidates = BTreeSet::new();
        for imp in self.unit.imports.iter().filter(|i| i.wildcard) {
            if idx.by_package.get(&imp.name).is_some_and(|names| names.contains(n)) {
                candidates.insert(format!("{}.{}", imp.name, n));
            } else if idx.nested.get(&imp.name).is_some_and(|names| names.contains(n)) {
                candidates.insert(imp.name.clone());
            }
        }
        match candidates.len() {
            0 => Resolution::Unresolved,
            1 => Resolution::Internal(candidates.into_iter().next().expect("one candidate")),
            _ => Resolution::Ambiguous(candidates.into_iter().collect()),
        }
    }

    fn resolve(&self, idx: &Index, name: &str) -> Resolution {
        let first = name.split('.').next().unwrap_or(name);
        match self.resolve_simple(idx, first) {
            Resolution::Unresolved if first.len() < name.len() => {
                // (4) fully-qualified reference to a project class
                match idx.longest_node_prefix(name) {
                    Some(target) => Resolution::Internal(target),
                    None => Resolution::Unresolved,
                }
            }
            r => r,
        }
    }
}

/// Builds the class-level graph: nodes are top-level types, edges run from the
/// referencing top-level type to the resolved project type. Unresolvable and
/// external names produce no edge.
pub fn resolve_dependencies(units: &[UnitFacts], release: ReleaseRef) -> (DependencyGraph, Vec<ResolveWarning>) {
    let idx = Index::build(units);
    let mut edges = BTreeSet::new();
    let mut warnings = Vec::new();
    for unit in units {
        let scope = UnitScope::new(unit);
        for (owner, names) in &unit.references {
            let from = unit.qualify(owner);
            for name in names {
                match scope.resolve(&idx, name) {
                    Resolution::Internal(to) if to != from => {
                        edges.insert((from.clone(), to));
                    }
                    Resolution::Ambiguous(candidates) => warnings.push(ResolveWarning::AmbiguousWildcard {
                        name: name.clone(),
                        file: unit.file.clone(),
                        candidates,
                    }),
                    _ => {}
                }
            }
        }
    }
    (
        DependencyGraph {
            release,
            nodes: idx.nodes,
            edges,
        },
        warnings,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deps::parser::{parse_compilation_unit, ParseOptions};

    fn units(files: &[(&str, &str)]) -> Vec<UnitFacts> {
        files
            .iter()
            .map(|(path, src)| parse_compilation_unit(src, path, ParseOptions::default()).unwrap())
            .collect()
    }

    fn release() -> ReleaseRef {
        ReleaseRef {
            label: "r".into(),
            commit_id: "0".into(),
            timestamp: 1,
        }
    }

    fn edges(files: &[(&str, &str)]) -> Vec<(String, String)> {
        resolve_dependencies(&units(files), release())
            .0
            .edges
            .into_iter()
            .collect()
    }

    fn e(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn explicit_import_and_external_names() {
        let got = edges(&[
            (
                "a/Foo.java",
                "package a; import b.Bar; import java.util.List; class Foo { Bar b; List<Bar> l; }",
            ),
            ("b/Bar.java", "package b; public class Bar {}"),
        ]);
        assert_eq!(got, [e("a.Foo", "b.Bar")]);
    }

    #[test]
    fn no_self_edges() {
        let got = edges(&[(
            "a/Foo.java",
            "package a; class Foo { Foo next; static Foo make() { return new Foo(); } }",
        )]);
        assert!(got.is_empty());
    }

    #[test]
    fn ambiguous_wildcards_warn_and_emit_nothing() {
        let (g, w) = resolve_dependencies(
            &units(&[
                ("a/U.java", "package a; import b.*; import c.*; class U { X x; }"),
                ("b/X.java", "package b; public class X {}"),
                ("c/X.java", "package c; public class X {}"),
            ]),
            release(),
        );
        assert!(g.edges.is_empty());
        assert_eq!(
            w,
            vec![ResolveWarning::AmbiguousWildcard {
                name: "X".into(),
                file: "a/U.java".into(),
                candidates: vec!["b.X".into(), "c.X".into()],
            }]
        );
    }

    #[test]
    fn resolution_order() {
        let got = edges(&[
            // explicit import beats same package; same package beats wildcard
            (
                "p/A.java",
                "package p; import q.Same; import r.*; class A { Same s; Sib t; Wild w; }",
            ),
            ("p/Same.java", "package p; class Same {}"),
            ("p/Sib.java", "package p; class Sib {}"),
            ("q/Same.java", "package q; public class Same {}"),
            ("r/Sib.java", "package r; public class Sib {}"),
            ("r/Wild.java", "package r; public class Wild {}"),
        ]);
        assert_eq!(got, [e("p.A", "p.Sib"), e("p.A", "q.Same"), e("p.A", "r.Wild")]);
    }

    #[test]
    fn qualified_and_nested_references() {
        let got = edges(&[
            (
                "a/A.java",
                "package a; import b.Outer; class A { Outer.Inner i; void f() { c.Util.go(); b.Outer.Inner.x(); } }",
            ),
            ("a/B.java", "package a; import b.Outer.Inner; class B { Inner i; }"),
            ("a/C.java", "package a; import b.Outer.*; class C { Inner i; }"),
            (
                "b/Outer.java",
                "package b; public class Outer { public static class Inner {} }",
            ),
            ("c/Util.java", "package c; public class Util {}"),
        ]);
        assert_eq!(
            got,
            [
                e("a.A", "b.Outer"),
                e("a.A", "c.Util"),
                e("a.B", "b.Outer"),
                e("a.C", "b.Outer")
            ]
        );
    }

    #[test]
    fn static_imports_depend_on_owner() {
        let got = edges(&[
            (
                "a/A.java",
                "package a; import static b.Consts.LIMIT; class A { int f() { return LIMIT; } }",
            ),
            (
                "b/Consts.java",
                "package b; public class Consts { public static final int LIMIT = 3; }",
            ),
        ]);
        assert_eq!(got, [e("a.A", "b.Consts")]);
    }

    #[test]
    fn nested_name_shadows_package_type() {
        let got = edges(&[
            ("p/A.java", "package p; class A { static class Node {} Node n; }"),
            ("p/Node.java", "package p; class Node {}"),
        ]);
        assert!(got.is_empty());
    }
}
