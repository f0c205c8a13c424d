//! Fact extraction from a single compilation unit.
//!
//! This is not a Java grammar. It tracks brace nesting to know which
//! top-level type is being read, and recognises type names in the positions
//! that matter for coupling: `extends`/`implements`/`throws`/`permits` lists,
//! declarations (`Type name`), `new`, `instanceof`, `catch`, casts, class
//! literals, method references, generic arguments, and qualified static
//! references such as `Util.helper()` or `com.acme.Util.helper()`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::lexer::{tokenize, Tok, PRIMITIVES};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Import {
    pub name: String,
    pub wildcard: bool,
    pub is_static: bool,
}

impl Import {
    /// For static imports, the class that owns the imported member(s).
    pub fn static_owner(&self) -> Option<&str> {
        if !self.is_static {
            return None;
        }
        if self.wildcard {
            Some(&self.name)
        } else {
            self.name.rsplit_once('.').map(|(owner, _)| owner)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredType {
    pub name: String,
    /// Simple name of the enclosing top-level type; equals `name` for top-level types.
    pub top_level: String,
}

impl DeclaredType {
    pub fn is_top_level(&self) -> bool {
        self.name == self.top_level
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitFacts {
    pub file: String,
    /// Dotted package name, `""` for the default package.
    pub package_name: String,
    pub imports: Vec<Import>,
    /// Top-level and nested types in declaration order.
    pub declared_types: Vec<DeclaredType>,
    /// Referenced names keyed by the top-level type whose body (or header) contains them.
    pub references: BTreeMap<String, BTreeSet<String>>,
}

impl UnitFacts {
    /// Union of referenced names across all top-level types.
    pub fn referenced_names(&self) -> BTreeSet<String> {
        self.references.values().flatten().cloned().collect()
    }

    pub fn top_level_types(&self) -> impl Iterator<Item = &str> {
        self.declared_types
            .iter()
            .filter(|d| d.is_top_level())
            .map(|d| d.name.as_str())
    }

    pub fn qualify(&self, simple: &str) -> String {
        if self.package_name.is_empty() {
            simple.to_string()
        } else {
            format!("{}.{}", self.package_name, simple)
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOptions {
    /// Count annotation types as dependencies.
    pub include_annotations: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unparsable unit {0}: no type declaration found")]
    UnparsableUnit(String),
}

/// Contextual words that can sit where a type name would but never are one.
const NOT_TYPES: &[&str] = &[
    "var", "yield", "record", "sealed", "permits", "non", "when", "module", "open",
];

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "default",
    "strictfp",
    "transient",
    "volatile",
];

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

fn looks_like_class(s: &str) -> bool {
    starts_upper(s) && (s.chars().count() == 1 || s.chars().any(char::is_lowercase))
}

struct Parser<'a> {
    toks: &'a [Tok],
    opts: ParseOptions,
    package: String,
    imports: Vec<Import>,
    declared: Vec<DeclaredType>,
    refs: BTreeMap<String, BTreeSet<String>>,
    type_vars: BTreeSet<String>,
    depth: usize,
    /// (simple name, brace depth of its body)
    stack: Vec<(String, usize)>,
    pending: Option<String>,
    current_top: Option<String>,
    /// Names seen before the next top-level declaration (class annotations).
    preamble: Vec<String>,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Tok], opts: ParseOptions) -> Self {
        Parser {
            toks,
            opts,
            package: String::new(),
            imports: Vec::new(),
            declared: Vec::new(),
            refs: BTreeMap::new(),
            type_vars: BTreeSet::new(),
            depth: 0,
            stack: Vec::new(),
            pending: None,
            current_top: None,
            preamble: Vec::new(),
        }
    }

    fn tok(&self, i: usize) -> Option<&'a Tok> {
        self.toks.get(i)
    }

    fn record(&mut self, name: String) {
        let first = name.split('.').next().unwrap_or("");
        if name.is_empty() || NOT_TYPES.contains(&first) {
            return;
        }
        match &self.current_top {
            Some(top) => {
                self.refs.entry(top.clone()).or_default().insert(name);
            }
            None => self.preamble.push(name),
        }
    }

    /// `Ident ('.' Ident)*` starting at `i`; returns the name and the next index.
    fn qualified(&self, mut i: usize) -> Option<(String, usize)> {
        let mut name = self.tok(i)?.ident()?.to_string();
        i += 1;
        while self.tok(i).is_some_and(|t| t.is_punct('.')) {
            match self.tok(i + 1) {
                Some(Tok::Ident(next)) => {
                    name.push('.');
                    name.push_str(next);
                    i += 2;
                }
                _ => break,
            }
        }
        Some((name, i))
    }

    fn skip_annotation(&mut self, i: usize) -> usize {
        // `i` points at '@'
        let Some((name, mut j)) = self.qualified(i + 1) else {
            return i + 1;
        };
        if self.opts.include_annotations {
            self.record(name);
        }
        if self.tok(j).is_some_and(|t| t.is_punct('(')) {
            j = self.skip_balanced(j, '(', ')');
        }
        j
    }

    fn skip_balanced(&self, i: usize, open: char, close: char) -> usize {
        let mut depth = 0usize;
        let mut j = i;
        while let Some(t) = self.tok(j) {
            if t.is_punct(open) {
                depth += 1;
            } else if t.is_punct(close) {
                depth -= 1;
                if depth == 0 {
                    return j + 1;
                }
            }
            j += 1;
        }
        j
    }

    /// Tries to read `<...>` at `i` as generic arguments. On success returns
    /// the names found inside and the index after the closing `>`.
    fn generic_args(&self, i: usize) -> Option<(Vec<String>, usize)> {
        if !self.tok(i)?.is_punct('<') {
            return None;
        }
        let mut depth = 0usize;
        let mut names = Vec::new();
        let mut j = i;
        loop {
            let t = self.tok(j)?;
            match t {
                Tok::Punct('<') => depth += 1,
                Tok::Punct('>') => {
                    depth -= 1;
                    if depth == 0 {
                        return Some((names, j + 1));
                    }
                }
                Tok::Punct(',' | '?' | '&' | '[' | ']') => {}
                Tok::Keyword("extends" | "super") => {}
                Tok::Keyword(k) if PRIMITIVES.contains(k) => {}
                Tok::Punct('@') => {
                    let (_, next) = self.qualified(j + 1)?;
                    j = next;
                    continue;
                }
                Tok::Ident(_) => {
                    let (name, next) = self.qualified(j)?;
                    names.push(name);
                    j = next;
                    continue;
                }
                _ => return None,
            }
            j += 1;
        }
    }

    fn skip_dims(&self, mut i: usize) -> usize {
        while self.tok(i).is_some_and(|t| t.is_punct('[')) && self.tok(i + 1).is_some_and(|t| t.is_punct(']')) {
            i += 2;
        }
        i
    }

    /// Reads a type at `i` (annotations, qualified name, generic arguments,
    /// array dimensions), recording every name. Returns the next index.
    fn read_type(&mut self, mut i: usize) -> usize {
        while self.tok(i).is_some_and(|t| t.is_punct('@')) {
            i = self.skip_annotation(i);
        }
        if let Some(Tok::Keyword(k)) = self.tok(i) {
            if PRIMITIVES.contains(k) {
                return self.skip_dims(i + 1);
            }
        }
        let Some((name, mut j)) = self.qualified(i) else {
            return i;
        };
        self.record(name);
        if let Some((inner, next)) = self.generic_args(j) {
            inner.into_iter().for_each(|n| self.record(n));
            j = next;
        }
        self.skip_dims(j)
    }

    fn read_type_list(&mut self, mut i: usize, sep: char) -> usize {
        loop {
            let next = self.read_type(i);
            if next == i {
                return i;
            }
            i = next;
            if self.tok(i).is_some_and(|t| t.is_punct(sep)) {
                i += 1;
            } else {
                return i;
            }
        }
    }

    /// Type parameter list `<T extends A & B, U>`; names become type variables.
    fn type_params(&mut self, i: usize) -> usize {
        let mut depth = 0usize;
        let mut j = i;
        let mut expect_var = false;
        while let Some(t) = self.tok(j) {
            match t {
                Tok::Punct('<') => {
                    depth += 1;
                    expect_var = depth == 1;
                }
                Tok::Punct('>') => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        return j + 1;
                    }
                }
                Tok::Punct(',') => expect_var = depth == 1,
                Tok::Punct('@') => {
                    j = self.skip_annotation(j);
                    continue;
                }
                Tok::Ident(name) if expect_var => {
                    self.type_vars.insert(name.clone());
                    expect_var = false;
                }
                Tok::Ident(_) => {
                    if let Some((name, next)) = self.qualified(j) {
                        self.record(name);
                        j = next;
                        continue;
                    }
                }
                Tok::Punct(';' | '{' | '(' | ')') => return j,
                _ => {}
            }
            j += 1;
        }
        j
    }

    fn declare(&mut self, name: &str) {
        let top = match self.stack.first() {
            Some((top, _)) => top.clone(),
            None => {
                self.current_top = Some(name.to_string());
                let preamble = std::mem::take(&mut self.preamble);
                self.refs.entry(name.to_string()).or_default().extend(preamble);
                name.to_string()
            }
        };
        self.declared.push(DeclaredType {
            name: name.to_string(),
            top_level: top,
        });
        self.pending = Some(name.to_string());
    }

    fn at_member_start(&self, i: usize) -> bool {
        match i.checked_sub(1).and_then(|p| self.tok(p)) {
            None => true,
            Some(Tok::Punct('{' | '}' | ';')) => true,
            Some(Tok::Keyword(k)) => MODIFIERS.contains(k),
            Some(Tok::Punct(')')) => false,
            _ => false,
        }
    }

    fn is_operand_start(t: Option<&Tok>) -> bool {
        matches!(
            t,
            Some(Tok::Ident(_) | Tok::Literal | Tok::Punct('(' | '!' | '~'))
                | Some(Tok::Keyword("this" | "new" | "super" | "true" | "false" | "null"))
        )
    }

    /// `( Type ) operand` with a class-like type name.
    fn try_cast(&mut self, i: usize) -> Option<usize> {
        let (name, mut j) = self.qualified(i + 1)?;
        if let Some((_, next)) = self.generic_args(j) {
            j = next;
        }
        j = self.skip_dims(j);
        if !self.tok(j)?.is_punct(')') || !Self::is_operand_start(self.tok(j + 1)) {
            return None;
        }
        let last = name.rsplit('.').next().unwrap_or(&name);
        if !looks_like_class(last) {
            return None;
        }
        Some(self.read_type(i + 1))
    }

    fn run(&mut self) {
        let mut i = 0;
        while let Some(t) = self.tok(i) {
            let prev_is_dot = i > 0 && self.tok(i - 1).is_some_and(|p| p.is_punct('.'));
            match t {
                Tok::Keyword("package") if self.depth == 0 => {
                    if let Some((name, next)) = self.qualified(i + 1) {
                        self.package = name;
                        i = next;
                        continue;
                    }
                }
                Tok::Keyword("import") if self.depth == 0 => {
                    let is_static = self.tok(i + 1).is_some_and(|t| t.is_kw("static"));
                    let start = if is_static { i + 2 } else { i + 1 };
                    if let Some((name, mut next)) = self.qualified(start) {
                        let wildcard = self.tok(next).is_some_and(|t| t.is_punct('.'))
                            && self.tok(next + 1).is_some_and(|t| t.is_punct('*'));
                        if wildcard {
                            next += 2;
                        }
                        self.imports.push(Import {
                            name,
                            wildcard,
                            is_static,
                        });
                        i = next;
                        continue;
                    }
                }
                Tok::Punct('@') => {
                    if self.tok(i + 1).is_some_and(|t| t.is_kw("interface")) {
                        i += 1;
                        continue;
                    }
                    i = self.skip_annotation(i);
                    continue;
                }
                Tok::Keyword("class" | "interface" | "enum") if !prev_is_dot => {
                    if let Some(Tok::Ident(name)) = self.tok(i + 1) {
                        let name = name.clone();
                        self.declare(&name);
                        i += 2;
                        if self.tok(i).is_some_and(|t| t.is_punct('<')) {
                            i = self.type_params(i);
                        }
                        continue;
                    }
                }
                Tok::Ident(w) if w == "record" && !prev_is_dot => {
                    if let Some(Tok::Ident(name)) = self.tok(i + 1) {
                        if self.tok(i + 2).is_some_and(|t| t.is_punct('(') || t.is_punct('<')) {
                            let name = name.clone();
                            self.declare(&name);
                            i += 2;
                            if self.tok(i).is_some_and(|t| t.is_punct('<')) {
                                i = self.type_params(i);
                            }
                            continue;
                        }
                    }
                }
                Tok::Punct('{') => {
                    self.depth += 1;
                    if let Some(name) = self.pending.take() {
                        self.stack.push((name, self.depth));
                    }
                }
                Tok::Punct('}') => {
                    if self.stack.last().is_some_and(|(_, d)| *d == self.depth) {
                        self.stack.pop();
                        if self.stack.is_empty() {
                            self.current_top = None;
                        }
                    }
                    self.depth = self.depth.saturating_sub(1);
                }
                Tok::Keyword("extends" | "implements" | "throws") => {
                    i = self.read_type_list(i + 1, ',');
                    continue;
                }
                Tok::Ident(w) if w == "permits" && self.pending.is_some() => {
                    i = self.read_type_list(i + 1, ',');
                    continue;
                }
                Tok::Keyword("new") => {
                    i = self.read_type(i + 1);
                    continue;
                }
                Tok::Keyword("instanceof") => {
                    let mut j = i + 1;
                    if self.tok(j).is_some_and(|t| t.is_kw("final")) {
                        j += 1;
                    }
                    i = self.read_type(j);
                    continue;
                }
                Tok::Keyword("catch") if self.tok(i + 1).is_some_and(|t| t.is_punct('(')) => {
                    let mut j = i + 2;
                    while self.tok(j).is_some_and(|t| t.is_kw("final") || t.is_punct('@')) {
                        j = if self.tok(j).is_some_and(|t| t.is_punct('@')) {
                            self.skip_annotation(j)
                        } else {
                            j + 1
                        };
                    }
                    i = self.read_type_list(j, '|');
                    continue;
                }
                Tok::Punct('<') if self.at_member_start(i) => {
                    i = self.type_params(i);
                    continue;
                }
                Tok::Punct('(') => {
                    if let Some(next) = self.try_cast(i) {
                        i = next;
                        continue;
                    }
                }
                Tok::Ident(_) if !prev_is_dot => {
                    i = self.ident_run(i);
                    continue;
                }
                _ => {}
            }
            i += 1;
        }
    }

    /// Handles an identifier chain in body or header context.
    fn ident_run(&mut self, i: usize) -> usize {
        let (name, after_name) = self.qualified(i).expect("caller checked ident");
        let mut j = after_name;
        let generic = self.generic_args(j);
        if let Some((_, next)) = &generic {
            j = *next;
        }
        j = self.skip_dims(j);
        let follow = self.tok(j);
        let is_decl =
            matches!(follow, Some(Tok::Ident(_)) | Some(Tok::Ellipsis)) && !NOT_TYPES.contains(&name.as_str());
        if is_decl {
            return self.read_type(i);
        }
        // Class literal `Foo.class` or method reference `Foo::bar`.
        let class_literal = self.tok(after_name).is_some_and(|t| t.is_punct('.'))
            && self.tok(after_name + 1).is_some_and(|t| t.is_kw("class"));
        let method_ref = matches!(self.tok(j), Some(Tok::DoubleColon));
        if (class_literal || method_ref) && looks_like_class(name.rsplit('.').next().unwrap_or("")) {
            return self.read_type(i);
        }
        if class_literal || method_ref {
            self.record(name);
            return after_name;
        }
        // Qualified static reference: `Util.x`, `a.b.Util.x()`.
        let segments: Vec<&str> = name.split('.').collect();
        if segments.len() >= 2 && (starts_upper(segments[0]) || segments[1..].iter().any(|s| starts_upper(s))) {
            self.record(name);
        }
        after_name
    }

    fn finish(mut self, file: &str) -> Result<UnitFacts, ParseError> {
        if self.declared.is_empty() {
            return Err(ParseError::UnparsableUnit(file.to_string()));
        }
        for owner in self.imports.iter().filter_map(Import::static_owner) {
            let owner = owner.to_string();
            for top in self.declared.iter().filter(|d| d.is_top_level()) {
                self.refs.entry(top.name.clone()).or_default().insert(owner.clone());
            }
        }
        let vars = std::mem::take(&mut self.type_vars);
        for names in self.refs.values_mut() {
            names.retain(|n| !vars.contains(n.split('.').next().unwrap_or("")));
        }
        self.refs.retain(|_, v| !v.is_empty());
        Ok(UnitFacts {
            file: file.to_string(),
            package_name: self.package,
            imports: self.imports,
            declared_types: self.declared,
            references: self.refs,
        })
    }
}

/// Extracts package, imports, declared types and referenced type names.
pub fn parse_compilation_unit(text: &str, file: &str, opts: ParseOptions) -> Result<UnitFacts, ParseError> {
    let toks = tokenize(text);
    let mut p = Parser::new(&toks, opts);
    p.run();
    let facts = p.finish(file)?;
    check_package_path(&facts);
    Ok(facts)
}

fn check_package_path(facts: &UnitFacts) {
    let dir = facts.file.rsplit_once('/').map(|(d, _)| d).unwrap_or("");
    let expected = facts.package_name.replace('.', "/");
    if !expected.is_empty() && !(dir == expected || dir.ends_with(&format!("/{expected}"))) {
        tracing::warn!(file = %facts.file, package = %facts.package_name, "package does not match directory");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> UnitFacts {
        parse_compilation_unit(src, "T.java", ParseOptions::default()).unwrap()
    }

    fn refs(src: &str) -> Vec<String> {
        parse(src).referenced_names().into_iter().collect()
    }

    #[test]
    fn minimal_unit() {
        let f = parse("package a; class Foo {}");
        assert_eq!(f.package_name, "a");
        assert_eq!(f.top_level_types().collect::<Vec<_>>(), ["Foo"]);
        assert!(f.referenced_names().is_empty());
    }

    #[test]
    fn extends_and_field_types() {
        let f = parse("package a; import b.Bar; class Foo extends Bar { Baz f; }");
        assert_eq!(
            f.imports,
            vec![Import {
                name: "b.Bar".into(),
                wildcard: false,
                is_static: false
            }]
        );
        assert_eq!(
            refs("package a; import b.Bar; class Foo extends Bar { Baz f; }"),
            ["Bar", "Baz"]
        );
    }

    #[test]
    fn comment_only_unit_is_unparsable() {
        assert_eq!(
            parse_compilation_unit("// comment", "C.java", ParseOptions::default()),
            Err(ParseError::UnparsableUnit("C.java".into()))
        );
    }

    #[test]
    fn type_positions() {
        let src = r#"
            package p;
            import java.util.*;
            import static q.Util.helper;
            public class Foo<T extends Base> implements Api, Other<Param> {
                private final Map<Key, List<Value>> index = new HashMap<>();
                Ret method(Arg a, int n, Vararg... rest) throws Oops, Boom {
                    Local l = (Cast) a;
                    if (a instanceof Checked c) { }
                    try { } catch (Ex1 | Ex2 e) { }
                    Object o = Lit.class;
                    Runnable r = Ref::run;
                    Statics.call();
                    x.y.Qualified.go();
                    T t = null;
                    var v = new Created(1);
                    int[] arr = new int[3];
                    Elem[] elems;
                    return helper(n);
                }
            }
        "#;
        let got = refs(src);
        let expected = [
            "Api",
            "Arg",
            "Base",
            "Boom",
            "Cast",
            "Checked",
            "Created",
            "Elem",
            "Ex1",
            "Ex2",
            "HashMap",
            "Key",
            "List",
            "Lit",
            "Local",
            "Map",
            "Object",
            "Oops",
            "Other",
            "Param",
            "Ref",
            "Ret",
            "Runnable",
            "Statics.call",
            "Value",
            "Vararg",
            "q.Util",
            "x.y.Qualified.go",
        ];
        assert_eq!(got, expected);
    }

    #[test]
    fn strings_comments_and_annotations_do_not_count() {
        let src = r#"
            package p;
            @Entity(name = "Foo")
            class A {
                // Hidden h;
                /* Also a; */
                @Inject Service svc;
                String s = "Fake f;";
            }
        "#;
        assert_eq!(refs(src), ["Service", "String"]);
        let with = parse_compilation_unit(
            src,
            "A.java",
            ParseOptions {
                include_annotations: true,
            },
        )
        .unwrap();
        let names = with.referenced_names();
        assert!(names.contains("Entity") && names.contains("Inject"));
    }

    #[test]
    fn nested_types_attributed_to_top_level() {
        let src = "package p; class Outer { static class Inner { Dep d; } enum Mode { A } } class Second { Other o; }";
        let f = parse(src);
        let decl: Vec<_> = f
            .declared_types
            .iter()
            .map(|d| (d.name.as_str(), d.top_level.as_str()))
            .collect();
        assert_eq!(
            decl,
            [
                ("Outer", "Outer"),
                ("Inner", "Outer"),
                ("Mode", "Outer"),
                ("Second", "Second")
            ]
        );
        assert_eq!(f.references["Outer"].iter().collect::<Vec<_>>(), ["Dep"]);
        assert_eq!(f.references["Second"].iter().collect::<Vec<_>>(), ["Other"]);
    }

    #[test]
    fn comparisons_are_not_generics() {
        let src = "package p; class A { void f(int i, int n) { for (int k = 0; k < n; k++) { if (i > k) g(); } } }";
        assert!(refs(src).is_empty());
    }

    #[test]
    fn method_type_params_are_type_variables() {
        let src = "package p; class A { public static <E extends Comparable<E>> List<E> sort(Collection<? extends E> in) { return null; } }";
        assert_eq!(refs(src), ["Collection", "Comparable", "List"]);
    }

    #[test]
    fn records_interfaces_and_annotation_types() {
        let f = parse("package p; public record Point(Coord x, int y) implements Shape {} @interface Marker {} interface Api { Thing get(); }");
        let tops: Vec<_> = f.top_level_types().collect();
        assert_eq!(tops, ["Point", "Marker", "Api"]);
        assert_eq!(f.references["Point"].iter().collect::<Vec<_>>(), ["Coord", "Shape"]);
        assert_eq!(f.references["Api"].iter().collect::<Vec<_>>(), ["Thing"]);
    }

    #[test]
    fn contextual_keywords_are_not_types() {
        let src = "package p; class A { int f(int x) { var y = x; return switch (x) { default -> { yield y; } }; } }";
        assert!(refs(src).is_empty());
    }
}
