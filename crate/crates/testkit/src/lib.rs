//! Deterministic git fixture repositories.
//!
//! Repositories are produced by streaming a `git fast-import` script, so the
//! same builder calls always yield the same commit hashes. Tests rely on this
//! for byte-exact golden comparisons.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

pub const DAY: i64 = 86_400;

/// 2010-01-04T00:00:00Z, a Monday.
pub const EPOCH_2010: i64 = 1_262_563_200;

#[derive(Debug, Clone)]
enum Op {
    Write(String, String),
    Delete(String),
}

#[derive(Debug, Clone)]
struct PendingCommit {
    author_name: String,
    author_email: String,
    timestamp: i64,
    message: String,
    ops: Vec<Op>,
    /// Mark of a side-branch commit merged in (second parent).
    merge_from: Option<usize>,
    branch: String,
}

/// Accumulates commits and tags, then materialises them with `git fast-import`.
#[derive(Debug, Default)]
pub struct RepoBuilder {
    commits: Vec<PendingCommit>,
    tags: Vec<(String, usize)>,
}

impl RepoBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a commit on `main` and returns its index (usable with [`tag`](Self::tag)).
    pub fn commit(&mut self, author: &str, email: &str, timestamp: i64, message: &str) -> CommitBuilder<'_> {
        self.commits.push(PendingCommit {
            author_name: author.to_string(),
            author_email: email.to_string(),
            timestamp,
            message: message.to_string(),
            ops: Vec::new(),
            merge_from: None,
            branch: "main".to_string(),
        });
        let idx = self.commits.len() - 1;
        CommitBuilder { builder: self, idx }
    }

    pub fn last_index(&self) -> usize {
        self.commits.len() - 1
    }

    pub fn tag(&mut self, name: &str, commit_index: usize) -> &mut Self {
        self.tags.push((name.to_string(), commit_index));
        self
    }

    /// Renders the fast-import stream.
    pub fn stream(&self) -> String {
        let mut out = String::new();
        let mut heads: BTreeMap<String, usize> = BTreeMap::new();
        for (i, c) in self.commits.iter().enumerate() {
            let mark = i + 1;
            let branch = &c.branch;
            writeln!(out, "commit refs/heads/{branch}").unwrap();
            writeln!(out, "mark :{mark}").unwrap();
            writeln!(
                out,
                "author {} <{}> {} +0000",
                c.author_name, c.author_email, c.timestamp
            )
            .unwrap();
            writeln!(
                out,
                "committer {} <{}> {} +0000",
                c.author_name, c.author_email, c.timestamp
            )
            .unwrap();
            writeln!(out, "data {}\n{}", c.message.len(), c.message).unwrap();
            if let Some(parent) = heads.get(branch) {
                writeln!(out, "from :{parent}").unwrap();
            } else if branch != "main" {
                if let Some(parent) = heads.get("main") {
                    writeln!(out, "from :{parent}").unwrap();
                }
            }
            if let Some(side) = c.merge_from {
                writeln!(out, "merge :{}", side + 1).unwrap();
            }
            for op in &c.ops {
                match op {
                    Op::Write(path, content) => {
                        writeln!(out, "M 100644 inline {path}").unwrap();
                        writeln!(out, "data {}\n{}", content.len(), content).unwrap();
                    }
                    Op::Delete(path) => writeln!(out, "D {path}").unwrap(),
                }
            }
            out.push('\n');
            heads.insert(branch.clone(), mark);
        }
        for (name, idx) in &self.tags {
            writeln!(out, "reset refs/tags/{name}").unwrap();
            writeln!(out, "from :{}\n", idx + 1).unwrap();
        }
        out
    }

    /// Creates a repository at `dir` (which must not contain one yet).
    pub fn build(&self, dir: &Path) -> PathBuf {
        std::fs::create_dir_all(dir).expect("create fixture dir");
        git(dir, &["init", "-q"]);
        git(dir, &["symbolic-ref", "HEAD", "refs/heads/main"]);
        if !self.commits.is_empty() {
            let mut child = Command::new("git")
                .args(["fast-import", "--quiet"])
                .current_dir(dir)
                .stdin(Stdio::piped())
                .spawn()
                .expect("spawn git fast-import");
            child
                .stdin
                .take()
                .unwrap()
                .write_all(self.stream().as_bytes())
                .expect("write fast-import stream");
            let status = child.wait().expect("wait fast-import");
            assert!(status.success(), "git fast-import failed");
        }
        dir.to_path_buf()
    }
}

pub struct CommitBuilder<'a> {
    builder: &'a mut RepoBuilder,
    idx: usize,
}

impl CommitBuilder<'_> {
    pub fn write(self, path: &str, content: &str) -> Self {
        self.builder.commits[self.idx]
            .ops
            .push(Op::Write(path.to_string(), content.to_string()));
        self
    }

    pub fn delete(self, path: &str) -> Self {
        self.builder.commits[self.idx].ops.push(Op::Delete(path.to_string()));
        self
    }

    /// Places this commit on a side branch instead of `main`.
    pub fn on_branch(self, branch: &str) -> Self {
        self.builder.commits[self.idx].branch = branch.to_string();
        self
    }

    /// Makes this commit a merge whose second parent is commit `other`.
    pub fn merging(self, other: usize) -> Self {
        self.builder.commits[self.idx].merge_from = Some(other);
        self
    }

    pub fn index(&self) -> usize {
        self.idx
    }
}

fn git(dir: &Path, args: &[&str]) {
    let status = Command::new("git")
        .args(args)
        .current_dir(dir)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .status()
        .expect("run git");
    assert!(status.success(), "git {args:?} failed");
}

/// Three commits touching `A.java`, `B.java` and `notes.txt`.
pub fn three_commit_repo(dir: &Path) -> PathBuf {
    let mut b = RepoBuilder::new();
    b.commit("Ann", "ann@example.org", EPOCH_2010, "add A")
        .write("src/A.java", "class A {}\n")
        .write("notes.txt", "hello\n");
    b.commit("Bob", "bob@example.org", EPOCH_2010 + DAY, "add B")
        .write("src/B.java", "class B { A a; }\n");
    b.commit("Ann", "ann@example.org", EPOCH_2010 + 2 * DAY, "touch notes and A")
        .write("src/A.java", "class A { B b; }\n")
        .write("notes.txt", "hello again\n");
    b.build(dir)
}

/// The evolving multi-release project used for end-to-end runs.
///
/// Five months with two or three authors, then a burst of 64 distinct authors
/// over eight weeks, then a tail of moderate activity. Eight `vX.Y` tags.
pub fn evolving_project(dir: &Path) -> PathBuf {
    evolving_project_builder(true).build(dir)
}

/// Same shape as [`evolving_project`] but the community never grows.
pub fn cathedral_only_project(dir: &Path) -> PathBuf {
    evolving_project_builder(false).build(dir)
}

fn java(pkg: &str, imports: &[&str], decl: &str) -> String {
    let mut s = format!("package {pkg};\n\n");
    for i in imports {
        s.push_str(&format!("import {i};\n"));
    }
    if !imports.is_empty() {
        s.push('\n');
    }
    s.push_str(decl);
    s.push('\n');
    s
}

fn evolving_project_builder(with_bazaar: bool) -> RepoBuilder {
    let mut b = RepoBuilder::new();
    let core = ("Core Dev", "core@proj.org");
    let second = ("Second Dev", "second@proj.org");
    let mut t = EPOCH_2010;

    // Release 1: model + util
    b.commit(core.0, core.1, t, "Initial import")
        .write("README.md", "# proj\n")
        .write(
            "src/main/java/org/proj/model/Item.java",
            &java(
                "org.proj.model",
                &[],
                "public class Item {\n    private String name;\n}",
            ),
        )
        .write(
            "src/main/java/org/proj/util/Strings.java",
            &java(
                "org.proj.util",
                &[],
                "public final class Strings {\n    public static String trim(String s) { return s.trim(); }\n}",
            ),
        );
    t += 5 * DAY;
    b.commit(core.0, core.1, t, "Add repository interface").write(
        "src/main/java/org/proj/model/Repository.java",
        &java(
            "org.proj.model",
            &["java.util.List"],
            "public interface Repository {\n    List<Item> all();\n}",
        ),
    );
    let r1 = b.last_index();
    b.tag("v0.1", r1);

    t += 9 * DAY;
    b.commit(second.0, second.1, t, "Implement in-memory store")
        .write("src/main/java/org/proj/store/MemoryStore.java",
            &java("org.proj.store", &["java.util.ArrayList", "java.util.List", "org.proj.model.Item", "org.proj.model.Repository"],
                "public class MemoryStore implements Repository {\n    private final List<Item> items = new ArrayList<>();\n    public List<Item> all() { return items; }\n}"));
    t += 12 * DAY;
    b.commit(core.0, core.1, t, "fix trimming bug in Strings")
        .write("src/main/java/org/proj/util/Strings.java",
            &java("org.proj.util", &[], "public final class Strings {\n    public static String trim(String s) { return s == null ? \"\" : s.trim(); }\n}"));
    let r2 = b.last_index();
    b.tag("v0.2", r2);

    t += 20 * DAY;
    b.commit(second.0, second.1, t, "Add service layer")
        .write("src/main/java/org/proj/service/ItemService.java",
            &java("org.proj.service", &["org.proj.model.*", "org.proj.util.Strings"],
                "public class ItemService {\n    private final Repository repo;\n    public ItemService(Repository repo) { this.repo = repo; }\n    public Item find(String n) { Strings.trim(n); return null; }\n}"));
    t += 15 * DAY;
    b.commit(core.0, core.1, t, "refactor store naming")
        .write("src/main/java/org/proj/store/MemoryStore.java",
            &java("org.proj.store", &["java.util.ArrayList", "java.util.List", "org.proj.model.Item", "org.proj.model.Repository"],
                "public class MemoryStore implements Repository {\n    private final List<Item> entries = new ArrayList<>();\n    public List<Item> all() { return entries; }\n}"));
    let r3 = b.last_index();
    b.tag("v0.3", r3);

    // Quiet months with a third occasional contributor.
    for k in 0..6 {
        t += 14 * DAY;
        let (n, e) = if k % 3 == 2 {
            ("Third Dev", "third@proj.org")
        } else {
            core
        };
        b.commit(n, e, t, &format!("Update docs part {k}"))
            .write("README.md", &format!("# proj\n\nrevision {k}\n"));
    }
    t += 7 * DAY;
    b.commit(core.0, core.1, t, "Add web controller support")
        .write("src/main/java/org/proj/web/ItemController.java",
            &java("org.proj.web", &["org.proj.service.ItemService", "org.proj.model.Item"],
                "public class ItemController {\n    private ItemService service;\n    public Item get(String id) { return service.find(id); }\n}"));
    let r4 = b.last_index();
    b.tag("v0.4", r4);

    // Community burst (or a continued small team).
    let burst_authors: usize = if with_bazaar { 64 } else { 3 };
    let burst_start = t + 10 * DAY;
    let mut tagged5 = false;
    let mut tagged6 = false;
    for i in 0..140usize {
        let ts = burst_start + (i as i64) * (56 * DAY / 140);
        let a = i % burst_authors;
        let name = format!("Contributor {a:02}");
        let email = format!("contrib{a:02}@community.net");
        let cb = match i % 6 {
            0 => {
                let cls = format!("Feature{i:02}");
                b.commit(&name, &email, ts, &format!("Add feature {cls}"))
                    .write(&format!("src/main/java/org/proj/ext/{cls}.java"),
                        &java("org.proj.ext", &["org.proj.service.ItemService", "org.proj.model.Item"],
                            &format!("public class {cls} {{\n    ItemService svc;\n    Item apply(Item in) {{ return in; }}\n}}")))
            }
            1 => b.commit(&name, &email, ts, &format!("Fix NPE in store #{i}"))
                .write("src/main/java/org/proj/store/MemoryStore.java",
                    &java("org.proj.store", &["java.util.ArrayList", "java.util.List", "org.proj.model.Item", "org.proj.model.Repository", "org.proj.util.Strings"],
                        &format!("public class MemoryStore implements Repository {{\n    private final List<Item> entries = new ArrayList<>();\n    public List<Item> all() {{ return entries; }}\n    int rev() {{ return {i}; }}\n    String n(String s) {{ return Strings.trim(s); }}\n}}"))),
            2 => b.commit(&name, &email, ts, &format!("Update web controller {i}"))
                .write("src/main/java/org/proj/web/ItemController.java",
                    &java("org.proj.web", &["org.proj.service.ItemService", "org.proj.model.Item", "org.proj.util.Strings"],
                        &format!("public class ItemController {{\n    private ItemService service;\n    public Item get(String id) {{ return service.find(Strings.trim(id)); }}\n    int rev() {{ return {i}; }}\n}}"))),
            3 => b.commit(&name, &email, ts, &format!("Cleanup service {i}"))
                .write("src/main/java/org/proj/service/ItemService.java",
                    &java("org.proj.service", &["org.proj.model.*", "org.proj.util.Strings", "org.proj.store.MemoryStore"],
                        &format!("public class ItemService {{\n    private final Repository repo;\n    public ItemService(Repository repo) {{ this.repo = repo; }}\n    public static ItemService inMemory() {{ return new ItemService(new MemoryStore()); }}\n    public Item find(String n) {{ Strings.trim(n); return null; }}\n    int rev() {{ return {i}; }}\n}}"))),
            4 => b.commit(&name, &email, ts, &format!("Tweak model {i}"))
                .write("src/main/java/org/proj/model/Item.java",
                    &java("org.proj.model", &[], &format!("public class Item {{\n    private String name;\n    private int rev = {i};\n}}"))),
            _ => b.commit(&name, &email, ts, &format!("Discuss roadmap {i}"))
                .write("docs/roadmap.md", &format!("step {i}\n")),
        };
        let idx = cb.index();
        if i == 60 && !tagged5 {
            b.tag("v0.5", idx);
            tagged5 = true;
        }
        if i == 120 && !tagged6 {
            b.tag("v0.6", idx);
            tagged6 = true;
        }
    }
    t = burst_start + 60 * DAY;

    // Tail: the ext package is restructured and an api package appears.
    b.commit(core.0, core.1, t, "Introduce api package")
        .write(
            "src/main/java/org/proj/api/Plugin.java",
            &java(
                "org.proj.api",
                &["org.proj.model.Item"],
                "public interface Plugin {\n    Item apply(Item in);\n}",
            ),
        )
        .write(
            "src/main/java/org/proj/ext/Feature00.java",
            &java(
                "org.proj.ext",
                &["org.proj.api.Plugin", "org.proj.model.Item"],
                "public class Feature00 implements Plugin {\n    public Item apply(Item in) { return in; }\n}",
            ),
        );
    t += 20 * DAY;
    b.commit(second.0, second.1, t, "Remove util package")
        .delete("src/main/java/org/proj/util/Strings.java")
        .write("src/main/java/org/proj/service/ItemService.java",
            &java("org.proj.service", &["org.proj.model.*", "org.proj.store.MemoryStore"],
                "public class ItemService {\n    private final Repository repo;\n    public ItemService(Repository repo) { this.repo = repo; }\n    public static ItemService inMemory() { return new ItemService(new MemoryStore()); }\n    public Item find(String n) { return null; }\n}"))
        .write("src/main/java/org/proj/store/MemoryStore.java",
            &java("org.proj.store", &["java.util.ArrayList", "java.util.List", "org.proj.model.Item", "org.proj.model.Repository"],
                "public class MemoryStore implements Repository {\n    private final List<Item> entries = new ArrayList<>();\n    public List<Item> all() { return entries; }\n}"))
        .write("src/main/java/org/proj/web/ItemController.java",
            &java("org.proj.web", &["org.proj.service.ItemService", "org.proj.model.Item"],
                "public class ItemController {\n    private ItemService service;\n    public Item get(String id) { return service.find(id); }\n}"));
    let r7 = b.last_index();
    b.tag("v0.7", r7);
    t += 30 * DAY;
    b.commit(core.0, core.1, t, "Add plugin registry feature").write(
        "src/main/java/org/proj/api/Registry.java",
        &java(
            "org.proj.api",
            &["java.util.List", "org.proj.ext.Feature00"],
            "public class Registry {\n    List<Plugin> plugins;\n    Plugin first() { return new Feature00(); }\n}",
        ),
    );
    let r8 = b.last_index();
    b.tag("v0.8", r8);
    b
}
