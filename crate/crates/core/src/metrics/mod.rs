//! Coupling, instability and change metrics.
//!
//! All package- and class-level figures are exact rationals; they are only
//! turned into decimals when rendered (six fractional digits, half away from
//! zero). An element with no coupling at all has [`Instability::Undefined`]
//! and is left out of every aggregate.

mod activity;
mod csv_out;
mod exact;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::deps::{aggregate_packages, DependencyGraph, PackageGraph};
use crate::ingest::ReleaseRef;

pub use activity::{modified_file_ratio, WindowActivity};
pub use csv_out::{package_display_name, write_metrics_csv, METRICS_CSV_HEADER};
pub use exact::{render, to_f64};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("unknown package `{0}`")]
    UnknownPackage(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("change rate needs at least 2 releases, got {0}")]
    TooFewReleases(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Coupling {
    /// Afferent: dependencies entering the element from outside.
    pub ca: u64,
    /// Efferent: dependencies leaving the element.
    pub ce: u64,
}

/// `Ce / (Ca + Ce)`, or `Undefined` for an isolated element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instability {
    Defined(BigRational),
    Undefined,
}

impl Instability {
    pub fn value(&self) -> Option<&BigRational> {
        match self {
            Instability::Defined(v) => Some(v),
            Instability::Undefined => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Instability::Defined(_))
    }

    /// Six-decimal string, empty when undefined.
    pub fn render(&self) -> String {
        self.value().map(render).unwrap_or_default()
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.value().map(to_f64)
    }
}

impl Serialize for Instability {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_f64().serialize(s)
    }
}

pub fn instability(c: Coupling) -> Instability {
    let total = c.ca + c.ce;
    if total == 0 {
        Instability::Undefined
    } else {
        Instability::Defined(BigRational::new(BigInt::from(c.ce), BigInt::from(total)))
    }
}

/// Ca and Ce of a package, counted as class-edge multiplicities across its boundary.
pub fn package_coupling(pg: &PackageGraph, p: &str) -> Result<Coupling, MetricsError> {
    if !pg.packages.contains(p) {
        return Err(MetricsError::UnknownPackage(p.to_string()));
    }
    let mut c = Coupling::default();
    for ((from, to), &m) in &pg.edges {
        if to == p {
            c.ca += m as u64;
        }
        if from == p {
            c.ce += m as u64;
        }
    }
    Ok(c)
}

/// In- and out-degree of a class in the class graph.
pub fn class_coupling(graph: &DependencyGraph, class: &str) -> Result<Coupling, MetricsError> {
    if !graph.nodes.contains(class) {
        return Err(MetricsError::UnknownClass(class.to_string()));
    }
    let mut c = Coupling::default();
    for (from, to) in &graph.edges {
        c.ca += u64::from(to == class);
        c.ce += u64::from(from == class);
    }
    Ok(c)
}

/// Share of a package's distinct target packages that are strictly less
/// stable than the package itself. `None` when the package has no targets.
pub fn degree_unstable_dependency(
    pg: &PackageGraph,
    inst: &BTreeMap<String, Instability>,
) -> BTreeMap<String, Option<BigRational>> {
    let mut targets: BTreeMap<&str, Vec<&str>> = pg.packages.iter().map(|p| (p.as_str(), Vec::new())).collect();
    for (from, to) in pg.edges.keys() {
        targets.entry(from.as_str()).or_default().push(to.as_str());
    }
    targets
        .into_iter()
        .map(|(p, qs)| {
            let dud = (!qs.is_empty()).then(|| {
                let ip = inst.get(p).and_then(Instability::value);
                let bad = qs
                    .iter()
                    .filter(|q| match (ip, inst.get(**q).and_then(Instability::value)) {
                        (Some(ip), Some(iq)) => iq > ip,
                        _ => false,
                    })
                    .count();
                BigRational::new(BigInt::from(bad), BigInt::from(qs.len()))
            });
            (p.to_string(), dud)
        })
        .collect()
}

/// Aggregate instability over packages with defined values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SystemInstability {
    /// Weighted by class count.
    pub weighted: Option<BigRational>,
    pub unweighted: Option<BigRational>,
}

pub fn system_instability<'a>(items: impl IntoIterator<Item = (&'a Instability, usize)>) -> SystemInstability {
    let (mut wsum, mut wtotal) = (BigRational::zero(), BigInt::zero());
    let (mut usum, mut count) = (BigRational::zero(), 0usize);
    for (i, classes) in items {
        if let Instability::Defined(v) = i {
            wsum += v * BigRational::from_integer(BigInt::from(classes));
            wtotal += BigInt::from(classes);
            usum += v;
            count += 1;
        }
    }
    SystemInstability {
        weighted: (!wtotal.is_zero()).then(|| wsum / BigRational::from_integer(wtotal)),
        unweighted: (count > 0).then(|| usum / BigRational::from_integer(BigInt::from(count))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackageMetrics {
    pub coupling: Coupling,
    pub instability: Instability,
    pub dud: Option<BigRational>,
    pub class_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseMetrics {
    pub release: ReleaseRef,
    pub per_package: BTreeMap<String, PackageMetrics>,
    pub system: SystemInstability,
    pub class_instability: BTreeMap<String, Instability>,
}

pub fn compute_release_metrics(graph: &DependencyGraph) -> ReleaseMetrics {
    let pg = aggregate_packages(graph);
    let couplings: BTreeMap<String, Coupling> = pg
        .packages
        .iter()
        .map(|p| {
            (
                p.clone(),
                package_coupling(&pg, p).expect("package taken from the graph"),
            )
        })
        .collect();
    let inst: BTreeMap<String, Instability> = couplings.iter().map(|(p, c)| (p.clone(), instability(*c))).collect();
    let mut dud = degree_unstable_dependency(&pg, &inst);
    let per_package: BTreeMap<String, PackageMetrics> = couplings
        .into_iter()
        .map(|(p, coupling)| {
            let m = PackageMetrics {
                coupling,
                instability: inst[&p].clone(),
                dud: dud.remove(&p).flatten(),
                class_count: pg.class_count.get(&p).copied().unwrap_or(0),
            };
            (p, m)
        })
        .collect();
    let system = system_instability(per_package.values().map(|m| (&m.instability, m.class_count)));

    let mut class_coupling: BTreeMap<&str, Coupling> =
        graph.nodes.iter().map(|n| (n.as_str(), Coupling::default())).collect();
    for (from, to) in &graph.edges {
        class_coupling
            .get_mut(from.as_str())
            .expect("edge endpoint is a node")
            .ce += 1;
        class_coupling.get_mut(to.as_str()).expect("edge endpoint is a node").ca += 1;
    }
    let class_instability = class_coupling
        .into_iter()
        .map(|(c, k)| (c.to_string(), instability(k)))
        .collect();

    ReleaseMetrics {
        release: graph.release.clone(),
        per_package,
        system,
        class_instability,
    }
}

/// Fraction of consecutive release pairs in which the class's source file
/// changed. `versions[i]` maps each class of release `i` to its file digest;
/// appearing or disappearing counts as a change.
pub fn change_rate(class: &str, versions: &[BTreeMap<String, String>]) -> Result<BigRational, MetricsError> {
    if versions.len() < 2 {
        return Err(MetricsError::TooFewReleases(versions.len()));
    }
    if !versions.iter().any(|v| v.contains_key(class)) {
        return Err(MetricsError::UnknownClass(class.to_string()));
    }
    let changed = versions
        .windows(2)
        .filter(|w| w[0].get(class) != w[1].get(class))
        .count();
    Ok(BigRational::new(
        BigInt::from(changed),
        BigInt::from(versions.len() - 1),
    ))
}

fn serialize_opt_exact<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    v.as_ref().map(to_f64).serialize(s)
}

fn serialize_exact_map<S: Serializer>(m: &BTreeMap<String, BigRational>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k, to_f64(v))))
}

/// Structural and instability differences between two releases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReleaseDiff {
    pub from: String,
    pub to: String,
    pub packages_added: BTreeSet<String>,
    pub packages_removed: BTreeSet<String>,
    pub classes_added: BTreeSet<String>,
    pub classes_removed: BTreeSet<String>,
    /// Only packages with defined instability in both releases.
    #[serde(serialize_with = "serialize_exact_map")]
    pub instability_delta: BTreeMap<String, BigRational>,
    #[serde(serialize_with = "serialize_opt_exact")]
    pub system_delta: Option<BigRational>,
    #[serde(serialize_with = "serialize_opt_exact")]
    pub system_delta_unweighted: Option<BigRational>,
}

pub fn diff_releases(a: &ReleaseMetrics, b: &ReleaseMetrics) -> ReleaseDiff {
    fn minus(x: &BTreeSet<&String>, y: &BTreeSet<&String>) -> BTreeSet<String> {
        x.difference(y).map(|s| (*s).clone()).collect()
    }
    fn delta(x: &Option<BigRational>, y: &Option<BigRational>) -> Option<BigRational> {
        Some(y.as_ref()? - x.as_ref()?)
    }
    let pa: BTreeSet<&String> = a.per_package.keys().collect();
    let pb: BTreeSet<&String> = b.per_package.keys().collect();
    let ca: BTreeSet<&String> = a.class_instability.keys().collect();
    let cb: BTreeSet<&String> = b.class_instability.keys().collect();
    let instability_delta = a
        .per_package
        .iter()
        .filter_map(|(p, ma)| {
            let ia = ma.instability.value()?;
            let ib = b.per_package.get(p)?.instability.value()?;
            Some((p.clone(), ib - ia))
        })
        .collect();
    ReleaseDiff {
        from: a.release.label.clone(),
        to: b.release.label.clone(),
        packages_added: minus(&pb, &pa),
        packages_removed: minus(&pa, &pb),
        classes_added: minus(&cb, &ca),
        classes_removed: minus(&ca, &cb),
        instability_delta,
        system_delta: delta(&a.system.weighted, &b.system.weighted),
        system_delta_unweighted: delta(&a.system.unweighted, &b.system.unweighted),
    }
}
