use std::io::Write;

use super::{render, ReleaseMetrics};

pub const METRICS_CSV_HEADER: &str = "package,ca,ce,instability,dud,class_count";

/// The default package has no name; it is written as `<default>`.
pub fn package_display_name(p: &str) -> &str {
    if p.is_empty() {
        "<default>"
    } else {
        p
    }
}

/// One row per package, then `<system>` (class-weighted mean) and
/// `<system-unweighted>`. Undefined values are empty cells.
pub fn write_metrics_csv<W: Write>(rm: &ReleaseMetrics, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(METRICS_CSV_HEADER.split(','))?;
    for (p, m) in &rm.per_package {
        w.write_record([
            package_display_name(p).to_string(),
            m.coupling.ca.to_string(),
            m.coupling.ce.to_string(),
            m.instability.render(),
            m.dud.as_ref().map(render).unwrap_or_default(),
            m.class_count.to_string(),
        ])?;
    }
    let classes: usize = rm.per_package.values().map(|m| m.class_count).sum();
    for (name, v) in [
        ("<system>", &rm.system.weighted),
        ("<system-unweighted>", &rm.system.unweighted),
    ] {
        w.write_record([
            name.to_string(),
            String::new(),
            String::new(),
            v.as_ref().map(render).unwrap_or_default(),
            String::new(),
            classes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
