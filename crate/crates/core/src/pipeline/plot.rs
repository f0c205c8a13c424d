use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::artifacts::{write_bytes, PLOT_CSV, PLOT_SVG};
use super::PipelineError;
use crate::stats::Series;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 70.0;

type Getter = fn(&Row) -> Option<f64>;

struct Row<'a> {
    label: &'a str,
    instability: Option<f64>,
    ratio: Option<f64>,
}

fn union<'a>(instability: &'a Series, ratios: &'a Series) -> BTreeMap<i64, Row<'a>> {
    let mut rows: BTreeMap<i64, Row> = BTreeMap::new();
    for p in instability.points() {
        rows.insert(
            p.index,
            Row {
                label: &p.label,
                instability: p.value,
                ratio: None,
            },
        );
    }
    for p in ratios.points() {
        rows.entry(p.index)
            .or_insert(Row {
                label: &p.label,
                instability: None,
                ratio: None,
            })
            .ratio = p.value;
    }
    rows
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Writes `plot.csv` (index, label, instability, modified_ratio over the union
/// of indices) and a self-contained `plot.svg` line chart into `dest`.
pub fn emit_plot_data(instability: &Series, ratios: &Series, dest: &Path) -> Result<(), PipelineError> {
    if instability.is_empty() || ratios.is_empty() {
        return Err(PipelineError::EmptySeries);
    }
    let rows = union(instability, ratios);

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_path = dest.join(PLOT_CSV);
    let e = |err| PipelineError::artifact(&csv_path, err);
    w.write_record(["index", "label", "instability", "modified_ratio"])
        .map_err(e)?;
    for (idx, r) in &rows {
        w.write_record([idx.to_string(), r.label.to_string(), cell(r.instability), cell(r.ratio)])
            .map_err(e)?;
    }
    write_bytes(
        &csv_path,
        &w.into_inner().map_err(|err| PipelineError::artifact(&csv_path, err))?,
    )?;

    write_bytes(&dest.join(PLOT_SVG), render_svg(&rows).as_bytes())
}

fn render_svg(rows: &BTreeMap<i64, Row>) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let values = rows.values().flat_map(|r| [r.instability, r.ratio]).flatten();
    let y_max = values.fold(1.0f64, f64::max);
    let y_min = rows
        .values()
        .flat_map(|r| [r.instability, r.ratio])
        .flatten()
        .fold(0.0f64, f64::min);
    let n = rows.len();
    let x = |i: usize| {
        if n == 1 {
            LEFT + plot_w / 2.0
        } else {
            LEFT + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let y = |v: f64| TOP + plot_h * (y_max - v) / (y_max - y_min);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    for k in 0..=4 {
        let v = y_min + (y_max - y_min) * k as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            yy + 4.0
        );
    }
    for (i, r) in rows.values().enumerate() {
        let xx = x(i);
        let yy = TOP + plot_h + 14.0;
        let _ = writeln!(
            s,
            r#"<text x="{xx:.2}" y="{yy:.2}" text-anchor="end" transform="rotate(-40 {xx:.2} {yy:.2})">{}</text>"#,
            xml_escape(r.label)
        );
    }
    let series: [(&str, &str, Getter); 2] = [
        ("Instability", "#1f77b4", |r| r.instability),
        ("Modified-file ratio", "#d62728", |r| r.ratio),
    ];
    for (k, (name, color, get)) in series.iter().enumerate() {
        // Undefined points break the line into segments.
        let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for (i, r) in rows.values().enumerate() {
            match get(r) {
                Some(v) => segments.last_mut().expect("non-empty").push((x(i), y(v))),
                None if !segments.last().expect("non-empty").is_empty() => segments.push(Vec::new()),
                None => {}
            }
        }
        let _ = writeln!(s, r#"<g stroke="{color}" fill="{color}">"#);
        for seg in segments.iter().filter(|seg| !seg.is_empty()) {
            let pts: Vec<String> = seg.iter().map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke-width="2"/>"#,
                pts.join(" ")
            );
            for (a, b) in seg {
                let _ = writeln!(s, r#"<circle cx="{a:.2}" cy="{b:.2}" r="3"/>"#);
            }
        }
        let _ = writeln!(s, "</g>");
        let ly = TOP + 20.0 * k as f64;
        let lx = WIDTH - RIGHT + 20.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Point;

    fn series(name: &str, pts: &[(i64, f64)]) -> Series {
        Series::new(
            name,
            pts.iter()
                .map(|(i, v)| Point {
                    index: *i,
                    label: format!("r{i}"),
                    value: Some(*v),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn five_points_give_five_rows() {
        let dir = tempfile::tempdir().unwrap();
        let pts: Vec<(i64, f64)> = (0..5).map(|i| (i, i as f64 / 10.0)).collect();
        emit_plot_data(&series("i", &pts), &series("r", &pts), dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join(PLOT_CSV)).unwrap();
        assert_eq!(csv.lines().count(), 6);
        assert_eq!(csv.lines().nth(1), Some("0,r0,0.000000,0.000000"));
    }

    #[test]
    fn disjoint_indices_leave_empty_cells() {
        let dir = tempfile::tempdir().unwrap();
        emit_plot_data(
            &series("i", &[(0, 0.5), (2, 0.6)]),
            &series("r", &[(1, 0.1)]),
            dir.path(),
        )
        .unwrap();
        let csv = std::fs::read_to_string(dir.path().join(PLOT_CSV)).unwrap();
        assert_eq!(
            csv,
            "index,label,instability,modified_ratio\n0,r0,0.500000,\n1,r1,,0.100000\n2,r2,0.600000,\n"
        );
    }

    #[test]
    fn svg_is_deterministic() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let i = series("i", &[(0, 0.2), (1, 0.4), (2, 0.3)]);
        let r = series("r", &[(0, 0.1), (1, 0.9), (2, 0.05)]);
        emit_plot_data(&i, &r, a.path()).unwrap();
        emit_plot_data(&i, &r, b.path()).unwrap();
        let sa = std::fs::read(a.path().join(PLOT_SVG)).unwrap();
        assert_eq!(sa, std::fs::read(b.path().join(PLOT_SVG)).unwrap());
        let text = String::from_utf8(sa).unwrap();
        assert!(text.starts_with("<svg") && text.ends_with("</svg>\n"));
        assert!(text.contains("Instability") && text.contains("Modified-file ratio"));
    }

    #[test]
    fn empty_series_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let empty = Series::new("e", vec![]).unwrap();
        assert!(matches!(
            emit_plot_data(&empty, &series("r", &[(0, 0.1)]), dir.path()),
            Err(PipelineError::EmptySeries)
        ));
    }
}
