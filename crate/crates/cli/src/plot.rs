//! Self-contained SVG rendering for the four plot kinds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use bayesbench_core::stats;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    Trace,
    Density,
    Boxplot,
    Convergence,
}

impl PlotKind {
    /// Columns a CSV must contain for this kind; `truth` is optional for
    /// convergence plots.
    pub fn required_columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::Trace => &["iteration", "component", "value"],
            PlotKind::Density => &["group", "x", "density"],
            PlotKind::Boxplot => &["group", "value"],
            PlotKind::Convergence => &["iteration", "estimate"],
        }
    }
}

/// A polyline with a legend label.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac < 1.5 {
        1.0
    } else if frac < 3.0 {
        2.0
    } else if frac < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let step = nice_step(hi - lo, target);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn axes(&self, svg: &mut String, x_ticks: bool) {
        let _ = writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
            self.x0, self.y0, self.w, self.h
        );
        for t in ticks(self.yr.0, self.yr.1, 5) {
            let y = self.py(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"##,
                self.x0,
                self.x0 + self.w,
                self.x0 - 6.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        if x_ticks {
            for t in ticks(self.xr.0, self.xr.1, 6) {
                let x = self.px(t);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"##,
                    self.y0 + self.h,
                    self.y0 + self.h + 5.0,
                    self.y0 + self.h + 18.0,
                    fmt_tick(t)
                );
            }
        }
    }

    fn polyline(&self, svg: &mut String, pts: &[(f64, f64)], color: &str, dashed: bool) {
        let finite: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        if finite.is_empty() {
            return;
        }
        let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.4"{dash} points="{}"/>"#,
            finite.join(" ")
        );
    }
}

fn header(title: &str, height: f64) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    svg
}

fn labels(svg: &mut String, frame: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
        frame.x0 + frame.w / 2.0,
        frame.y0 + frame.h + 40.0,
        escape(xlabel)
    );
    let (cx, cy) = (18.0, frame.y0 + frame.h / 2.0);
    let _ = writeln!(
        svg,
        r#"<text x="{cx}" y="{cy:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {cx} {cy:.1})">{}</text>"#,
        escape(ylabel)
    );
}

/// Overlaid curves with a legend.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let frame = Frame {
        x0: LEFT,
        y0: TOP,
        w: WIDTH - LEFT - RIGHT,
        h: HEIGHT - TOP - BOTTOM,
        xr: padded_range(all().map(|p| p.0)),
        yr: padded_range(all().map(|p| p.1)),
    };
    let mut svg = header(title, HEIGHT);
    frame.axes(&mut svg, true);
    labels(&mut svg, &frame, xlabel, ylabel);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        frame.polyline(&mut svg, &s.points, color, s.dashed);
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 14.0;
        let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// One trace panel per component, stacked vertically.
pub fn stacked_traces(title: &str, panels: &[(String, Vec<(f64, f64)>)]) -> String {
    let panel_h = 90.0;
    let gap = 26.0;
    let height = TOP + BOTTOM + panels.len().max(1) as f64 * (panel_h + gap);
    let xr = padded_range(panels.iter().flat_map(|p| p.1.iter().map(|q| q.0)));
    let mut svg = header(title, height);
    if panels.is_empty() {
        let frame = Frame { x0: LEFT, y0: TOP, w: WIDTH - LEFT - 40.0, h: panel_h, xr, yr: (0.0, 1.0) };
        frame.axes(&mut svg, true);
    }
    for (k, (name, pts)) in panels.iter().enumerate() {
        let frame = Frame {
            x0: LEFT,
            y0: TOP + k as f64 * (panel_h + gap),
            w: WIDTH - LEFT - 40.0,
            h: panel_h,
            xr,
            yr: padded_range(pts.iter().map(|p| p.1)),
        };
        frame.axes(&mut svg, k + 1 == panels.len());
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            frame.x0 + 4.0,
            frame.y0 - 5.0,
            escape(name)
        );
        frame.polyline(&mut svg, pts, PALETTE[k % PALETTE.len()], false);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Box-and-whisker plot: quartile box, median bar, whiskers to the most
/// extreme points within 1.5 IQR, outliers as dots.
pub fn box_chart(title: &str, ylabel: &str, groups: &[(String, Vec<f64>)]) -> String {
    let frame = Frame {
        x0: LEFT,
        y0: TOP,
        w: WIDTH - LEFT - 40.0,
        h: HEIGHT - TOP - BOTTOM,
        xr: (0.0, groups.len().max(1) as f64),
        yr: padded_range(groups.iter().flat_map(|g| g.1.iter().copied())),
    };
    let mut svg = header(title, HEIGHT);
    frame.axes(&mut svg, false);
    labels(&mut svg, &frame, "", ylabel);
    for (k, (name, values)) in groups.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let cx = frame.px(k as f64 + 0.5);
        let _ = writeln!(
            svg,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
            frame.y0 + frame.h + 18.0,
            escape(name)
        );
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            continue;
        }
        v.sort_by(f64::total_cmp);
        let (q1, q2, q3) = (stats::quantile_sorted(&v, 0.25), stats::quantile_sorted(&v, 0.5), stats::quantile_sorted(&v, 0.75));
        let iqr = q3 - q1;
        let lo = v.iter().copied().find(|&x| x >= q1 - 1.5 * iqr).unwrap_or(q1);
        let hi = v.iter().rev().copied().find(|&x| x <= q3 + 1.5 * iqr).unwrap_or(q3);
        let half = 0.3 * frame.w / groups.len() as f64;
        let _ = writeln!(
            svg,
            r##"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="#333"/><line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="#333"/>"##,
            frame.py(hi),
            frame.py(q3),
            frame.py(q1),
            frame.py(lo)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{color}" fill-opacity="0.35" stroke="{color}"/><line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#111" stroke-width="2"/>"##,
            cx - half,
            frame.py(q3),
            2.0 * half,
            (frame.py(q1) - frame.py(q3)).max(0.5),
            cx - half,
            frame.py(q2),
            cx + half,
            frame.py(q2)
        );
        for &x in v.iter().filter(|&&x| x < lo || x > hi) {
            let _ = writeln!(svg, r#"<circle cx="{cx:.1}" cy="{:.1}" r="2" fill="{color}"/>"#, frame.py(x));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Running estimate against iteration, with the `truth` column (when
/// present) drawn as a dashed reference line.
pub fn convergence_chart(title: &str, estimate: &[(f64, f64)], truth: Option<&[(f64, f64)]>) -> String {
    let mut series = vec![Series::new("estimate", estimate.to_vec())];
    if let Some(t) = truth {
        series.push(Series::new("truth", t.to_vec()).dashed());
    }
    line_chart(title, "iteration", "estimate", &series)
}

struct Table {
    columns: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path, required: &[&str]) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if required.iter().any(|r| !columns.iter().any(|c| c == r)) {
            return Err(CliError::Schema {
                path: path.to_path_buf(),
                expected: required.iter().map(|s| s.to_string()).collect(),
                found: columns,
            });
        }
        let rows = rdr.records().collect::<std::result::Result<_, _>>()?;
        Ok(Self { columns, rows })
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn text(&self, name: &str) -> Vec<String> {
        let j = self.index(name).expect("column checked on read");
        self.rows.iter().map(|r| r[j].to_string()).collect()
    }

    fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.index(name).expect("column checked on read");
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r[j].trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Runtime(format!("row {}: column `{name}` holds `{}`, not a number", i + 1, &r[j])))
            })
            .collect()
    }
}

// Groups keyed in order of first appearance.
fn grouped<T>(keys: Vec<String>, values: Vec<T>) -> Vec<(String, Vec<T>)> {
    let mut order: Vec<(String, Vec<T>)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for (k, v) in keys.into_iter().zip(values) {
        let slot = *index.entry(k.clone()).or_insert_with(|| {
            order.push((k, Vec::new()));
            order.len() - 1
        });
        order[slot].1.push(v);
    }
    order
}

/// Renders `csv` as an SVG document of the given kind.
pub fn render_svg(csv: &Path, kind: PlotKind) -> Result<String> {
    let table = Table::read(csv, kind.required_columns())?;
    let title = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(match kind {
        PlotKind::Trace => {
            let pts: Vec<(f64, f64)> = table.numbers("iteration")?.into_iter().zip(table.numbers("value")?).collect();
            stacked_traces(&title, &grouped(table.text("component"), pts))
        }
        PlotKind::Density => {
            let pts: Vec<(f64, f64)> = table.numbers("x")?.into_iter().zip(table.numbers("density")?).collect();
            let series: Vec<Series> = grouped(table.text("group"), pts).into_iter().map(|(g, p)| Series::new(g, p)).collect();
            line_chart(&title, "x", "density", &series)
        }
        PlotKind::Boxplot => box_chart(&title, "value", &grouped(table.text("group"), table.numbers("value")?)),
        PlotKind::Convergence => {
            let it = table.numbers("iteration")?;
            let est: Vec<(f64, f64)> = it.iter().copied().zip(table.numbers("estimate")?).collect();
            let truth = match table.index("truth") {
                Some(_) => Some(it.iter().copied().zip(table.numbers("truth")?).collect::<Vec<_>>()),
                None => None,
            };
            convergence_chart(&title, &est, truth.as_deref())
        }
    })
}

/// Reads `csv`, renders it as `kind` and writes the SVG to `out`.
pub fn render_plot(csv: &Path, kind: PlotKind, out: &Path) -> Result<()> {
    let svg = render_svg(csv, kind)?;
    std::fs::write(out, svg).map_err(CliError::io(format!("writing {}", out.display())))
}
