//! Flat-file output: CSV tables with a fixed column order and small
//! self-contained SVG charts.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Floats are written with 17 significant digits so they read back exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn parse_f64(s: &str, col: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("column {col}: '{s}' is not a number")))
}

pub(crate) fn parse_int<T: std::str::FromStr>(s: &str, col: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("column {col}: '{s}' is not an integer")))
}

/// A row type with a fixed CSV layout.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];
    fn to_record(&self) -> Vec<String>;
    fn from_record(rec: &csv::StringRecord) -> Result<Self>;
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Writes `rows` under the type's header. Lines starting with `#` in
/// `comments` go before the header.
pub fn write_csv<T: CsvRecord>(rows: &[T], comments: &[String], out: impl Write) -> Result<()> {
    let mut out = out;
    for c in comments {
        writeln!(out, "# {c}").map_err(|e| Error::Internal(format!("csv sink: {e}")))?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(T::HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.to_record()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Internal(format!("csv sink: {e}")))
}

pub fn csv_string<T: CsvRecord>(rows: &[T], comments: &[String]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, comments, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
}

/// Writes the CSV file, creating parent directories as needed.
pub fn emit_csv<T: CsvRecord>(rows: &[T], comments: &[String], path: &Path) -> Result<()> {
    let text = csv_string(rows, comments)?;
    write_file(path, text.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads rows written by [`write_csv`], skipping `#` comment lines and
/// checking the header.
pub fn read_csv<T: CsvRecord>(input: impl Read) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(T::HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "csv header {:?} does not match {:?}",
            header.iter().collect::<Vec<_>>(),
            T::HEADER
        )));
    }
    r.records()
        .map(|rec| T::from_record(&rec.map_err(csv_err)?))
        .collect()
}

pub fn load_csv<T: CsvRecord>(path: &Path) -> Result<Vec<T>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesStyle {
    Line,
    Scatter,
    LineMarkers,
    Dashed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: SeriesStyle,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs()) * 0.1;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Renders the chart as a standalone SVG document.
pub fn render_svg(chart: &Chart) -> String {
    let tx = |x: f64| if chart.log_x { x.log10() } else { x };
    let pts = || {
        chart
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|p| !chart.log_x || p.0 > 0.0)
    };
    let (x0, x1) = range(pts().map(|p| tx(p.0)));
    let (y0, y1) = range(pts().map(|p| p.1));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&chart.title)
    );
    // axes and ticks
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT} {TOP} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = TOP + ph,
        r = LEFT + pw
    );
    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (LEFT + t * pw, TOP + ph - t * ph);
        let xl = if chart.log_x { format!("1e{xv:.1}") } else { format!("{xv:.3}") };
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{b2}" stroke="black"/><text x="{px:.2}" y="{ty}" text-anchor="middle">{xl}</text>"#,
            b = TOP + ph,
            b2 = TOP + ph + 5.0,
            ty = TOP + ph + 20.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{l2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{tl}" y="{py:.2}" text-anchor="end" dominant-baseline="middle">{yv:.4}</text>"#,
            l2 = LEFT - 5.0,
            tl = LEFT - 8.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 15.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{y}" text-anchor="middle" transform="rotate(-90 18 {y})">{}</text>"#,
        escape(&chart.y_label),
        y = TOP + ph / 2.0
    );

    for (k, ser) in chart.series.iter().enumerate() {
        let col = PALETTE[k % PALETTE.len()];
        let visible: Vec<(f64, f64)> = ser
            .points
            .iter()
            .copied()
            .filter(|p| p.0.is_finite() && p.1.is_finite() && (!chart.log_x || p.0 > 0.0))
            .map(|(x, y)| (sx(x), sy(y)))
            .collect();
        let line = matches!(ser.style, SeriesStyle::Line | SeriesStyle::LineMarkers | SeriesStyle::Dashed);
        let marks = matches!(ser.style, SeriesStyle::Scatter | SeriesStyle::LineMarkers);
        if line && visible.len() > 1 {
            let d: Vec<String> = visible.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let dash = if ser.style == SeriesStyle::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="1.5"{dash}/>"#,
                d.join(" ")
            );
        }
        if marks || visible.len() == 1 {
            for (x, y) in &visible {
                let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{col}"/>"#);
            }
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = W - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{col}" stroke-width="2"/><text x="{}" y="{ly}" dominant-baseline="middle">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(chart: &Chart, path: &Path) -> Result<()> {
    write_file(path, render_svg(chart).as_bytes())
}
