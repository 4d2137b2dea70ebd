//! SVG and CSV emitters. Output depends only on the inputs, so identical
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::io::Write;

use ndarray::Array2;

use super::{LabelOverlay, PcaProjection, UMatrix};
use crate::datasets::csv_io;
use crate::error::Result;
use crate::trainer::TrainTrace;

const CELL: f64 = 28.0;
const MARGIN: f64 = 20.0;

/// Blue (low) to yellow (high).
const RAMP: [(f64, f64, f64); 5] = [
    (33.0, 49.0, 140.0),
    (33.0, 113.0, 181.0),
    (65.0, 182.0, 196.0),
    (161.0, 218.0, 180.0),
    (255.0, 237.0, 0.0),
];

/// Colour for `t` in `[0, 1]`; values outside are clamped.
pub fn ramp_color(t: f64) -> String {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let pos = t * (RAMP.len() - 1) as f64;
    let i = (pos.floor() as usize).min(RAMP.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// U-matrix heatmap with one cell per node (row `y` drawn top to bottom) and
/// optional labels. Landmark placements get a yellow tag; nodes holding
/// several labels get a dot.
pub fn umatrix_svg(u: &UMatrix, overlay: Option<&LabelOverlay>) -> String {
    let (kx, ky) = (u.kx(), u.ky());
    let width = 2.0 * MARGIN + kx as f64 * CELL;
    let height = 2.0 * MARGIN + ky as f64 * CELL;
    let (lo, hi) = u.min_max();
    let span = hi - lo;
    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    svg.push('\n');
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for y in 0..ky {
        for x in 0..kx {
            let v = u.at(x, y);
            let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
            let _ = writeln!(
                svg,
                r#"<rect x="{:.1}" y="{:.1}" width="{CELL:.1}" height="{CELL:.1}" fill="{}" data-node="{}"><title>node {} u={}</title></rect>"#,
                MARGIN + x as f64 * CELL,
                MARGIN + y as f64 * CELL,
                ramp_color(t),
                y * kx + x,
                y * kx + x,
                v
            );
        }
    }
    if let Some(overlay) = overlay {
        for p in &overlay.placements {
            let (x, y) = (p.node % kx, p.node / kx);
            let cx = MARGIN + (x as f64 + 0.5) * CELL;
            let cy = MARGIN + (y as f64 + 0.5) * CELL;
            if p.is_multi() {
                let _ = writeln!(svg, r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="2.5" fill="black"/>"#);
            }
            let label = escape(&p.names.join(", "));
            if p.is_landmark {
                let w = 6.0 * label.chars().count() as f64 + 6.0;
                let _ = writeln!(
                    svg,
                    r#"<rect x="{:.1}" y="{:.1}" width="{w:.1}" height="12" rx="2" fill="yellow" stroke="black" stroke-width="0.5"/>"#,
                    cx - w / 2.0,
                    cy - 14.0
                );
                let _ = writeln!(
                    svg,
                    r#"<text x="{cx:.1}" y="{:.1}" font-family="sans-serif" font-size="10" font-weight="bold" text-anchor="middle" fill="black">{label}</text>"#,
                    cy - 5.0
                );
            } else {
                let _ = writeln!(
                    svg,
                    r#"<text x="{cx:.1}" y="{:.1}" font-family="sans-serif" font-size="9" text-anchor="middle" fill="white" stroke="black" stroke-width="0.2">{label}</text>"#,
                    cy - 4.0
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>, size: f64) -> Frame {
        let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            xl = xl.min(x);
            xh = xh.max(x);
            yl = yl.min(y);
            yh = yh.max(y);
        }
        let sx = if xh > xl { (size - 2.0 * MARGIN) / (xh - xl) } else { 1.0 };
        let sy = if yh > yl { (size - 2.0 * MARGIN) / (yh - yl) } else { 1.0 };
        Frame {
            x0: if xl.is_finite() { xl } else { 0.0 },
            y0: if yh.is_finite() { yh } else { 0.0 },
            sx,
            sy,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (MARGIN + (x - self.x0) * self.sx, MARGIN + (self.y0 - y) * self.sy)
    }
}

/// Data points (blue), codebook mesh (red), and landmark labels (yellow) on
/// the first two principal axes.
pub fn mesh_svg(
    projection: &PcaProjection,
    edges: &[(usize, usize)],
    landmarks: &[(String, [f64; 3])],
) -> String {
    let size = 640.0;
    let pts = projection
        .data
        .outer_iter()
        .chain(projection.codebook.outer_iter())
        .map(|r| (r[0], r[1]))
        .chain(landmarks.iter().map(|(_, p)| (p[0], p[1])))
        .collect::<Vec<_>>();
    let frame = Frame::fit(pts.into_iter(), size);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for r in projection.data.outer_iter() {
        let (x, y) = frame.map(r[0], r[1]);
        let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="blue"/>"#);
    }
    let cb = &projection.codebook;
    for &(a, b) in edges {
        let (x1, y1) = frame.map(cb[[a, 0]], cb[[a, 1]]);
        let (x2, y2) = frame.map(cb[[b, 0]], cb[[b, 1]]);
        let _ = writeln!(
            svg,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="red" stroke-width="0.8"/>"#
        );
    }
    for (name, p) in landmarks {
        let (x, y) = frame.map(p[0], p[1]);
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="yellow" stroke="black" stroke-width="0.8"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" font-weight="bold" fill="black" stroke="yellow" stroke-width="0.4">{}</text>"#,
            x + 6.0,
            y - 6.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

const SERIES_COLORS: [&str; 7] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];

/// Line chart of metric curves over checkpoint steps.
pub fn curves_svg(title: &str, steps: &[usize], series: &[(String, Vec<f64>)]) -> String {
    let (w, h) = (720.0, 420.0);
    let left = 60.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.0}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let tmax = steps.last().copied().unwrap_or(1).max(1) as f64;
    let vmax = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let vmax = if vmax > 0.0 { vmax * 1.05 } else { 1.0 };
    let px = |t: usize| left + (t as f64 / tmax) * (w - left - 20.0);
    let py = |v: f64| h - 40.0 - (v / vmax) * (h - 80.0);
    let _ = writeln!(
        svg,
        r#"<path d="M{left:.0} 40 L{left:.0} {:.0} L{:.0} {:.0}" stroke="black" fill="none"/>"#,
        h - 40.0,
        w - 20.0,
        h - 40.0
    );
    for &t in steps {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.0}" font-family="sans-serif" font-size="10" text-anchor="middle">{t}</text>"#,
            px(t),
            h - 25.0
        );
    }
    for i in 0..=4 {
        let v = vmax * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.0}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.3}</text>"#,
            left - 5.0,
            py(v) + 3.0
        );
    }
    for (i, (name, values)) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let mut d = String::new();
        for (j, (&t, &v)) in steps.iter().zip(values).enumerate() {
            let _ = write!(d, "{}{:.2} {:.2} ", if j == 0 { 'M' } else { 'L' }, px(t), py(v));
        }
        let _ = writeln!(
            svg,
            r#"<path d="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#,
            d.trim_end()
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.0}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            left + 10.0,
            40 + 14 * i,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes a matrix as CSV with an optional header row.
pub fn write_matrix_csv<W: Write>(sink: W, m: &Array2<f64>, header: Option<&[String]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    if let Some(h) = header {
        w.write_record(h).map_err(csv_io)?;
    }
    for row in m.outer_iter() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// U-matrix as CSV laid out like the heatmap: one line per grid row `y`,
/// one column per `x`, no header.
pub fn write_umatrix_csv<W: Write>(sink: W, u: &UMatrix) -> Result<()> {
    write_matrix_csv(sink, &u.values.t().to_owned(), None)
}

/// PCA export: `kind,index,label,pc1,pc2,pc3` rows for data, codebook, and
/// landmarks, then one `variance` row.
pub fn write_pca_csv<W: Write>(
    sink: W,
    projection: &PcaProjection,
    data_names: &[String],
    landmarks: &[(String, [f64; 3])],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["kind", "index", "label", "pc1", "pc2", "pc3"]).map_err(csv_io)?;
    let mut put = |kind: &str, idx: usize, label: &str, p: [f64; 3]| {
        w.write_record([
            kind.to_string(),
            idx.to_string(),
            label.to_string(),
            p[0].to_string(),
            p[1].to_string(),
            p[2].to_string(),
        ])
        .map_err(csv_io)
    };
    for (n, r) in projection.data.outer_iter().enumerate() {
        let label = data_names.get(n).map(String::as_str).unwrap_or("");
        put("data", n, label, [r[0], r[1], r[2]])?;
    }
    for (k, r) in projection.codebook.outer_iter().enumerate() {
        put("codebook", k, "", [r[0], r[1], r[2]])?;
    }
    for (m, (name, p)) in landmarks.iter().enumerate() {
        put("landmark", m, name, *p)?;
    }
    put("variance", 0, "", projection.explained_variance)?;
    w.flush()?;
    Ok(())
}

/// Trace export in long form: `metric,step,value,seed`. Metrics appear in the
/// order qed, qel (when present), te, ste for each checkpoint.
pub fn write_trace_csv<W: Write>(sink: W, trace: &TrainTrace, seed: u64) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["metric", "step", "value", "seed"]).map_err(csv_io)?;
    for c in &trace.checkpoints {
        let r = &c.report;
        let mut rows = vec![("qed", r.qed)];
        if let Some(q) = r.qel {
            rows.push(("qel", q));
        }
        rows.push(("te", r.te));
        rows.push(("ste", r.ste));
        for (name, v) in rows {
            w.write_record([name.to_string(), c.t.to_string(), v.to_string(), seed.to_string()])
                .map_err(csv_io)?;
        }
    }
    w.flush()?;
    Ok(())
}
