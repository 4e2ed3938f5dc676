//! Static SVG renderings. Plotted numbers are also embedded as text or
//! `data-value` attributes so outputs can be checked by diffing.

use std::fmt::Write as _;

use super::{CurvePoint, PerformanceSummary};
use crate::cluster::Dendrogram;
use crate::fanova::MarginalTable;

const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(width: f64, height: f64, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <title>{}</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        escape(title)
    )
}

/// Maps `[lo, hi]` onto pixel rows `[bottom, top]`.
struct Scale {
    lo: f64,
    hi: f64,
    bottom: f64,
    top: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, bottom: f64, top: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Scale { lo, hi, bottom, top }
    }

    fn at(&self, v: f64) -> f64 {
        self.bottom + (v - self.lo) / (self.hi - self.lo) * (self.top - self.bottom)
    }
}

fn y_axis(out: &mut String, s: &Scale, x: f64, label: &str) {
    let _ = writeln!(out, "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>", s.at(s.lo), s.at(s.hi));
    for v in [s.lo, s.hi] {
        let _ = writeln!(out, "<text class=\"tick\" x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{v}</text>", x - 4.0, s.at(v) + 4.0);
    }
    let _ = writeln!(out, "<text x=\"14\" y=\"{:.2}\" transform=\"rotate(-90 14 {:.2})\" text-anchor=\"middle\">{}</text>",
        (s.bottom + s.top) / 2.0, (s.bottom + s.top) / 2.0, escape(label));
}

/// One box per dataset: whiskers at min and max, box from q1 to q3.
pub fn boxplots(summaries: &[PerformanceSummary]) -> String {
    let step = 28.0;
    let width = 2.0 * MARGIN + step * summaries.len().max(1) as f64;
    let height = 320.0;
    let lo = summaries.iter().map(|s| s.min).fold(f64::INFINITY, f64::min);
    let hi = summaries.iter().map(|s| s.max).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let s = Scale::new(lo, hi, height - MARGIN, 20.0);
    let mut out = open(width, height, "Performance distribution");
    y_axis(&mut out, &s, MARGIN, "log10 median error");
    for (i, b) in summaries.iter().enumerate() {
        let x = MARGIN + step * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            "<g class=\"box\" data-dataset=\"{}\" data-min=\"{}\" data-q1=\"{}\" data-median=\"{}\" data-q3=\"{}\" data-max=\"{}\" data-capped=\"{}\">",
            escape(&b.dataset), b.min, b.q1, b.median, b.q3, b.max, b.capped
        );
        let _ = writeln!(out, "<line x1=\"{x}\" y1=\"{:.2}\" x2=\"{x}\" y2=\"{:.2}\" stroke=\"black\"/>", s.at(b.min), s.at(b.max));
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"16\" height=\"{:.2}\" fill=\"#9ecae1\" stroke=\"black\"/>",
            x - 8.0, s.at(b.q3), (s.at(b.q1) - s.at(b.q3)).max(0.5)
        );
        let _ = writeln!(out, "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"2\"/>",
            x - 8.0, s.at(b.median), x + 8.0, s.at(b.median));
        let _ = writeln!(out, "<text x=\"{x}\" y=\"{:.2}\" text-anchor=\"end\" transform=\"rotate(-60 {x} {:.2})\">{}</text>",
            height - MARGIN + 14.0, height - MARGIN + 14.0, escape(&b.dataset));
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Cumulative share of variance against the number of ranked terms.
pub fn cumulative_curve(points: &[CurvePoint], title: &str) -> String {
    let (width, height) = (560.0, 320.0);
    let n = points.len().max(1) as f64;
    let s = Scale::new(0.0, 1.0, height - MARGIN, 20.0);
    let x_at = |k: usize| MARGIN + (k as f64 - 1.0) / (n - 1.0).max(1.0) * (width - 2.0 * MARGIN);
    let mut out = open(width, height, title);
    y_axis(&mut out, &s, MARGIN, "cumulative variance share");
    let vertices: Vec<String> =
        points.iter().map(|p| format!("{:.2},{:.2}", x_at(p.k), s.at(p.cumulative.clamp(0.0, 1.0)))).collect();
    let values: Vec<String> = points.iter().map(|p| p.cumulative.to_string()).collect();
    let _ = writeln!(
        out,
        "<polyline class=\"curve\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"{}\" data-values=\"{}\"/>",
        vertices.join(" "),
        values.join(" ")
    );
    if let Some(last) = points.last() {
        let _ = writeln!(out, "<text class=\"final\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x_at(last.k), s.at(last.cumulative.clamp(0.0, 1.0)) - 6.0, last.cumulative);
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">ranked effects (k = 1..{})</text>",
        width / 2.0, height - 20.0, points.len());
    out.push_str("</svg>\n");
    out
}

fn color(v: f64, lo: f64, hi: f64) -> String {
    // White for the lowest (best) value, dark red for the highest.
    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let g = (255.0 * (1.0 - 0.8 * t)).round() as u8;
    format!("rgb(255,{g},{g})")
}

/// Grid of marginal predictions with the value printed in every cell. A
/// single-feature table is drawn as one row.
pub fn heatmap(table: &MarginalTable, title: &str) -> String {
    let (rows, cols, row_levels, col_levels): (usize, usize, &[String], &[String]) = match table.levels.len() {
        1 => (1, table.levels[0].len(), &[][..], &table.levels[0][..]),
        _ => (table.levels[0].len(), table.levels[1].len(), &table.levels[0][..], &table.levels[1][..]),
    };
    let cell = 56.0;
    let (left, top) = (80.0, 40.0);
    let width = left + cell * cols as f64 + 20.0;
    let height = top + cell * rows as f64 + 40.0;
    let lo = table.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = table.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = open(width, height, title);
    for (c, l) in col_levels.iter().enumerate() {
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            left + cell * (c as f64 + 0.5), top - 8.0, escape(l));
    }
    for r in 0..rows {
        if let Some(l) = row_levels.get(r) {
            let _ = writeln!(out, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                left - 6.0, top + cell * (r as f64 + 0.5) + 4.0, escape(l));
        }
        for c in 0..cols {
            let v = table.values[r * cols + c];
            let (x, y) = (left + cell * c as f64, top + cell * r as f64);
            let _ = writeln!(out, "<rect class=\"cell\" x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\" stroke=\"white\" data-value=\"{v}\"/>",
                color(v, lo, hi));
            let _ = writeln!(out, "<text class=\"cell-label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{v:.3}</text>",
                x + cell / 2.0, y + cell / 2.0 + 4.0);
        }
    }
    let axes = table.features.join(" × ");
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>", width / 2.0, height - 12.0, escape(&axes));
    out.push_str("</svg>\n");
    out
}

/// Dendrogram with leaves along the bottom in leaf order and merge heights
/// on a linear axis whose top is the final merge.
pub fn dendrogram(tree: &Dendrogram, title: &str) -> String {
    let n = tree.n_leaves();
    let step = 24.0;
    let width = 2.0 * MARGIN + step * n as f64;
    let height = 360.0;
    let max_h = tree.merges.last().map_or(0.0, |m| m.height);
    let s = Scale::new(0.0, if max_h > 0.0 { max_h } else { 1.0 }, height - 90.0, 20.0);
    let mut out = open(width, height, title);
    y_axis(&mut out, &s, MARGIN, "merge height");
    let _ = writeln!(out, "<text class=\"max-height\" x=\"{}\" y=\"14\">{max_h}</text>", MARGIN + 4.0);

    let mut x = vec![0.0; 2 * n - 1];
    let mut y = vec![s.at(0.0); 2 * n - 1];
    for (pos, leaf) in tree.leaf_order().into_iter().enumerate() {
        x[leaf] = MARGIN + step * (pos as f64 + 0.5);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" transform=\"rotate(-60 {:.2} {:.2})\">{}</text>",
            x[leaf], y[leaf] + 12.0, x[leaf], y[leaf] + 12.0, escape(&tree.labels[leaf]));
    }
    for m in &tree.merges {
        let h = s.at(m.height);
        x[m.id] = (x[m.a] + x[m.b]) / 2.0;
        y[m.id] = h;
        let _ = writeln!(
            out,
            "<path class=\"merge\" data-height=\"{}\" d=\"M{:.2},{:.2} V{h:.2} H{:.2} V{:.2}\" fill=\"none\" stroke=\"black\"/>",
            m.height, x[m.a], y[m.a], x[m.b], y[m.b]
        );
    }
    out.push_str("</svg>\n");
    out
}
