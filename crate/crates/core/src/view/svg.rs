//! Static SVG 1.1 rendering of a [`FiperView`].
//!
//! Row `i` is drawn twice: a `fi-row` group in the left panel and a
//! `chart-row` group in the right panel, both translated to the same `y`.
//! Coordinates are printed with two decimals so output is byte-stable.

use std::fmt::Write;

use super::{FiperRow, FiperView, ViewError, WeightSign};
use crate::stats::{HighlightSpan, SummaryBody};

const LABEL_BUDGET: usize = 24;
const CHART_PAD: f64 = 16.0;
const SEGMENT_FILLS: [&str; 4] = ["#D9D9D9", "#BDBDBD", "#969696", "#737373"];
const BOX_FILL: &str = "#D9D9D9";
const INK: &str = "#333333";
const WHITE: &str = "#FFFFFF";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub left_width: f64,
    pub right_width: f64,
    pub row_height: f64,
    pub header_height: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            left_width: 360.0,
            right_width: 480.0,
            row_height: 36.0,
            header_height: 40.0,
        }
    }
}

impl Geometry {
    fn check(&self) -> Result<(), ViewError> {
        for (name, v) in [
            ("left_width", self.left_width),
            ("right_width", self.right_width),
            ("row_height", self.row_height),
            ("header_height", self.header_height),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ViewError::Geometry(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            // Not representable in XML 1.0 at all.
            c if c < ' ' => out.push('\u{FFFD}'),
            c => out.push(c),
        }
    }
    out
}

fn truncate_label(name: &str) -> String {
    if name.chars().count() <= LABEL_BUDGET {
        name.to_owned()
    } else {
        let mut s: String = name.chars().take(LABEL_BUDGET - 1).collect();
        s.push('…');
        s
    }
}

/// Fixed two-decimal coordinate, with `-0.00` folded to `0.00`.
fn n(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn tooltip(row: &FiperRow) -> String {
    match &row.summary.body {
        SummaryBody::Numerical(f) => format!(
            "{}: {} (min {}, Q1 {}, median {}, Q3 {}, max {})",
            row.feature, row.observed, f.min, f.q1, f.median, f.q3, f.max
        ),
        SummaryBody::Categorical(c) => {
            let count = row
                .observed
                .as_label()
                .and_then(|l| c.index_of(l))
                .map_or(0, |i| c.entries[i].count);
            format!(
                "{}: {} ({} of {})",
                row.feature,
                row.observed,
                count,
                c.total()
            )
        }
    }
}

fn diamond(out: &mut String, x: f64, y: f64, r: f64, fill: &str) {
    let _ = writeln!(
        out,
        r#"    <polygon class="marker" points="{},{} {},{} {},{} {},{}" fill="{fill}"/>"#,
        n(x),
        n(y - r),
        n(x + r),
        n(y),
        n(x),
        n(y + r),
        n(x - r),
        n(y)
    );
}

pub fn render_svg(view: &FiperView, geometry: &Geometry) -> Result<Vec<u8>, ViewError> {
    geometry.check()?;
    let g = geometry;
    let palette = &view.options.palette;
    let width = g.left_width + g.right_width;
    let height = g.header_height + g.row_height * view.rows.len() as f64 + 8.0;
    let mid = g.row_height / 2.0;

    let label_width = g.left_width * 0.45;
    let bar_zero = label_width + (g.left_width - label_width) / 2.0;
    let bar_reach = ((g.left_width - label_width) / 2.0 - 6.0).max(0.0);
    let max_abs = view.max_abs_weight();

    let chart_x0 = CHART_PAD;
    let chart_w = (g.right_width - 2.0 * CHART_PAD).max(1.0);
    let at = |t: f64| chart_x0 + t * chart_w;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = n(width),
        h = n(height)
    );
    let _ = writeln!(
        out,
        "  <title>Explanation {}: predicted {}</title>",
        escape(&view.bundle_id),
        escape(&view.prediction)
    );
    let _ = writeln!(
        out,
        r#"  <rect width="{}" height="{}" fill="{WHITE}"/>"#,
        n(width),
        n(height)
    );
    let _ = writeln!(
        out,
        r#"  <g class="panel-header" font-weight="bold">
    <text x="8.00" y="{y}">Feature importance</text>
    <text x="{x}" y="{y}">Distribution and rule</text>
  </g>"#,
        y = n(g.header_height / 2.0 + 4.0),
        x = n(g.left_width + 8.0)
    );
    let _ = writeln!(
        out,
        r#"  <line class="panel-divider" x1="{x}" y1="0.00" x2="{x}" y2="{h}" stroke="{INK}" stroke-width="0.5"/>"#,
        x = n(g.left_width),
        h = n(height)
    );
    if !view.rows.is_empty() {
        let _ = writeln!(
            out,
            r#"  <line class="fi-axis" x1="{x}" y1="{y0}" x2="{x}" y2="{y1}" stroke="{INK}" stroke-width="0.5"/>"#,
            x = n(bar_zero),
            y0 = n(g.header_height),
            y1 = n(height - 8.0)
        );
    }

    for (i, row) in view.rows.iter().enumerate() {
        let y = g.header_height + g.row_height * i as f64;
        let feature = escape(&row.feature);

        // Left panel: label and signed importance bar.
        let len = if max_abs > 0.0 {
            row.weight.abs() / max_abs * bar_reach
        } else {
            0.0
        };
        let (x, fill) = match row.weight_sign {
            WeightSign::Negative => (bar_zero - len, palette.negative().as_str()),
            _ => (bar_zero, palette.positive().as_str()),
        };
        let _ = writeln!(
            out,
            r#"  <g class="fi-row" data-row="{i}" data-feature="{feature}" transform="translate(0.00,{ty})">
    <title>{feature}: {w}</title>
    <text x="8.00" y="{ly}"{weight}>{label}</text>
    <rect class="fi-bar" x="{x}" y="{by}" width="{bw}" height="{bh}" fill="{fill}"/>
  </g>"#,
            ty = n(y),
            w = row.weight,
            ly = n(mid + 4.0),
            weight = if row.in_rule {
                r#" font-weight="bold""#
            } else {
                ""
            },
            label = escape(&truncate_label(&row.feature)),
            x = n(x),
            by = n(g.row_height * 0.25),
            bw = n(len),
            bh = n(g.row_height * 0.5),
        );

        // Right panel: distribution chart, highlight, marker.
        let _ = writeln!(
            out,
            r#"  <g class="chart-row" data-row="{i}" data-feature="{feature}" transform="translate({tx},{ty})">
    <title>{tip}</title>"#,
            tx = n(g.left_width),
            ty = n(y),
            tip = escape(&tooltip(row)),
        );
        let band_y = g.row_height * 0.2;
        let band_h = g.row_height * 0.6;
        match &row.summary.body {
            SummaryBody::Numerical(f) => {
                let span = |v: f64| {
                    if f.max == f.min {
                        0.5
                    } else {
                        (v - f.min) / (f.max - f.min)
                    }
                };
                if let Some(HighlightSpan::Interval { start, end, .. }) = &row.highlight {
                    let w = (end - start) * chart_w;
                    let _ = writeln!(
                        out,
                        r#"    <rect class="highlight" x="{}" y="{}" width="{}" height="{}" fill="{}" fill-opacity="0.8"/>"#,
                        n(at(*start)),
                        n(g.row_height * 0.1),
                        n(w.max(2.0)),
                        n(g.row_height * 0.8),
                        palette.highlight()
                    );
                }
                let _ = writeln!(
                    out,
                    r#"    <line class="whisker" x1="{}" y1="{m}" x2="{}" y2="{m}" stroke="{INK}"/>"#,
                    n(at(span(f.min))),
                    n(at(span(f.max))),
                    m = n(mid)
                );
                for v in [f.min, f.max] {
                    let _ = writeln!(
                        out,
                        r#"    <line class="whisker-end" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{INK}"/>"#,
                        n(g.row_height * 0.35),
                        n(g.row_height * 0.65),
                        x = n(at(span(v)))
                    );
                }
                let _ = writeln!(
                    out,
                    r#"    <rect class="box" x="{}" y="{}" width="{}" height="{}" fill="{BOX_FILL}" fill-opacity="0.6" stroke="{INK}"/>"#,
                    n(at(span(f.q1))),
                    n(band_y + g.row_height * 0.1),
                    n((span(f.q3) - span(f.q1)) * chart_w),
                    n(band_h - g.row_height * 0.2)
                );
                let _ = writeln!(
                    out,
                    r#"    <line class="median" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{INK}" stroke-width="2"/>"#,
                    n(band_y + g.row_height * 0.1),
                    n(band_y + band_h - g.row_height * 0.1),
                    x = n(at(span(f.median)))
                );
            }
            SummaryBody::Categorical(c) => {
                let total = c.total() as f64;
                let flags = match &row.highlight {
                    Some(HighlightSpan::Segments { flags }) => flags.as_slice(),
                    _ => &[],
                };
                let shares: Vec<f64> = c
                    .entries
                    .iter()
                    .map(|e| {
                        if total > 0.0 {
                            e.count as f64 / total
                        } else {
                            0.0
                        }
                    })
                    .collect();
                // Highlights first so the taller yellow bands frame the segments.
                let mut cursor = 0.0;
                for (k, (entry, share)) in c.entries.iter().zip(&shares).enumerate() {
                    if flags.get(k).copied().unwrap_or(false) {
                        let _ = writeln!(
                            out,
                            r#"    <rect class="highlight" data-label="{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                            escape(&entry.label),
                            n(at(cursor)),
                            n(g.row_height * 0.1),
                            n((share * chart_w).max(2.0)),
                            n(g.row_height * 0.8),
                            palette.highlight()
                        );
                    }
                    cursor += share;
                }
                let mut cursor = 0.0;
                for (k, (entry, share)) in c.entries.iter().zip(&shares).enumerate() {
                    let _ = writeln!(
                        out,
                        r#"    <rect class="segment" data-label="{}" x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="{WHITE}" stroke-width="0.5"/>"#,
                        escape(&entry.label),
                        n(at(cursor)),
                        n(band_y),
                        n(share * chart_w),
                        n(band_h),
                        SEGMENT_FILLS[k % SEGMENT_FILLS.len()]
                    );
                    cursor += share;
                }
            }
        }
        diamond(
            &mut out,
            at(row.marker.normalized),
            mid,
            g.row_height * 0.18,
            palette.marker().as_str(),
        );
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}
