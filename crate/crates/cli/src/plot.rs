//! Self-contained SVG figures: log-log gap plot and compensated-gap plot,
//! one filled quartile stripe plus median line per interconnection kind.

use std::fmt::Write as _;

use thiserror::Error;

use crate::experiments::{SweepKind, ALL_KINDS};
use crate::formats::SeriesRow;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot: series is empty")]
    EmptySeries,
    #[error("no finite points after transform (log of nonpositive gaps?)")]
    NoFinitePoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMode {
    LogLogGap,
    CompensatedGap,
}

impl PlotMode {
    fn y_label(self) -> &'static str {
        match self {
            PlotMode::LogLogGap => "ln gap",
            PlotMode::CompensatedGap => "L * gap",
        }
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

fn kind_color(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::Complete => "#1f77b4",
        SweepKind::RegularHalf => "#ff7f0e",
        SweepKind::Regular4 => "#2ca02c",
        SweepKind::BollobasChung => "#d62728",
    }
}

fn kind_letter(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::Complete => "(a)",
        SweepKind::RegularHalf => "(b)",
        SweepKind::Regular4 => "(c)",
        SweepKind::BollobasChung => "(d)",
    }
}

struct KindSeries {
    kind: SweepKind,
    // (x, y_q1, y_median, y_q3) after transform, sorted by x
    points: Vec<(f64, f64, f64, f64)>,
}

fn transform(rows: &[SeriesRow], mode: PlotMode) -> Vec<KindSeries> {
    let mut out = Vec::new();
    for &kind in &ALL_KINDS {
        let mut points: Vec<(f64, f64, f64, f64)> = rows
            .iter()
            .filter(|r| r.kind == kind)
            .filter_map(|r| {
                let x = (r.n as f64).ln();
                let (q1, med, q3) = match mode {
                    PlotMode::LogLogGap => (r.q1.ln(), r.median.ln(), r.q3.ln()),
                    PlotMode::CompensatedGap => (r.q1_comp, r.median_comp, r.q3_comp),
                };
                (x.is_finite() && q1.is_finite() && med.is_finite() && q3.is_finite())
                    .then_some((x, q1, med, q3))
            })
            .collect();
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if !points.is_empty() {
            out.push(KindSeries { kind, points });
        }
    }
    out
}

/// Renders the figure; x axis is `ln n` in both modes.
pub fn render_svg(rows: &[SeriesRow], mode: PlotMode) -> Result<String, PlotError> {
    if rows.is_empty() {
        return Err(PlotError::EmptySeries);
    }
    let series = transform(rows, mode);
    if series.is_empty() {
        return Err(PlotError::NoFinitePoints);
    }

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &series {
        for &(x, q1, med, q3) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(q1.min(med));
            y_max = y_max.max(q3.max(med));
        }
    }
    if x_min == x_max {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let x_pad = 0.04 * (x_max - x_min);
    let y_pad = 0.06 * (y_max - y_min);
    let (x_min, x_max) = (x_min - x_pad, x_max + x_pad);
    let (y_min, y_max) = (y_min - y_pad, y_max + y_pad);

    let px = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| HEIGHT - MARGIN_B - (y - y_min) / (y_max - y_min) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");

    // axes
    let x0 = px(x_min);
    let x1 = px(x_max);
    let y0 = py(y_min);
    let y1 = py(y_max);
    let _ = writeln!(
        svg,
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x1:.1}\" y2=\"{y0:.1}\" stroke=\"black\" stroke-width=\"1\"/>"
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x0:.1}\" y2=\"{y1:.1}\" stroke=\"black\" stroke-width=\"1\"/>"
    );

    // ticks
    for t in 0..=4 {
        let fx = x_min + (x_max - x_min) * t as f64 / 4.0;
        let tx = px(fx);
        let _ = writeln!(
            svg,
            "<line x1=\"{tx:.1}\" y1=\"{y0:.1}\" x2=\"{tx:.1}\" y2=\"{:.1}\" stroke=\"black\" stroke-width=\"1\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{tx:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{fx:.2}</text>",
            y0 + 20.0
        );
        let fy = y_min + (y_max - y_min) * t as f64 / 4.0;
        let ty = py(fy);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{ty:.1}\" x2=\"{x0:.1}\" y2=\"{ty:.1}\" stroke=\"black\" stroke-width=\"1\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{fy:.2}</text>",
            x0 - 8.0,
            ty + 4.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\">ln n</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        mode.y_label()
    );

    // stripes then medians, kinds in legend order
    for s in &series {
        let color = kind_color(s.kind);
        if s.points.len() >= 2 {
            let mut d = String::new();
            for &(x, _, _, q3) in &s.points {
                let _ = write!(d, "{:.2},{:.2} ", px(x), py(q3));
            }
            for &(x, q1, _, _) in s.points.iter().rev() {
                let _ = write!(d, "{:.2},{:.2} ", px(x), py(q1));
            }
            let _ = writeln!(
                svg,
                "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.25\" stroke=\"none\"/>",
                d.trim_end()
            );
        }
    }
    for s in &series {
        let color = kind_color(s.kind);
        if s.points.len() >= 2 {
            let mut d = String::new();
            for &(x, _, med, _) in &s.points {
                let _ = write!(d, "{:.2},{:.2} ", px(x), py(med));
            }
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                d.trim_end()
            );
        }
        for &(x, _, med, _) in &s.points {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                px(x),
                py(med)
            );
        }
    }

    // legend, top to bottom in sweep order
    let lx = WIDTH - MARGIN_R + 18.0;
    let mut ly = MARGIN_T + 10.0;
    for s in &series {
        let color = kind_color(s.kind);
        let _ = writeln!(
            svg,
            "<rect x=\"{lx:.1}\" y=\"{:.1}\" width=\"14\" height=\"14\" fill=\"{color}\"/>",
            ly - 11.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-size=\"12\">{} {}</text>",
            lx + 20.0,
            kind_letter(s.kind),
            s.kind.label()
        );
        ly += 22.0;
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, kind: SweepKind, med: f64) -> SeriesRow {
        SeriesRow {
            n,
            k: 10,
            kind,
            q1: med * 0.8,
            median: med,
            q3: med * 1.25,
            q1_comp: med * 0.8 * (n as f64) / 10.0,
            median_comp: med * (n as f64) / 10.0,
            q3_comp: med * 1.25 * (n as f64) / 10.0,
        }
    }

    // minimal well-formedness check: every opened tag closes in order
    fn assert_well_formed_xml(svg: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = svg;
        while let Some(start) = rest.find('<') {
            let end = rest[start..].find('>').expect("unclosed tag") + start;
            let tag = &rest[start + 1..end];
            rest = &rest[end + 1..];
            if let Some(name) = tag.strip_prefix('/') {
                assert_eq!(stack.pop().as_deref(), Some(name), "mismatched closing tag");
            } else if !tag.ends_with('/') && !tag.starts_with('?') && !tag.starts_with('!') {
                let name: String =
                    tag.chars().take_while(|c| c.is_ascii_alphanumeric()).collect();
                stack.push(name);
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    #[test]
    fn renders_both_modes() {
        let rows: Vec<SeriesRow> = (0..5)
            .flat_map(|i| {
                let n = 100 << i;
                vec![
                    row(n, SweepKind::Complete, 0.3 / (n as f64).sqrt()),
                    row(n, SweepKind::BollobasChung, 0.1 / (n as f64).sqrt()),
                ]
            })
            .collect();
        for mode in [PlotMode::LogLogGap, PlotMode::CompensatedGap] {
            let svg = render_svg(&rows, mode).unwrap();
            assert!(svg.starts_with("<svg"));
            assert!(svg.contains("<polygon"));
            assert!(svg.contains("<polyline"));
            assert!(svg.contains("#1f77b4"));
            assert!(svg.contains("#d62728"));
            assert!(svg.contains("ln n"));
            assert_well_formed_xml(&svg);
        }
    }

    #[test]
    fn single_point_has_markers_but_no_stripe() {
        let rows = vec![row(101, SweepKind::Complete, 0.05)];
        let svg = render_svg(&rows, PlotMode::LogLogGap).unwrap();
        assert!(!svg.contains("<polygon"));
        assert!(!svg.contains("<polyline"));
        assert!(svg.contains("<circle"));
        assert_well_formed_xml(&svg);
    }

    #[test]
    fn stripe_never_crosses_median() {
        let rows: Vec<SeriesRow> =
            (0..4).map(|i| row(100 + i * 50, SweepKind::Regular4, 0.01 * (i + 1) as f64)).collect();
        for r in &rows {
            assert!(r.q1 <= r.median && r.median <= r.q3);
            assert!(r.q1_comp <= r.median_comp && r.median_comp <= r.q3_comp);
        }
        let svg = render_svg(&rows, PlotMode::CompensatedGap).unwrap();
        assert_well_formed_xml(&svg);
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(render_svg(&[], PlotMode::LogLogGap), Err(PlotError::EmptySeries)));
    }
}
