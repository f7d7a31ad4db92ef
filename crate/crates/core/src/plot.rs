//! SVG rendering of a sweep summary: feasible fraction per K as bars, with
//! the bound values drawn as labelled vertical lines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::SweepSummary;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Bound lines drawn on the plot: the applicable upper bounds and the
/// achievable count.
fn overlay_lines(summary: &SweepSummary) -> Vec<(String, f64)> {
    summary
        .bound_overlay
        .formula_tags
        .iter()
        .filter(|e| e.tag.starts_with("upper") || e.tag.starts_with("achievable"))
        .map(|e| (e.tag.clone(), e.value))
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(summary: &SweepSummary) -> Result<String> {
    if summary.per_k.is_empty() {
        return Err(Error::Config("nothing to plot: the sweep has no K values".into()));
    }
    let lines = overlay_lines(summary);
    let k_lo = summary.per_k.iter().map(|s| s.k).min().unwrap_or(1) as f64;
    let k_hi = summary
        .per_k
        .iter()
        .map(|s| s.k as f64)
        .chain(lines.iter().map(|l| l.1))
        .fold(k_lo, f64::max);
    let x_min = k_lo - 1.0;
    let x_max = k_hi + 1.0;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |k: f64| LEFT + (k - x_min) / (x_max - x_min) * plot_w;
    let y = |frac: f64| TOP + (1.0 - frac) * plot_h;
    let bar_w = (plot_w / (x_max - x_min) * 0.6).min(40.0);

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}: feasible fraction vs K</text>"#,
        WIDTH / 2.0,
        escape(&summary.family)
    );
    let _ = writeln!(
        w,
        r#"<line x1="{LEFT:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        y(0.0),
        WIDTH - RIGHT,
        y(0.0)
    );
    let _ = writeln!(w, r#"<line x1="{LEFT:.1}" y1="{:.1}" x2="{LEFT:.1}" y2="{:.1}" stroke="black"/>"#, y(0.0), y(1.0));
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{tick:.2}</text>"#,
            LEFT - 6.0,
            y(tick) + 4.0
        );
    }
    let first = x_min as i64 + 1;
    let last = x_max as i64 - 1;
    let step = ((last - first) / 20 + 1).max(1);
    for k in (first..=last).step_by(step as usize) {
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{k}</text>"#,
            x(k as f64),
            y(0.0) + 16.0
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">K</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    for s in &summary.per_k {
        let top = y(s.feasible_fraction);
        let _ = writeln!(
            w,
            r#"<rect x="{:.1}" y="{top:.1}" width="{bar_w:.1}" height="{:.1}" fill="steelblue"><title>K={} fraction={:.3} trials={}</title></rect>"#,
            x(s.k as f64) - bar_w / 2.0,
            y(0.0) - top,
            s.k,
            s.feasible_fraction,
            s.trials
        );
    }
    let colors = ["firebrick", "darkorange", "seagreen", "purple", "gray"];
    for (i, (label, value)) in lines.iter().enumerate() {
        let xv = x(*value);
        let color = colors[i % colors.len()];
        let _ = writeln!(
            w,
            r#"<line x1="{xv:.1}" y1="{:.1}" x2="{xv:.1}" y2="{:.1}" stroke="{color}" stroke-dasharray="6 4"/>"#,
            y(0.0),
            y(1.0)
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{} = {value}</text>"#,
            xv + 4.0,
            TOP + 14.0 * (i as f64 + 1.0),
            escape(label)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

pub fn plot_summary(summary: &SweepSummary, path: &Path) -> Result<()> {
    fs::write(path, render_svg(summary)?)?;
    Ok(())
}
