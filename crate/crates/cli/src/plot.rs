//! Deterministic SVG output: log-log error curves, dendrograms, tensor
//! glyphs, and scalar heat maps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ctfield::{CovTensor, Dendrogram};

use crate::config::GridSpec;
use crate::error::{config_err, CliResult};

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// One named curve of a log-log plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub enum PlotData<'a> {
    LogLog { title: &'a str, series: &'a [Series] },
    Dendrogram(&'a Dendrogram),
    TensorGlyphs { points: &'a [Vec<f64>], tensors: &'a [CovTensor] },
    FieldHeatmap { grid: &'a GridSpec, values: &'a [f64] },
}

/// Renders `data` and writes it to `path`.
pub fn emit_plot(data: &PlotData<'_>, path: impl AsRef<Path>) -> CliResult<()> {
    let svg = render(data)?;
    fs::write(path, svg)?;
    Ok(())
}

pub fn render(data: &PlotData<'_>) -> CliResult<String> {
    match data {
        PlotData::LogLog { title, series } => loglog(title, series),
        PlotData::Dendrogram(d) => Ok(dendrogram(d)),
        PlotData::TensorGlyphs { points, tensors } => glyphs(points, tensors),
        PlotData::FieldHeatmap { grid, values } => heatmap(grid, values),
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
}

/// Maps `[lo, hi]` onto `[a, b]`; a degenerate range maps to the middle.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

fn loglog(title: &str, series: &[Series]) -> CliResult<String> {
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.x.iter().copied().zip(s.y.iter().copied())).collect();
    if pts.is_empty() || pts.iter().any(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(config_err("log-log plot needs positive data"));
    }
    let (lx0, lx1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0.log10()), a.1.max(p.0.log10())));
    let (ly0, ly1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1.log10()), a.1.max(p.1.log10())));
    let (lx0, lx1, ly0, ly1) = (lx0.floor(), lx1.ceil(), ly0.floor(), ly1.ceil());
    let px = |x: f64| scale(x.log10(), lx0, lx1, PAD, W - PAD);
    let py = |y: f64| scale(y.log10(), ly0, ly1, H - PAD, PAD);
    let mut out = String::new();
    header(&mut out);
    let _ = writeln!(out, r#"<text x="{}" y="25" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<path d="M{PAD} {PAD} L{PAD} {} L{} {}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD,
        H - PAD
    );
    for e in (lx0 as i32)..=(lx1 as i32) {
        let x = scale(e as f64, lx0, lx1, PAD, W - PAD);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle" font-size="11">1e{e}</text>"#, H - PAD + 16.0);
    }
    for e in (ly0 as i32)..=(ly1 as i32) {
        let y = scale(e as f64, ly0, ly1, H - PAD, PAD);
        let _ = writeln!(out, r#"<text x="{}" y="{y:.2}" text-anchor="end" font-size="11">1e{e}</text>"#, PAD - 4.0);
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let d: Vec<String> = s.x.iter().zip(&s.y).map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, d.join(" "));
        for (x, y) in s.x.iter().zip(&s.y) {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(*x), py(*y));
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            W - PAD - 150.0,
            PAD + 16.0 * (i as f64 + 1.0),
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Leaves in an order where every cluster is contiguous.
fn leaf_order(d: &Dendrogram) -> Vec<usize> {
    let n = d.n_leaves;
    let mut order = Vec::with_capacity(n);
    // Roots: clusters never merged further (one unless the tree is a forest).
    let mut merged = vec![false; n + d.merges.len()];
    for m in &d.merges {
        merged[m.a] = true;
        merged[m.b] = true;
    }
    let mut stack: Vec<usize> = (0..merged.len()).rev().filter(|&c| !merged[c]).collect();
    stack.reverse();
    while let Some(c) = stack.pop() {
        if c < n {
            order.push(c);
        } else {
            let m = d.merges[c - n];
            stack.push(m.b);
            stack.push(m.a);
        }
    }
    order
}

fn dendrogram(d: &Dendrogram) -> String {
    let n = d.n_leaves;
    let order = leaf_order(d);
    let mut x = vec![0.0; n + d.merges.len()];
    let mut y = vec![H - PAD; n + d.merges.len()];
    for (pos, &leaf) in order.iter().enumerate() {
        x[leaf] = scale(pos as f64, 0.0, (n.max(2) - 1) as f64, PAD, W - PAD);
    }
    let top = d.merges.iter().map(|m| m.height).fold(0.0, f64::max);
    let mut out = String::new();
    header(&mut out);
    for (i, m) in d.merges.iter().enumerate() {
        let c = n + i;
        let h = scale(m.height, 0.0, top, H - PAD, PAD);
        x[c] = 0.5 * (x[m.a] + x[m.b]);
        y[c] = h;
        let _ = writeln!(
            out,
            r#"<path d="M{:.2} {:.2} V{h:.2} H{:.2} V{:.2}" fill="none" stroke="black" stroke-width="0.8"/>"#,
            x[m.a], y[m.a], x[m.b], y[m.b]
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="11">height {top:.4e}</text>"#, PAD, PAD - 10.0);
    out.push_str("</svg>\n");
    out
}

/// Principal radii `(r1, r2)` proportional to `√λ` (largest first) and the
/// rotation of the first axis in degrees.
pub fn glyph_axes(t: &CovTensor) -> CliResult<(f64, f64, f64)> {
    if t.dim() != 2 {
        return Err(config_err("tensor glyphs are drawn for planar tensors only"));
    }
    let s = t.spectrum();
    let (l1, l2) = (s.eigenvalues[1].max(0.0), s.eigenvalues[0].max(0.0));
    let v = &s.eigenvectors[1];
    Ok((l1.sqrt(), l2.sqrt(), v[1].atan2(v[0]).to_degrees()))
}

fn glyphs(points: &[Vec<f64>], tensors: &[CovTensor]) -> CliResult<String> {
    if points.len() != tensors.len() || points.is_empty() {
        return Err(config_err("one tensor per glyph position is required"));
    }
    if points.iter().any(|p| p.len() != 2) {
        return Err(config_err("tensor glyphs are drawn for planar points only"));
    }
    let axes: Vec<(f64, f64, f64)> = tensors.iter().map(glyph_axes).collect::<CliResult<_>>()?;
    let (x0, x1) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p[0]), a.1.max(p[0])));
    let (y0, y1) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p[1]), a.1.max(p[1])));
    // Largest glyph spans about one grid cell.
    let rmax = axes.iter().map(|a| a.0).fold(0.0, f64::max);
    let cell = (W - 2.0 * PAD) / (points.len() as f64).sqrt().max(1.0);
    let k = if rmax > 0.0 { 0.5 * cell / rmax } else { 0.0 };
    let mut out = String::new();
    header(&mut out);
    for (p, (r1, r2, ang)) in points.iter().zip(&axes) {
        let cx = scale(p[0], x0, x1, PAD, W - PAD);
        let cy = scale(p[1], y0, y1, H - PAD, PAD);
        let _ = writeln!(
            out,
            r#"<ellipse cx="{cx:.2}" cy="{cy:.2}" rx="{:.3}" ry="{:.3}" transform="rotate({:.3} {cx:.2} {cy:.2})" fill="none" stroke="{}"/>"#,
            k * r1,
            k * r2,
            -ang,
            COLORS[0]
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn heatmap(grid: &GridSpec, values: &[f64]) -> CliResult<String> {
    if values.len() != grid.nx * grid.ny || values.is_empty() {
        return Err(config_err("heat map needs one value per grid node"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cw = (W - 2.0 * PAD) / grid.nx as f64;
    let ch = (H - 2.0 * PAD) / grid.ny as f64;
    let mut out = String::new();
    header(&mut out);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let v = scale(values[j * grid.nx + i], lo, hi, 0.0, 1.0);
            // Blue (low) to yellow (high).
            let (r, g, b) = ((255.0 * v) as u8, (255.0 * (0.2 + 0.8 * v)) as u8, (255.0 * (1.0 - v)) as u8);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                PAD + i as f64 * cw,
                H - PAD - (j + 1) as f64 * ch,
                cw,
                ch
            );
        }
    }
    let _ = writeln!(out, r#"<text x="{PAD}" y="{}" font-size="11">range [{lo:.4e}, {hi:.4e}]</text>"#, PAD - 10.0);
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
