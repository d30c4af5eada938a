//! Deterministic SVG scatter plots. 3D data is drawn with a fixed
//! isometric projection; higher dimensions are refused.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use untangle::{LabeledDataset, Point};

const PANEL: f64 = 420.0;
const TITLE: f64 = 30.0;
const PAD: f64 = 20.0;
const DOT: f64 = 2.0;

/// Colors by label rank across all panels.
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

pub struct Panel<'a> {
    pub title: &'a str,
    pub data: &'a LabeledDataset,
}

/// `(x, y)` on screen before scaling; `y` points up.
fn project(p: &Point) -> (f64, f64) {
    let c = p.coords();
    match c.len() {
        1 => (c[0], 0.0),
        2 => (c[0], c[1]),
        _ => {
            let (x, y, z) = (c[0], c[1], c[2]);
            (
                (x - y) / 2f64.sqrt(),
                z * (2.0 / 3.0f64).sqrt() - (x + y) / 6f64.sqrt(),
            )
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(panels: &[Panel]) -> Result<String> {
    for p in panels {
        if let Some(d) = p.data.dim() {
            if d > 3 {
                bail!(
                    "cannot draw {d}-dimensional data in panel `{}`; project it to 3 or fewer coordinates first (project_down)",
                    p.title
                );
            }
        }
    }
    let mut labels: Vec<i64> = panels.iter().flat_map(|p| p.data.labels()).collect();
    labels.sort_unstable();
    labels.dedup();

    let width = PANEL * panels.len().max(1) as f64;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL:.0}" viewBox="0 0 {width:.0} {PANEL:.0}">"#
    )?;
    writeln!(out, r#"<rect width="{width:.0}" height="{PANEL:.0}" fill="white"/>"#)?;
    for (k, panel) in panels.iter().enumerate() {
        let x0 = k as f64 * PANEL;
        writeln!(out, r#"<g transform="translate({x0:.0},0)">"#)?;
        writeln!(
            out,
            r#"<text x="{:.0}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            PANEL / 2.0,
            escape(panel.title)
        )?;
        let side = PANEL - 2.0 * PAD;
        let top = TITLE;
        let plot_h = PANEL - TITLE - PAD;
        writeln!(
            out,
            r##"<rect x="{PAD:.0}" y="{top:.0}" width="{side:.0}" height="{plot_h:.0}" fill="none" stroke="#cccccc"/>"##
        )?;

        let pts: Vec<(usize, (f64, f64))> = panel
            .data
            .classes
            .iter()
            .flat_map(|c| {
                let color = labels.binary_search(&c.label).unwrap_or(0);
                c.cloud.points().iter().map(move |p| (color, project(p)))
            })
            .collect();
        if !pts.is_empty() {
            let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) =
                (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for &(_, (x, y)) in &pts {
                lo_x = lo_x.min(x);
                hi_x = hi_x.max(x);
                lo_y = lo_y.min(y);
                hi_y = hi_y.max(y);
            }
            let span = (hi_x - lo_x).max(hi_y - lo_y);
            let inner = side.min(plot_h) - 2.0 * DOT - 10.0;
            let scale = if span > 0.0 { inner / span } else { 1.0 };
            let (cx, cy) = (0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y));
            let (mx, my) = (PAD + side / 2.0, top + plot_h / 2.0);
            for (color, (x, y)) in pts {
                writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="{DOT}" fill="{}"/>"#,
                    mx + (x - cx) * scale,
                    my - (y - cy) * scale,
                    PALETTE[color % PALETTE.len()]
                )?;
            }
        }
        writeln!(out, "</g>")?;
    }
    writeln!(out, "</svg>")?;
    Ok(out)
}

#[allow(dead_code)]
pub fn export_svg(data: &LabeledDataset, path: &Path) -> Result<()> {
    write_panels(&[Panel { title: "", data }], path)
}

pub fn write_panels(panels: &[Panel], path: &Path) -> Result<()> {
    std::fs::write(path, render(panels)?)?;
    Ok(())
}
