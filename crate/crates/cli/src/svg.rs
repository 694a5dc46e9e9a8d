//! Self-contained SVG figures: wrapped trajectories on the unit square,
//! degree +1 solid, degree -1 dashed, start markers, polylines split at
//! seam wraps so no spurious chords are drawn. No external resources.

use torus_vortex::dynamics::TrajectoryRecord;
use torus_vortex::pde::PdeRun;
use torus_vortex::torus::TorusPoint;

const COLORS_POS: [&str; 3] = ["#1f77b4", "#2ca02c", "#9467bd"];
const COLORS_NEG: [&str; 3] = ["#d62728", "#ff7f0e", "#8c564b"];

fn header(out: &mut String) {
    out.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    out.push('\n');
    out.push_str(
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="-0.05 -0.05 1.1 1.1" width="640" height="640">"#,
    );
    out.push('\n');
    out.push_str(r##"<rect x="0" y="0" width="1" height="1" fill="#fcfcfc" stroke="#444" stroke-width="0.003"/>"##);
    out.push('\n');
}

fn footer(out: &mut String) {
    out.push_str("</svg>\n");
}

fn style_for(degree: i32, index: usize) -> (&'static str, &'static str) {
    let palette = if degree > 0 { COLORS_POS } else { COLORS_NEG };
    let color = palette[index % palette.len()];
    let dash = if degree > 0 {
        ""
    } else {
        r#" stroke-dasharray="0.02 0.012""#
    };
    (color, dash)
}

/// One vortex path split into seam-free polyline pieces, y flipped.
fn path_points(points: &[TorusPoint]) -> Vec<Vec<(f64, f64)>> {
    let mut pieces: Vec<Vec<(f64, f64)>> = vec![];
    let mut cur: Vec<(f64, f64)> = vec![];
    let mut prev: Option<TorusPoint> = None;
    for &p in points {
        if let Some(q) = prev {
            if (p.x - q.x).abs() > 0.5 || (p.y - q.y).abs() > 0.5 {
                pieces.push(std::mem::take(&mut cur));
            }
        }
        cur.push((p.x, 1.0 - p.y));
        prev = Some(p);
    }
    if !cur.is_empty() {
        pieces.push(cur);
    }
    pieces
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, dash: &str, width: f64) {
    if pts.len() < 2 {
        return;
    }
    out.push_str(&format!(
        r#"<polyline fill="none" stroke="{color}" stroke-width="{width}"{dash} points=""#
    ));
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{x:.5},{y:.5}"));
    }
    out.push_str("\"/>\n");
}

fn marker(out: &mut String, p: TorusPoint, color: &str) {
    out.push_str(&format!(
        r##"<circle cx="{:.5}" cy="{:.5}" r="0.012" fill="{color}" stroke="#222" stroke-width="0.002"/>"##,
        p.x,
        1.0 - p.y
    ));
    out.push('\n');
}

/// Figure of a reduced-law trajectory record.
pub fn trajectory_svg(rec: &TrajectoryRecord) -> String {
    let mut out = String::new();
    header(&mut out);
    let m = rec.configurations[0].len();
    for j in 0..m {
        let degree = rec.configurations[0].degrees[j];
        let (color, dash) = style_for(degree, j);
        let pts: Vec<TorusPoint> = rec.configurations.iter().map(|c| c.positions[j]).collect();
        for piece in path_points(&pts) {
            polyline(&mut out, &piece, color, dash, 0.005);
        }
        marker(&mut out, pts[0], color);
    }
    footer(&mut out);
    out
}

/// Overlay: reduced-law prediction (thin) and tracked PDE vortices (thick).
pub fn overlay_svg(rec: &TrajectoryRecord, run: &PdeRun) -> String {
    let mut out = String::new();
    header(&mut out);
    let m = rec.configurations[0].len();
    for j in 0..m {
        let degree = rec.configurations[0].degrees[j];
        let (color, dash) = style_for(degree, j);
        let pts: Vec<TorusPoint> = rec.configurations.iter().map(|c| c.positions[j]).collect();
        for piece in path_points(&pts) {
            polyline(&mut out, &piece, color, dash, 0.003);
        }
        marker(&mut out, pts[0], color);
    }
    for (j, tr) in run.tracks.iter().enumerate() {
        let (color, dash) = style_for(tr.degree, j);
        for piece in path_points(&tr.positions) {
            polyline(&mut out, &piece, color, dash, 0.008);
        }
    }
    footer(&mut out);
    out
}
