//! Minimal SVG rendering of a sampled region.

use std::fmt::Write;

use curlcurl::RegionPoint;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 50.0;
const LEGEND: f64 = 110.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn px(s: f64) -> f64 {
    PAD + (s + 1.0) / 2.0 * (W - 2.0 * PAD)
}

fn py(invp: f64) -> f64 {
    H - PAD - invp * (H - 2.0 * PAD)
}

/// Axes `s ∈ [−1, 1]` horizontally and `1/p ∈ [0, 1]` vertically, the
/// `S⁺`/`S⁻` cells shaded and the boundary of `R` drawn on top.
pub fn region_svg(
    points: &[RegionPoint],
    vertices: &[[f64; 2]],
    resolution: usize,
    legend: &[String],
) -> String {
    let total_h = H + LEGEND;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{total_h}" viewBox="0 0 {W} {total_h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{W}" height="{total_h}" fill="white"/>"#
    );

    let cw = (W - 2.0 * PAD) / resolution.max(1) as f64;
    let ch = (H - 2.0 * PAD) / (resolution + 1) as f64;
    for p in points {
        let fill = if p.in_s_plus {
            "#4a90d9"
        } else if p.in_s_minus {
            "#7cc47c"
        } else {
            continue;
        };
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{fill}" fill-opacity="0.6"/>"#,
            px(p.s) - cw / 2.0,
            py(p.invp) - ch / 2.0,
            cw,
            ch
        );
    }

    // axes
    let (x0, x1, y0, y1) = (px(-1.0), px(1.0), py(0.0), py(1.0));
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let x = px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" text-anchor="middle">{t}</text>"#,
            y0 + 18.0
        );
    }
    for t in [0.0, 0.5, 1.0] {
        let y = py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{y}" x2="{x0}" y2="{y}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{t}</text>"#,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">s</text>"#,
        (x0 + x1) / 2.0,
        y0 + 36.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">1/p</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    if !vertices.is_empty() {
        let mut pts: Vec<String> = vertices
            .iter()
            .map(|v| format!("{:.3},{:.3}", px(v[0]), py(v[1])))
            .collect();
        pts.push(pts[0].clone());
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="red" stroke-width="2"/>"#,
            pts.join(" ")
        );
    }

    let mut y = H + 10.0;
    for (color, label) in [
        ("#4a90d9", "S+"),
        ("#7cc47c", "S-"),
        ("red", "boundary of R"),
    ] {
        let _ = writeln!(
            out,
            r#"<rect x="{PAD}" y="{y}" width="12" height="12" fill="{color}"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{label}</text>"#,
            PAD + 18.0,
            y + 10.0
        );
        y += 16.0;
    }
    let mut y = H + 20.0;
    for line in legend {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y}" font-size="10">{}</text>"#,
            PAD + 130.0,
            escape(line)
        );
        y += 14.0;
    }
    out.push_str("</svg>\n");
    out
}
