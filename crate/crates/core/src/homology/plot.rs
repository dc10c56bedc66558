//! SVG emitters for persistence diagrams and barcodes.
//!
//! Zero-lifetime pairs are not drawn (they sit on the diagonal and would
//! only bloat the file). Diagrams draw one circle per other finite pair
//! (class `finite h{dim}`), the
//! diagonal, a dashed ∞-line across the top, and one triangle per infinite
//! pair on that line (class `infinite h{dim}`). Barcodes draw one horizontal
//! bar per pair (class `bar h{dim}`); infinite bars run to the right edge
//! and end in an arrow.

use std::fmt::Write;

use super::diagram::PersistenceDiagram;

const SIZE: f64 = 420.0;
const MARGIN: f64 = 48.0;
const COLOURS: [&str; 3] = ["#1f77b4", "#ff7f0e", "#2ca02c"];

fn finite_extent(pd: &PersistenceDiagram) -> f64 {
    let max_death = pd.pairs.iter().flatten().filter(|p| !p.is_infinite()).map(|p| p.death).fold(0.0, f64::max);
    let extent = if pd.threshold.is_finite() { max_death.max(pd.threshold) } else { max_death };
    if extent > 0.0 {
        extent
    } else {
        1.0
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, "<!-- eegtda-svg/1 -->");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{title}</text>"#, SIZE / 2.0);
}

fn legend(out: &mut String, pd: &PersistenceDiagram) {
    for dim in 0..=pd.max_dim {
        let y = MARGIN + 6.0 + 14.0 * dim as f64;
        let _ = writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{y:.1}" r="4" fill="{}"/><text x="{:.1}" y="{:.1}">H{dim}</text>"#,
            SIZE - MARGIN - 30.0,
            COLOURS[dim],
            SIZE - MARGIN - 22.0,
            y + 4.0
        );
    }
}

pub fn diagram_svg(pd: &PersistenceDiagram, title: &str) -> String {
    let extent = finite_extent(pd) * 1.05;
    let span = SIZE - 2.0 * MARGIN;
    let inf_y = MARGIN - 14.0;
    let sx = |v: f64| MARGIN + v / extent * span;
    let sy = |v: f64| SIZE - MARGIN - v / extent * span;

    let mut out = String::new();
    header(&mut out, title);
    let (x0, y0, x1, y1) = (sx(0.0), sy(0.0), sx(extent), sy(extent));
    let _ = writeln!(out, r#"<line class="axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#);
    let _ =
        writeln!(out, r#"<line class="axis" x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{inf_y:.2}" stroke="black"/>"#);
    let _ =
        writeln!(out, r#"<line class="diagonal" x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="grey"/>"#);
    let _ = writeln!(
        out,
        r#"<line class="inf-line" x1="{x0:.2}" y1="{inf_y:.2}" x2="{x1:.2}" y2="{inf_y:.2}" stroke="grey" stroke-dasharray="4 3"/>"#
    );
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">∞</text>"#, x0 - 4.0, inf_y + 4.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">birth</text>"#, SIZE / 2.0, SIZE - 12.0);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">death</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    let _ = writeln!(out, r#"<text x="{x1:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#, y0 + 14.0, extent);

    for (dim, pairs) in pd.pairs.iter().enumerate() {
        for p in pairs.iter().filter(|p| !p.is_zero_lifetime()) {
            let x = sx(p.birth);
            if p.is_infinite() {
                let _ = writeln!(
                    out,
                    r#"<polygon class="infinite h{dim}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{}"/>"#,
                    x,
                    inf_y - 5.0,
                    x - 4.5,
                    inf_y + 3.5,
                    x + 4.5,
                    inf_y + 3.5,
                    COLOURS[dim]
                );
            } else {
                let _ = writeln!(
                    out,
                    r#"<circle class="finite h{dim}" cx="{x:.2}" cy="{:.2}" r="3.5" fill="{}" fill-opacity="0.8"/>"#,
                    sy(p.death),
                    COLOURS[dim]
                );
            }
        }
    }
    legend(&mut out, pd);
    out.push_str("</svg>\n");
    out
}

pub fn barcode_svg(pd: &PersistenceDiagram, title: &str) -> String {
    let extent = finite_extent(pd) * 1.05;
    let n_bars = pd.pairs.iter().flatten().filter(|p| !p.is_zero_lifetime()).count();
    let span = SIZE - 2.0 * MARGIN;
    let step = if n_bars > 0 { (span / n_bars as f64).min(12.0) } else { 12.0 };
    let sx = |v: f64| MARGIN + v / extent * span;

    let mut out = String::new();
    header(&mut out, title);
    let base = SIZE - MARGIN;
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{:.2}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}" stroke="black"/>"#,
        sx(0.0),
        SIZE - MARGIN + 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">filtration value</text>"#,
        SIZE / 2.0,
        SIZE - 12.0
    );
    let mut row = 0;
    for (dim, pairs) in pd.pairs.iter().enumerate() {
        for p in pairs.iter().filter(|p| !p.is_zero_lifetime()) {
            let y = MARGIN + step * (row as f64 + 0.5);
            let end = if p.is_infinite() { SIZE - MARGIN + 6.0 } else { sx(p.death) };
            let _ = writeln!(
                out,
                r#"<line class="bar h{dim}" x1="{:.2}" y1="{y:.2}" x2="{end:.2}" y2="{y:.2}" stroke="{}" stroke-width="{:.2}"/>"#,
                sx(p.birth),
                COLOURS[dim],
                (step * 0.6).max(1.0)
            );
            if p.is_infinite() {
                let _ = writeln!(
                    out,
                    r#"<polygon class="arrow h{dim}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{y:.2}" fill="{}"/>"#,
                    end,
                    y - 3.0,
                    end,
                    y + 3.0,
                    end + 5.0,
                    COLOURS[dim]
                );
            }
            row += 1;
        }
    }
    legend(&mut out, pd);
    out.push_str("</svg>\n");
    out
}
