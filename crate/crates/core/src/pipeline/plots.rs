use std::fmt::Write;

use super::files::TsneRow;
use crate::signal_io::Segment;

const SIZE: f64 = 420.0;
const MARGIN: f64 = 40.0;

/// Scatter of one segment's t-SNE embedding; one `circle` per trial with
/// class `stress` or `normal`.
pub fn tsne_svg(segment: Segment, rows: &[TsneRow]) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for (_, _, p) in rows {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = SIZE - 2.0 * MARGIN;
    let scale = |v: f64, k: usize| {
        let range = hi[k] - lo[k];
        if range > 0.0 {
            (v - lo[k]) / range * span
        } else {
            span / 2.0
        }
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, "<!-- eegtda-svg/1 -->");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="13">t-SNE, {segment}</text>"#, SIZE / 2.0);
    for (p, label, [x, y]) in rows {
        let colour = if label.is_stress() { "#d62728" } else { "#1f77b4" };
        let _ = writeln!(
            out,
            r#"<circle class="{label}" cx="{:.2}" cy="{:.2}" r="3" fill="{colour}" fill-opacity="0.7"><title>{} trial {}</title></circle>"#,
            MARGIN + scale(*x, 0),
            SIZE - MARGIN - scale(*y, 1),
            p.subject_id,
            p.trial_index
        );
    }
    let _ = writeln!(
        out,
        r##"<circle cx="{0}" cy="{1}" r="4" fill="#d62728"/><text x="{2}" y="{3}">stress</text><circle cx="{0}" cy="{4}" r="4" fill="#1f77b4"/><text x="{2}" y="{5}">normal</text>"##,
        SIZE - 90.0,
        MARGIN - 6.0,
        SIZE - 82.0,
        MARGIN - 2.0,
        MARGIN + 8.0,
        MARGIN + 12.0
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::Provenance;
    use crate::signal_io::Label;

    #[test]
    fn one_marker_per_row() {
        let rows: Vec<TsneRow> = (0..5)
            .map(|i| {
                (
                    Provenance { subject_id: "S01".into(), segment: Segment::Task, trial_index: i },
                    Label::from_bool(i % 2 == 0),
                    [i as f64, -(i as f64)],
                )
            })
            .collect();
        let svg = tsne_svg(Segment::Task, &rows);
        assert_eq!(svg.matches(r#"class="stress""#).count(), 3);
        assert_eq!(svg.matches(r#"class="normal""#).count(), 2);
    }
}
