//! Range advantage vs. optimal defense frequency scatter, as standalone SVG or
//! as two-column CSV.

use std::fmt::Write as _;

use crate::datagen::DatasetRow;
use crate::error::{Error, Result};
use crate::regress::bet_sizes;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn sx(x: f64) -> f64 {
    MARGIN + x.clamp(0.0, 1.0) * (WIDTH - 2.0 * MARGIN)
}

fn sy(y: f64) -> f64 {
    HEIGHT - MARGIN - y.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN)
}

/// Scatter of `(ra, odf)` on `[0, 1] x [0, 1]` with a dashed MDF line per bet size.
pub fn scatter_svg(rows: &[DatasetRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::validation("data", "no rows"));
    }
    let sizes = bet_sizes(rows);
    let color_of = |bet: f64| {
        let i = sizes.iter().position(|&s| s == bet).unwrap_or(0);
        COLORS[i % COLORS.len()]
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#,
        x0 = sx(0.0),
        x1 = sx(1.0),
        y0 = sy(0.0),
        y1 = sy(1.0),
    );
    let _ = writeln!(
        s,
        r#"<g class="ticks" font-family="sans-serif" font-size="11">"#
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{t:.1}</text><text x="{}" y="{}" text-anchor="end">{t:.1}</text>"#,
            sx(t),
            sy(0.0) + 16.0,
            sx(0.0) - 6.0,
            sy(t) + 4.0,
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">Range advantage</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{y}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {y})">Optimal defense frequency</text>"#,
        y = HEIGHT / 2.0
    );

    let _ = writeln!(s, r#"<g class="points" fill-opacity="0.35">"#);
    for r in rows {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{}"/>"#,
            sx(r.ra),
            sy(r.odf),
            color_of(r.bet_size)
        );
    }
    let _ = writeln!(s, "</g>");

    for &bet in &sizes {
        let mdf = 1.0 / (1.0 + bet);
        let _ = writeln!(
            s,
            r#"<line class="mdf-ref" data-mdf="{mdf}" x1="{}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="{}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
            sx(0.0),
            sx(1.0),
            color_of(bet),
            y = sy(mdf),
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{}">MDF {mdf:.3} (bet {bet}P)</text>"#,
            sx(1.0) - 110.0,
            sy(mdf) - 4.0,
            color_of(bet)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn scatter_csv(rows: &[DatasetRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::validation("data", "no rows"));
    }
    let mut s = String::from("ra,odf\n");
    for r in rows {
        let _ = writeln!(s, "{},{}", r.ra, r.odf);
    }
    Ok(s)
}
