//! Hand-rolled log-log envelope plots: one min/max band plus a median
//! polyline per series, decade tick marks, no plotting dependency.

use std::io::Write;
use std::path::Path;

pub struct Series {
    pub name: String,
    /// (iteration, min, median, max) per logged point.
    pub rows: Vec<(f64, f64, f64, f64)>,
}

const PALETTE: [&str; 7] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf",
];

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const FLOOR: f64 = 1e-300;

pub fn write_loglog_envelope(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> std::io::Result<()> {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, lo, med, hi) in &s.rows {
            if x <= 0.0 {
                continue;
            }
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            for v in [lo, med, hi] {
                if v > FLOOR && v.is_finite() {
                    y_min = y_min.min(v);
                    y_max = y_max.max(v);
                }
            }
        }
    }
    if !x_min.is_finite() || !y_min.is_finite() {
        // Nothing plottable; emit an empty frame rather than failing.
        x_min = 1.0;
        x_max = 10.0;
        y_min = 1e-1;
        y_max = 1.0;
    }
    let lx = |x: f64| x.max(FLOOR).log10();
    let (x0, x1) = (lx(x_min), lx(x_max).max(lx(x_min) + 1e-9));
    let (y0, y1) = ((y_min.log10() - 0.2).floor(), (y_max.log10() + 0.2).ceil());
    let px = |x: f64| MARGIN_L + (lx(x) - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| {
        let ly = y.max(FLOOR).log10().clamp(y0, y1);
        HEIGHT - MARGIN_B - (ly - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    };

    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        title
    )?;

    // Axes frame.
    writeln!(
        out,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    )?;

    // Decade ticks.
    let mut dec = x0.ceil() as i64;
    while (dec as f64) <= x1 {
        let x = 10f64.powi(dec as i32);
        let xp = px(x);
        writeln!(
            out,
            r##"<line x1="{xp}" y1="{}" x2="{xp}" y2="{}" stroke="#cccccc" stroke-width="0.6"/>"##,
            MARGIN_T,
            HEIGHT - MARGIN_B
        )?;
        writeln!(
            out,
            r#"<text x="{xp}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">1e{dec}</text>"#,
            HEIGHT - MARGIN_B + 16.0
        )?;
        dec += 1;
    }
    let mut dec = y0 as i64;
    while (dec as f64) <= y1 {
        let y = 10f64.powi(dec as i32);
        let yp = py(y);
        writeln!(
            out,
            r##"<line x1="{MARGIN_L}" y1="{yp}" x2="{}" y2="{yp}" stroke="#cccccc" stroke-width="0.6"/>"##,
            WIDTH - MARGIN_R
        )?;
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">1e{dec}</text>"#,
            MARGIN_L - 6.0,
            yp + 4.0
        )?;
        dec += if (y1 - y0) > 14.0 { 2 } else { 1 };
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        x_label
    )?;
    writeln!(
        out,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        y_label
    )?;

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        // Band: forward along the max, back along the min.
        let usable: Vec<&(f64, f64, f64, f64)> =
            s.rows.iter().filter(|r| r.0 > 0.0).collect();
        if usable.is_empty() {
            continue;
        }
        let mut band = String::new();
        for r in &usable {
            band.push_str(&format!("{:.2},{:.2} ", px(r.0), py(r.3)));
        }
        for r in usable.iter().rev() {
            band.push_str(&format!("{:.2},{:.2} ", px(r.0), py(r.1)));
        }
        writeln!(
            out,
            r#"<polygon points="{}" fill="{color}" opacity="0.15" stroke="none"/>"#,
            band.trim_end()
        )?;
        let mut line = String::new();
        for r in &usable {
            line.push_str(&format!("{:.2},{:.2} ", px(r.0), py(r.2)));
        }
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            line.trim_end()
        )?;
        // Legend.
        let ly = MARGIN_T + 18.0 * i as f64 + 10.0;
        writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#,
            WIDTH - MARGIN_R + 10.0,
            WIDTH - MARGIN_R + 34.0
        )?;
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            WIDTH - MARGIN_R + 40.0,
            ly + 4.0,
            s.name
        )?;
    }
    writeln!(out, "</svg>")?;
    out.flush()
}
