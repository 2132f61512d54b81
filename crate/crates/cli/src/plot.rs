//! CSV tables and small SVG line plots.

use std::fmt::Write as _;

use anyhow::Result;
use sumlab_core::branching::{BranchingFunction, SlopeDecomposition};
use sumlab_core::exact::{fmt_rational, rational_to_f64};
use sumlab_core::sumproduct::ExpansionReport;

/// Header `j,f`, plus `minorant` when a decomposition is given.
pub fn branching_csv(f: &BranchingFunction, dec: Option<&SlopeDecomposition>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let minorant = dec.map(|d| d.minorant());
    match &minorant {
        Some(_) => w.write_record(["j", "f", "minorant"])?,
        None => w.write_record(["j", "f"])?,
    }
    for (j, v) in f.values().iter().enumerate() {
        let mut row = vec![j.to_string(), fmt_rational(v)];
        if let Some(m) = &minorant {
            row.push(fmt_rational(&m[j]));
        }
        w.write_record(&row)?;
    }
    Ok(w.into_inner()?)
}

/// Rows `(c_index, full, adversarial)`.
pub fn expansion_csv(r: &ExpansionReport) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["c_index", "full", "adversarial"])?;
    for rec in &r.records {
        w.write_record([rec.c.to_string(), rec.full.to_string(), rec.adversarial.to_string()])?;
    }
    Ok(w.into_inner()?)
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Line plot with labeled axes, one polyline per series.
pub fn svg(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    y0 = y0.min(0.0);
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, esc(title));
    let (left, right, top, bottom) = (PAD, W - PAD, PAD, H - PAD);
    let _ = writeln!(out, r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>"#);
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
            sx(xv),
            bottom + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
            left - 6.0,
            sy(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
        W / 2.0,
        H - 12.0,
        esc(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(ylabel)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ =
            writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let ly = top + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" font-size="12" fill="{color}">{}</text>"#,
            right - 120.0,
            esc(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn branching_svg(f: &BranchingFunction, dec: Option<&SlopeDecomposition>) -> String {
    let mut series = vec![Series {
        name: "f".into(),
        points: f.values().iter().enumerate().map(|(j, v)| (j as f64, rational_to_f64(v))).collect(),
    }];
    if let Some(d) = dec {
        series.push(Series {
            name: "minorant".into(),
            points: d.minorant().iter().enumerate().map(|(j, v)| (j as f64, rational_to_f64(v))).collect(),
        });
    }
    svg("branching function", "j", "f(j)", &series)
}

pub fn expansion_svg(r: &ExpansionReport) -> String {
    let a = r.a_size as f64;
    let pick = |g: fn(&sumlab_core::sumproduct::ExpansionRecord) -> usize| {
        r.records.iter().enumerate().map(|(i, rec)| (i as f64, g(rec) as f64 / a)).collect()
    };
    let series = [
        Series { name: "full / |A|".into(), points: pick(|x| x.full) },
        Series { name: "adversarial / |A|".into(), points: pick(|x| x.adversarial) },
    ];
    svg("expansion over c", "c index", "covering ratio", &series)
}
