//! Cost-versus-input line chart for `bench --svg`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use aggc::runtime::BenchRow;

const W: f64 = 720.0;
const H: f64 = 440.0;
const PAD: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One polyline per config; cells with errors are left out.
pub fn chart(rows: &[BenchRow], var: &str) -> String {
    let mut series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        if !series.contains_key(r.config.as_str()) {
            order.push(r.config.as_str());
        }
        let s = series.entry(&r.config).or_default();
        if r.error.is_none() {
            s.push((r.n as f64, r.cost.total));
        }
    }
    let points = series.values().flatten();
    let (x0, x1) = points
        .clone()
        .fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let y1 = points.fold(0.0_f64, |m, p| m.max(p.1)).max(1.0);
    let (x0, x1) = if x0 > x1 {
        (0.0, 1.0)
    } else if x0 == x1 {
        (x0 - 1.0, x1 + 1.0)
    } else {
        (x0, x1)
    };
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y / y1 * (H - 2.0 * PAD);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{PAD} {top} V{base} H{right}" stroke="black" fill="none"/>"#,
        top = PAD,
        base = H - PAD,
        right = W - PAD
    );
    for k in 0..=4 {
        let y = y1 * f64::from(k) / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{y:.0}</text>"#,
            PAD - 6.0,
            sy(y) + 4.0
        );
        let x = x0 + (x1 - x0) * f64::from(k) / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{x:.0}</text>"#,
            sx(x),
            H - PAD + 18.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 16.0,
        escape(var)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">cost</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (i, name) in order.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = series[name]
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let ly = PAD + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            PAD + 10.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}
