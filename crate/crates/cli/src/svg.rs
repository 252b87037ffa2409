//! A minimal SVG rendering of a branch table: one polyline per `(j, side)`.

use std::fmt::Write as _;

use pneumann::branch::BranchTable;
use pneumann::solver::Side;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub fn render(table: &BranchTable) -> String {
    let (x0, x1) = bounds(table.grid.iter().copied());
    let (y0, y1) = bounds(table.rows.iter().map(|r| r.d).chain([1.0]));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{m}" y="{m}" width="{w}" height="{h}" fill="none" stroke="#444"/>"##,
        m = MARGIN,
        w = W - 2.0 * MARGIN,
        h = H - 2.0 * MARGIN
    );
    // the constant solution u = 1
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#999" stroke-dasharray="4 3"/>"##,
        sx(x0),
        sx(x1),
        y = sy(1.0)
    );
    for (x, anchor, label) in [(sx(x0), "start", x0), (sx(x1), "end", x1)] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" font-size="12" text-anchor="{anchor}">{label:.4}</text>"#,
            H - MARGIN + 16.0
        );
    }
    for (y, label) in [(sy(y0), y0), (sy(y1), y1)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" font-size="12" text-anchor="end">{label:.4}</text>"#,
            MARGIN - 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        table.param.as_str()
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-size="13" transform="rotate(-90 14 {})">d = u(0)</text>"#,
        H / 2.0,
        H / 2.0
    );

    for (idx, (j, side)) in table.branches().into_iter().enumerate() {
        let color = COLORS[(j - 1) % COLORS.len()];
        let dash = if side == Side::Upper {
            r#" stroke-dasharray="6 3""#
        } else {
            ""
        };
        let pts: Vec<String> = table
            .branch(j, side)
            .map(|r| format!("{:.2},{:.2}", sx(r.param), sy(r.d)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}><title>j = {j}, {side}</title></polyline>"#,
            pts.join(" ")
        );
        for p in &pts {
            let (x, y) = p.split_once(',').expect("formatted above");
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2" fill="{color}"/>"#);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">j = {j} {side}</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 * (idx as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}
