//! Static SVG line chart of priming effect against post-priming batches.

use std::fmt::Write as _;

use crate::experiments::{Condition, DecayRecord, Overlap};
use crate::model::Construction;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 55.0;

fn style(cond: Condition) -> (&'static str, &'static str) {
    let color = match cond.prime_structure {
        Construction::Do => "#1f77b4",
        Construction::Po => "#d62728",
    };
    let dash = match cond.overlap {
        Overlap::Same => "none",
        Overlap::Different => "6,4",
    };
    (color, dash)
}

/// Round `span / 5` to a 1-2-5 step.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// One line per condition, with ±1 standard-error whiskers. Output depends
/// only on the records, so identical records give identical bytes.
pub fn decay_chart(records: &[DecayRecord]) -> String {
    let max_b = records.iter().map(|r| r.n_batches).max().unwrap_or(0);
    let lo = records
        .iter()
        .map(|r| r.effect - r.std_error)
        .fold(0.0_f64, f64::min);
    let hi = records
        .iter()
        .map(|r| r.effect + r.std_error)
        .fold(0.0_f64, f64::max);
    let step = tick_step((hi - lo).max(1e-6));
    let y_min = (lo / step).floor() * step;
    let y_max = ((hi / step).ceil() * step).max(y_min + step);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |b: usize| {
        if max_b == 0 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + plot_w * b as f64 / max_b as f64
        }
    };
    let y_of = |v: f64| MARGIN_TOP + plot_h * (y_max - v) / (y_max - y_min);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // Horizontal grid and y ticks.
    let n_ticks = ((y_max - y_min) / step).round() as i64;
    for i in 0..=n_ticks {
        let v = y_min + step * i as f64;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            MARGIN_LEFT - 6.0,
            y + 4.0
        );
    }
    for b in 0..=max_b {
        let x = x_of(b);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{b}</text>"#,
            MARGIN_TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN_LEFT:.2}" y="{MARGIN_TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">additional batches of post-priming data</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18,{:.2}) rotate(-90)" text-anchor="middle">priming effect (log-odds)</text>"#,
        MARGIN_TOP + plot_h / 2.0
    );

    for (li, cond) in Condition::ALL.into_iter().enumerate() {
        let mut pts: Vec<&DecayRecord> = records.iter().filter(|r| r.condition == cond).collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by_key(|r| r.n_batches);
        let (color, dash) = style(cond);
        let path: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", x_of(r.n_batches), y_of(r.effect)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/>"#,
            path.join(" ")
        );
        for r in &pts {
            let x = x_of(r.n_batches);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                y_of(r.effect - r.std_error),
                y_of(r.effect + r.std_error)
            );
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                y_of(r.effect)
            );
        }
        let ly = MARGIN_TOP + 12.0 + 22.0 * li as f64;
        let lx = WIDTH - MARGIN_RIGHT + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/>"#,
            lx + 30.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{} prime, {}</text>"#,
            lx + 36.0,
            ly + 4.0,
            cond.prime_structure,
            cond.overlap
        );
    }
    s.push_str("</svg>\n");
    s
}
