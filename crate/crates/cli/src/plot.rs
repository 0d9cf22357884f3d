//! Static SVG charts over experiment records: distortion-vs-ratio lines per
//! filter length, per-channel box plots, and a (cr, F) heat map.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use eegc_core::experiment::{box_summary, ExperimentRecord};
use eegc_core::Error;

use crate::CmdError;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 140.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 58.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn no_records() -> CmdError {
    CmdError::Data(Error::Invalid("no records to plot".into()).to_string())
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(1e-12);
        MARGIN_LEFT + (v - self.x_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(1e-12);
        HEIGHT - MARGIN_BOTTOM - (v - self.y_min) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open_svg(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        WIDTH, HEIGHT, WIDTH, HEIGHT
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect width="100%" height="100%" fill="white"/><text x="{}" y="20" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        title
    )
    .unwrap();
    s
}

fn axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=5 {
        let xv = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 5.0;
        let yv = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 5.0;
        let xp = frame.x(xv);
        let yp = frame.y(yv);
        writeln!(
            s,
            r#"<line x1="{xp}" y1="{y0}" x2="{xp}" y2="{}" stroke="black"/><text x="{xp}" y="{}" text-anchor="middle">{:.4}</text>"#,
            y0 + 5.0,
            y0 + 20.0,
            xv
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{}" y1="{yp}" x2="{x0}" y2="{yp}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{:.4}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            yp + 4.0,
            yv
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 16.0,
        x_label
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        y_label
    )
    .unwrap();
}

/// Mean PRD per (cr, F) pair, keyed by exact bit patterns so identical grid
/// values group together.
fn group_means(records: &[ExperimentRecord]) -> BTreeMap<(u32, u64), (f64, usize)> {
    let mut acc: BTreeMap<(u32, u64), (f64, usize)> = BTreeMap::new();
    for r in records {
        let entry = acc.entry((r.filter_length, r.cr.to_bits())).or_insert((0.0, 0));
        entry.0 += r.prd;
        entry.1 += 1;
    }
    acc
}

/// Distortion vs compression ratio, one polyline per filter length.
pub fn lines(records: &[ExperimentRecord]) -> Result<String, CmdError> {
    if records.is_empty() {
        return Err(no_records());
    }
    let means = group_means(records);
    let mut series: BTreeMap<u32, Vec<(f64, f64)>> = BTreeMap::new();
    for (&(f, cr_bits), &(sum, n)) in &means {
        series
            .entry(f)
            .or_default()
            .push((f64::from_bits(cr_bits), sum / n as f64));
    }
    let xs: Vec<f64> = series.values().flatten().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = series.values().flatten().map(|&(_, y)| y).collect();
    let frame = Frame {
        x_min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        x_max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        y_min: 0.0,
        y_max: ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) * 1.05,
    };
    let mut s = open_svg("Distortion vs compression ratio");
    axes(&mut s, &frame, "compression ratio (%)", "PRD (%)");
    for (i, (f, points)) in series.iter_mut().enumerate() {
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y)))
            .collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            path.join(" "),
            color
        )
        .unwrap();
        let ly = MARGIN_TOP + 16.0 * i as f64;
        writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="3"/><text x="{}" y="{}">F = {}</text>"#,
            WIDTH - MARGIN_RIGHT + 10.0,
            WIDTH - MARGIN_RIGHT + 34.0,
            color,
            WIDTH - MARGIN_RIGHT + 40.0,
            ly + 4.0,
            f
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Log-distortion box plot per channel id.
pub fn boxes(records: &[ExperimentRecord]) -> Result<String, CmdError> {
    let mut groups: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in records {
        if r.log_prd.is_finite() {
            groups.entry(r.channel).or_default().push(r.log_prd);
        }
    }
    if groups.is_empty() {
        return Err(no_records());
    }
    let summaries: Vec<_> = groups
        .iter()
        .map(|(&ch, values)| box_summary(ch, &format!("channel {}", ch), values))
        .collect::<Result<_, _>>()
        .map_err(|e: Error| CmdError::Data(e.to_string()))?;

    let lo = summaries
        .iter()
        .flat_map(|b| b.outliers.iter().copied().chain([b.min]))
        .fold(f64::INFINITY, f64::min);
    let hi = summaries
        .iter()
        .flat_map(|b| b.outliers.iter().copied().chain([b.max]))
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo).max(1e-6);
    let frame = Frame {
        x_min: 0.0,
        x_max: summaries.len() as f64,
        y_min: lo - pad,
        y_max: hi + pad,
    };
    let mut s = open_svg("Log-distortion by channel model");
    axes(&mut s, &frame, "channel model", "log10 PRD");
    let half_box = 0.28;
    for (i, b) in summaries.iter().enumerate() {
        let cx = i as f64 + 0.5;
        let (x_lo, x_hi) = (frame.x(cx - half_box), frame.x(cx + half_box));
        let xc = frame.x(cx);
        let color = PALETTE[i % PALETTE.len()];
        // whiskers
        for (a, b2) in [(b.min, b.q1), (b.q3, b.max)] {
            writeln!(
                s,
                r#"<line x1="{xc}" y1="{:.2}" x2="{xc}" y2="{:.2}" stroke="black"/>"#,
                frame.y(a),
                frame.y(b2)
            )
            .unwrap();
        }
        for v in [b.min, b.max] {
            writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
                frame.x(cx - 0.14),
                frame.y(v),
                frame.x(cx + 0.14),
                frame.y(v)
            )
            .unwrap();
        }
        // box and median
        writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" fill-opacity="0.35" stroke="black"/>"#,
            x_lo,
            frame.y(b.q3),
            x_hi - x_lo,
            frame.y(b.q1) - frame.y(b.q3),
            color
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{x_lo}" y1="{:.2}" x2="{x_hi}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            frame.y(b.median),
            frame.y(b.median)
        )
        .unwrap();
        for &v in &b.outliers {
            writeln!(
                s,
                r#"<circle cx="{xc}" cy="{:.2}" r="2.2" fill="none" stroke="{}"/>"#,
                frame.y(v),
                color
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{xc}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_BOTTOM + 20.0,
            b.channel
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn heat_color(t: f64) -> String {
    // dark blue -> yellow -> red
    let stops = [(0.13, 0.16, 0.55), (0.99, 0.91, 0.21), (0.84, 0.11, 0.11)];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let (a, b, frac) = if t <= 1.0 {
        (stops[0], stops[1], t)
    } else {
        (stops[1], stops[2], t - 1.0)
    };
    let mix = |u: f64, v: f64| ((u + (v - u) * frac) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Mean-PRD heat map over the (cr, F) grid.
pub fn surface(records: &[ExperimentRecord]) -> Result<String, CmdError> {
    if records.is_empty() {
        return Err(no_records());
    }
    let means = group_means(records);
    let mut crs: Vec<u64> = means.keys().map(|&(_, cr)| cr).collect();
    crs.sort_by(|a, b| f64::from_bits(*a).partial_cmp(&f64::from_bits(*b)).unwrap());
    crs.dedup();
    let mut fs: Vec<u32> = means.keys().map(|&(f, _)| f).collect();
    fs.sort_unstable();
    fs.dedup();

    let values: Vec<f64> = means.values().map(|&(sum, n)| sum / n as f64).collect();
    let v_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let v_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut s = open_svg("Mean distortion over the (cr, F) grid");
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let cell_w = plot_w / crs.len() as f64;
    let cell_h = plot_h / fs.len() as f64;
    for (xi, &cr_bits) in crs.iter().enumerate() {
        for (yi, &f) in fs.iter().enumerate() {
            let Some(&(sum, n)) = means.get(&(f, cr_bits)) else {
                continue;
            };
            let value = sum / n as f64;
            let t = if v_max > v_min {
                (value - v_min) / (v_max - v_min)
            } else {
                0.5
            };
            let x = MARGIN_LEFT + xi as f64 * cell_w;
            let y = HEIGHT - MARGIN_BOTTOM - (yi + 1) as f64 * cell_h;
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>cr={} F={} PRD={:.3}%</title></rect>"#,
                x,
                y,
                cell_w + 0.5,
                cell_h + 0.5,
                heat_color(t),
                f64::from_bits(cr_bits),
                f,
                value
            )
            .unwrap();
        }
    }
    // axis labels on cell centers (thinned to at most ~12 ticks)
    let x_step = (crs.len() / 12).max(1);
    for (xi, &cr_bits) in crs.iter().enumerate().step_by(x_step) {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + (xi as f64 + 0.5) * cell_w,
            HEIGHT - MARGIN_BOTTOM + 20.0,
            f64::from_bits(cr_bits)
        )
        .unwrap();
    }
    for (yi, &f) in fs.iter().enumerate() {
        writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            HEIGHT - MARGIN_BOTTOM - (yi as f64 + 0.5) * cell_h + 4.0,
            f
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">compression ratio (%)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">filter length</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    )
    .unwrap();
    // color bar
    let bar_x = WIDTH - MARGIN_RIGHT + 24.0;
    for i in 0..40 {
        let t = 1.0 - i as f64 / 39.0;
        writeln!(
            s,
            r#"<rect x="{bar_x}" y="{:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            MARGIN_TOP + i as f64 * plot_h / 40.0,
            plot_h / 40.0 + 0.5,
            heat_color(t)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}">{:.2}%</text><text x="{}" y="{}">{:.2}%</text>"#,
        bar_x + 24.0,
        MARGIN_TOP + 10.0,
        v_max,
        bar_x + 24.0,
        MARGIN_TOP + plot_h,
        v_min
    )
    .unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}
