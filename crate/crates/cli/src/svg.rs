//! Static SVG line charts.
//!
//! Output depends only on the input series and axes, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            _ => Err(format!("unknown axis scale `{s}` (expected linear or log)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub scale: Scale,
}

impl Axis {
    pub fn new(label: impl Into<String>, scale: Scale) -> Self {
        Axis {
            label: label.into(),
            scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxesSpec {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvgError {
    #[error("nothing to plot")]
    NoSeries,
    #[error("series {series} is empty")]
    EmptySeries { series: usize },
    #[error("series {series}, point {index}: {axis} = {value} is not finite")]
    NonFinite {
        series: usize,
        index: usize,
        axis: char,
        value: f64,
    },
    #[error("series {series}, point {index}: {axis} = {value} cannot be shown on a log axis")]
    NonPositive {
        series: usize,
        index: usize,
        axis: char,
        value: f64,
    },
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Axis range in transformed coordinates with tick positions and labels.
struct Ticks {
    lo: f64,
    hi: f64,
    marks: Vec<(f64, String)>,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let e = raw.log10().floor();
    let base = 10f64.powf(e);
    let f = raw / base;
    let m = if f < 1.5 {
        1.0
    } else if f < 3.5 {
        2.0
    } else if f < 7.5 {
        5.0
    } else {
        10.0
    };
    m * base
}

fn decade_label(k: i32) -> String {
    match k {
        0 => "1".into(),
        1..=3 => format!("{}", 10i64.pow(k as u32)),
        -3..=-1 => format!("{:.*}", (-k) as usize, 10f64.powi(k)),
        _ => format!("1e{k}"),
    }
}

fn ticks(lo: f64, hi: f64, scale: Scale) -> Ticks {
    match scale {
        Scale::Log => {
            let a = lo.floor() as i32;
            let mut b = hi.ceil() as i32;
            if b == a {
                b += 1;
            }
            Ticks {
                lo: a as f64,
                hi: b as f64,
                marks: (a..=b).map(|k| (k as f64, decade_label(k))).collect(),
            }
        }
        Scale::Linear => {
            let (lo, hi) = if hi > lo {
                (lo, hi)
            } else {
                let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
                (lo - pad, hi + pad)
            };
            let step = nice_step(hi - lo);
            let a = (lo / step).floor();
            let b = (hi / step).ceil();
            let decimals = (-step.log10().floor()).max(0.0) as usize;
            let marks = (0..=(b - a) as i64)
                .map(|i| {
                    let v = (a + i as f64) * step;
                    let mut s = format!("{v:.decimals$}");
                    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
                        s.remove(0);
                    }
                    (v, s)
                })
                .collect();
            Ticks {
                lo: a * step,
                hi: b * step,
                marks,
            }
        }
    }
}

fn transform(v: f64, scale: Scale) -> f64 {
    match scale {
        Scale::Linear => v,
        Scale::Log => v.log10(),
    }
}

fn check(series: &[Series], axes: &AxesSpec) -> Result<(), SvgError> {
    if series.is_empty() {
        return Err(SvgError::NoSeries);
    }
    for (s, ser) in series.iter().enumerate() {
        if ser.points.is_empty() {
            return Err(SvgError::EmptySeries { series: s });
        }
        for (index, &(x, y)) in ser.points.iter().enumerate() {
            for (axis, value, scale) in [('x', x, axes.x.scale), ('y', y, axes.y.scale)] {
                if !value.is_finite() {
                    return Err(SvgError::NonFinite {
                        series: s,
                        index,
                        axis,
                        value,
                    });
                }
                if scale == Scale::Log && value <= 0.0 {
                    return Err(SvgError::NonPositive {
                        series: s,
                        index,
                        axis,
                        value,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Renders the series as a standalone SVG document.
pub fn emit_svg(series: &[Series], axes: &AxesSpec) -> Result<String, SvgError> {
    check(series, axes)?;
    let all = || series.iter().flat_map(|s| s.points.iter());
    let tx: Vec<f64> = all().map(|p| transform(p.0, axes.x.scale)).collect();
    let ty: Vec<f64> = all().map(|p| transform(p.1, axes.y.scale)).collect();
    let range = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)))
    };
    let (xl, xh) = range(&tx);
    let (yl, yh) = range(&ty);
    let xt = ticks(xl, xh, axes.x.scale);
    let yt = ticks(yl, yh, axes.y.scale);

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + (v - xt.lo) / (xt.hi - xt.lo) * pw;
    let py = |v: f64| TOP + ph - (v - yt.lo) / (yt.hi - yt.lo) * ph;

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&axes.title)
    );

    let _ = writeln!(w, r##"<g class="grid" stroke="#dddddd" stroke-width="1">"##);
    for (v, _) in &xt.marks {
        let x = px(*v);
        let _ = writeln!(
            w,
            r#"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            TOP + ph
        );
    }
    for (v, _) in &yt.marks {
        let y = py(*v);
        let _ = writeln!(
            w,
            r#"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#,
            LEFT + pw
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );

    let _ = writeln!(w, r#"<g class="ticks">"#);
    for (v, label) in &xt.marks {
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(*v),
            TOP + ph + 16.0,
            escape(label)
        );
    }
    for (v, label) in &yt.marks {
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py(*v) + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 14.0,
        escape(&axes.x.label)
    );
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&axes.y.label)
    );

    let mut k = 0;
    for (s, ser) in series.iter().enumerate() {
        let color = COLORS[s % COLORS.len()];
        let pts: Vec<(f64, f64)> = ser
            .points
            .iter()
            .map(|_| {
                let p = (px(tx[k]), py(ty[k]));
                k += 1;
                p
            })
            .collect();
        let _ = writeln!(w, r#"<g class="series" fill="{color}" stroke="{color}">"#);
        if pts.len() > 1 {
            let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                w,
                r#"<polyline fill="none" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        for (x, y) in &pts {
            let _ = writeln!(w, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
        }
        let _ = writeln!(w, "</g>");
    }

    let labelled: Vec<(usize, &Series)> = series.iter().enumerate().filter(|(_, s)| !s.label.is_empty()).collect();
    if !labelled.is_empty() {
        let longest = labelled.iter().map(|(_, s)| s.label.chars().count()).max().unwrap_or(0);
        let lw = 40.0 + 7.0 * longest as f64;
        let lx = LEFT + pw - lw - 8.0;
        let ly = TOP + 8.0;
        let _ = writeln!(w, r#"<g class="legend">"#);
        let _ = writeln!(
            w,
            r##"<rect x="{lx:.2}" y="{ly:.2}" width="{lw:.2}" height="{:.2}" fill="white" stroke="#999999"/>"##,
            8.0 + 18.0 * labelled.len() as f64
        );
        for (row, (s, ser)) in labelled.iter().enumerate() {
            let color = COLORS[s % COLORS.len()];
            let y = ly + 16.0 + 18.0 * row as f64;
            let _ = writeln!(
                w,
                r#"<g class="legend-entry"><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
                lx + 8.0,
                y - 4.0,
                lx + 28.0,
                y - 4.0,
                lx + 34.0,
                y,
                escape(&ser.label)
            );
        }
        let _ = writeln!(w, "</g>");
    }
    let _ = writeln!(w, "</svg>");
    Ok(out)
}
