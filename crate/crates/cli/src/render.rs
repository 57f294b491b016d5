//! SVG rendering of the FPR–TPR plane.
//!
//! Output is SVG 1.1 and byte-stable: coordinates are printed with two
//! decimals and elements are emitted in spec order.

use std::fmt::Write as _;

use fairness_core::fraction::{self, to_f64};
use fairness_core::{Fraction, PerformanceLine, PlanePoint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::AuditError;

/// A number given either as a JSON number or as a fraction string such as
/// `"1/3"`. Numbers go through their shortest decimal form, so `0.1` is
/// exactly one tenth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NumRepr", into = "String")]
pub struct Num(pub Fraction);

#[derive(Deserialize)]
#[serde(untagged)]
enum NumRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<NumRepr> for Num {
    type Error = String;

    fn try_from(value: NumRepr) -> Result<Self, Self::Error> {
        let parsed = match value {
            NumRepr::Number(x) => fraction::from_f64_decimal(x),
            NumRepr::Text(s) => fraction::parse_fraction(&s),
        };
        parsed.map(Num).map_err(|e| e.to_string())
    }
}

impl From<Num> for String {
    fn from(value: Num) -> Self {
        value.0.to_string()
    }
}

impl From<Fraction> for Num {
    fn from(value: Fraction) -> Self {
        Num(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotLine {
    pub base_rate: Num,
    pub target: Num,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl PlotLine {
    pub fn from_line(line: &PerformanceLine, group: Option<u8>) -> Self {
        Self {
            base_rate: line.base_rate().clone().into(),
            target: line.target().clone().into(),
            group,
            label: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotCurve {
    pub vertices: Vec<[Num; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub fpr: Num,
    pub tpr: Num,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn yes() -> bool {
    true
}

/// Everything drawn on one FPR–TPR plane. Axes are always FPR (x) and TPR (y).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default)]
    pub lines: Vec<PlotLine>,
    #[serde(default)]
    pub curves: Vec<PlotCurve>,
    #[serde(default)]
    pub points: Vec<PlotPoint>,
    #[serde(default = "yes")]
    pub chance_line: bool,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            title: None,
            lines: Vec::new(),
            curves: Vec::new(),
            points: Vec::new(),
            chance_line: true,
        }
    }
}

impl PlotSpec {
    pub fn from_json(text: &str) -> Result<Self, AuditError> {
        Ok(serde_json::from_str(text)?)
    }
}

const WIDTH: f64 = 560.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 80.0;
const TOP: f64 = 50.0;
const SIDE: f64 = 400.0;

fn sx(fpr: f64) -> f64 {
    LEFT + SIDE * fpr
}

fn sy(tpr: f64) -> f64 {
    TOP + SIDE * (1.0 - tpr)
}

fn color(group: Option<u8>) -> &'static str {
    match group {
        Some(0) => "#1f77b4",
        Some(1) => "#d62728",
        _ => "#555555",
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Part of `(1 − p)·x + p·y = q` inside the unit square, if any.
pub fn clip_line(base_rate: &Fraction, target: &Fraction) -> Option<(PlanePoint, PlanePoint)> {
    let a = Fraction::one() - base_rate;
    let b = base_rate.clone();
    let zero = Fraction::zero();
    let one = Fraction::one();
    let inside = |v: &Fraction| *v >= zero && *v <= one;
    let mut hits: Vec<PlanePoint> = Vec::new();
    if !b.is_zero() {
        for x in [&zero, &one] {
            let y = (target - &a * x) / &b;
            if inside(&y) {
                hits.push(PlanePoint::new(x.clone(), y));
            }
        }
    }
    if !a.is_zero() {
        for y in [&zero, &one] {
            let x = (target - &b * y) / &a;
            if inside(&x) {
                hits.push(PlanePoint::new(x, y.clone()));
            }
        }
    }
    hits.sort_by(|l, r| (&l.fpr, &l.tpr).cmp(&(&r.fpr, &r.tpr)));
    hits.dedup();
    match (hits.first(), hits.last()) {
        (Some(first), Some(last)) => Some((first.clone(), last.clone())),
        _ => None,
    }
}

fn tick(v: f64) -> String {
    format!("{v:.1}")
}

/// Renders the plane as an SVG document.
pub fn render_plane(spec: &PlotSpec) -> String {
    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        w,
        r#"<rect x="0" y="0" width="{WIDTH:.0}" height="{HEIGHT:.0}" fill="white"/>"#
    );
    if let Some(title) = &spec.title {
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="28.00" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + SIDE / 2.0,
            escape(title)
        );
    }

    let _ = writeln!(w, r##"<g id="grid" stroke="#e0e0e0" stroke-width="1">"##);
    for i in 1..10 {
        let v = f64::from(i) / 10.0;
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            sx(v),
            sy(0.0),
            sx(v),
            sy(1.0)
        );
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            sx(0.0),
            sy(v),
            sx(1.0),
            sy(v)
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(
        w,
        r#"<rect id="frame" x="{:.2}" y="{:.2}" width="{SIDE:.2}" height="{SIDE:.2}" fill="none" stroke="black"/>"#,
        sx(0.0),
        sy(1.0)
    );

    let _ = writeln!(w, r#"<g id="axes">"#);
    for i in (0..=10).step_by(2) {
        let v = f64::from(i) / 10.0;
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(v),
            sy(0.0) + 18.0,
            tick(v)
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            sx(0.0) - 8.0,
            sy(v) + 4.0,
            tick(v)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">FPR</text>"#,
        sx(0.5),
        sy(0.0) + 40.0
    );
    let _ = writeln!(
        w,
        r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 {x:.2} {y:.2})">TPR</text>"#,
        x = sx(0.0) - 45.0,
        y = sy(0.5)
    );
    let _ = writeln!(w, "</g>");

    if spec.chance_line {
        let _ = writeln!(
            w,
            r##"<line id="chance-line" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888888" stroke-dasharray="6 4"/>"##,
            sx(0.0),
            sy(0.0),
            sx(1.0),
            sy(1.0)
        );
    }

    for (i, curve) in spec.curves.iter().enumerate() {
        let pts: Vec<String> = curve
            .vertices
            .iter()
            .map(|[x, y]| {
                format!(
                    "{:.2},{:.2}",
                    sx(to_f64(&x.0).clamp(0.0, 1.0)),
                    sy(to_f64(&y.0).clamp(0.0, 1.0))
                )
            })
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline class="roc" id="curve-{i}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            color(curve.group)
        );
        if let (Some(label), Some([x, y])) =
            (&curve.label, curve.vertices.get(curve.vertices.len() / 2))
        {
            let _ = writeln!(
                w,
                r#"<text x="{:.2}" y="{:.2}" fill="{}">{}</text>"#,
                sx(to_f64(&x.0)) + 6.0,
                sy(to_f64(&y.0)) - 6.0,
                color(curve.group),
                escape(label)
            );
        }
    }

    for (i, line) in spec.lines.iter().enumerate() {
        let Some((start, end)) = clip_line(&line.base_rate.0, &line.target.0) else {
            continue;
        };
        let (x1, y1, x2, y2) = (
            sx(to_f64(&start.fpr)),
            sy(to_f64(&start.tpr)),
            sx(to_f64(&end.fpr)),
            sy(to_f64(&end.tpr)),
        );
        let stroke = color(line.group);
        let _ = writeln!(
            w,
            r#"<line class="performance-line" id="line-{i}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="1.5"/>"#
        );
        let label = line.label.clone().unwrap_or_else(|| {
            let name = line.group.map(|g| format!("L{g} ")).unwrap_or_default();
            format!("{name}(p={}, q*={})", line.base_rate.0, line.target.0)
        });
        // Label the end nearest the top-left so labels of crossing lines separate.
        let (lx, ly) = if y1 < y2 { (x1, y1) } else { (x2, y2) };
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" fill="{stroke}">{}</text>"#,
            lx + 4.0,
            (ly - 4.0 - 14.0 * i as f64).max(TOP - 6.0),
            escape(&label)
        );
    }

    for (i, point) in spec.points.iter().enumerate() {
        let (x, y) = (sx(to_f64(&point.fpr.0)), sy(to_f64(&point.tpr.0)));
        let stroke = color(point.group);
        let _ = writeln!(
            w,
            r#"<circle class="operation-point" id="point-{i}" cx="{x:.2}" cy="{y:.2}" r="5" fill="{stroke}" stroke="black"/>"#
        );
        let mut label = match point.group {
            Some(g) => format!("S={g} "),
            None => String::new(),
        };
        let _ = write!(
            label,
            "({:.3}, {:.3})",
            to_f64(&point.fpr.0),
            to_f64(&point.tpr.0)
        );
        if let Some(extra) = &point.label {
            let _ = write!(label, " {extra}");
        }
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" fill="{stroke}">{}</text>"#,
            x + 8.0,
            y + 16.0 + 14.0 * i as f64,
            escape(&label)
        );
    }
    let _ = writeln!(w, "</svg>");
    svg
}
