//! Minimal SVG scenes in mathematical (y-up) coordinates.
//!
//! Geometry is written in world coordinates inside a group whose declared
//! transform flips the y axis and fits the scene bounding box to the canvas.
//! Strokes use `vector-effect="non-scaling-stroke"` so widths stay in pixels.

use std::fmt::Write;

use fixloc_core::geom::{BoundingBox, Point2};

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 40.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22",
];

#[derive(Clone, Debug)]
enum Item {
    Path {
        points: Vec<Point2>,
        closed: bool,
        stroke: String,
        width: f64,
        fill: String,
        dashed: bool,
        arrows: bool,
    },
    Dots {
        points: Vec<Point2>,
        color: String,
        radius_px: f64,
    },
    Marker {
        at: Point2,
        color: String,
        label: String,
    },
}

#[derive(Clone, Debug, Default)]
pub struct Scene {
    title: String,
    items: Vec<Item>,
}

pub struct PathStyle<'a> {
    pub stroke: &'a str,
    pub width: f64,
    pub fill: &'a str,
    pub dashed: bool,
    pub arrows: bool,
}

impl Default for PathStyle<'_> {
    fn default() -> Self {
        PathStyle {
            stroke: "#333333",
            width: 1.5,
            fill: "none",
            dashed: false,
            arrows: false,
        }
    }
}

impl Scene {
    pub fn new(title: impl Into<String>) -> Self {
        Scene {
            title: title.into(),
            items: Vec::new(),
        }
    }

    pub fn path(&mut self, points: &[Point2], closed: bool, style: PathStyle<'_>) -> &mut Self {
        self.items.push(Item::Path {
            points: points.to_vec(),
            closed,
            stroke: style.stroke.into(),
            width: style.width,
            fill: style.fill.into(),
            dashed: style.dashed,
            arrows: style.arrows,
        });
        self
    }

    pub fn dots(&mut self, points: &[Point2], color: &str, radius_px: f64) -> &mut Self {
        self.items.push(Item::Dots {
            points: points.to_vec(),
            color: color.into(),
            radius_px,
        });
        self
    }

    pub fn marker(&mut self, at: Point2, color: &str, label: &str) -> &mut Self {
        self.items.push(Item::Marker {
            at,
            color: color.into(),
            label: label.into(),
        });
        self
    }

    fn bounds(&self) -> BoundingBox {
        let pts = self.items.iter().flat_map(|item| match item {
            Item::Path { points, .. } | Item::Dots { points, .. } => points.clone(),
            Item::Marker { at, .. } => vec![*at],
        });
        let bb = BoundingBox::from_points(pts).unwrap_or(BoundingBox::centered(Point2::ORIGIN, 1.0));
        let pad = 0.02 * bb.width().max(bb.height()).max(1e-9);
        bb.expanded(pad)
    }

    pub fn render(&self) -> String {
        let bb = self.bounds();
        let span = bb.width().max(bb.height());
        let scale = (CANVAS - 2.0 * MARGIN) / span;
        let px = 1.0 / scale;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
            c = CANVAS
        );
        let _ = writeln!(out, "  <title>{}</title>", escape(&self.title));
        let _ = writeln!(out, r##"  <rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="#ffffff"/>"##);
        let _ = writeln!(
            out,
            r#"  <g transform="translate({} {}) scale({} {}) translate({} {})">"#,
            num(MARGIN),
            num(CANVAS - MARGIN),
            num(scale),
            num(-scale),
            num(-bb.min.x),
            num(-bb.min.y)
        );
        let mut labels = Vec::new();
        for item in &self.items {
            match item {
                Item::Path {
                    points,
                    closed,
                    stroke,
                    width,
                    fill,
                    dashed,
                    arrows,
                } => {
                    if points.is_empty() {
                        continue;
                    }
                    let mut d = String::new();
                    for (i, p) in points.iter().enumerate() {
                        let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, num(p.x), num(p.y));
                    }
                    if *closed {
                        d.push('Z');
                    }
                    let dash = if *dashed { r#" stroke-dasharray="6 4""# } else { "" };
                    let _ = writeln!(
                        out,
                        r#"    <path d="{}" fill="{fill}" fill-opacity="0.15" stroke="{stroke}" stroke-width="{}" vector-effect="non-scaling-stroke"{dash}/>"#,
                        d.trim_end(),
                        num(*width)
                    );
                    if *arrows {
                        let n = points.len();
                        let count = if *closed { n } else { n.saturating_sub(1) };
                        for i in 0..count {
                            let (a, b) = (points[i], points[(i + 1) % n]);
                            if let Some(head) = arrow_head(a, b, 8.0 * px) {
                                let _ = writeln!(
                                    out,
                                    r#"    <path d="M{} {} L{} {} L{} {} Z" fill="{stroke}" stroke="none"/>"#,
                                    num(head[0].x),
                                    num(head[0].y),
                                    num(head[1].x),
                                    num(head[1].y),
                                    num(head[2].x),
                                    num(head[2].y)
                                );
                            }
                        }
                    }
                }
                Item::Dots { points, color, radius_px } => {
                    let _ = writeln!(out, r#"    <g fill="{color}" stroke="none">"#);
                    for p in points {
                        let _ = writeln!(
                            out,
                            r#"      <circle cx="{}" cy="{}" r="{}"/>"#,
                            num(p.x),
                            num(p.y),
                            num(radius_px * px)
                        );
                    }
                    let _ = writeln!(out, "    </g>");
                }
                Item::Marker { at, color, label } => {
                    let _ = writeln!(
                        out,
                        r##"    <circle cx="{}" cy="{}" r="{}" fill="{color}" stroke="#000000" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
                        num(at.x),
                        num(at.y),
                        num(5.0 * px)
                    );
                    labels.push((*at, color.clone(), label.clone()));
                }
            }
        }
        let _ = writeln!(out, "  </g>");
        // Text is placed in canvas coordinates so it is not mirrored.
        for (at, color, label) in labels {
            let x = MARGIN + (at.x - bb.min.x) * scale + 8.0;
            let y = CANVAS - MARGIN - (at.y - bb.min.y) * scale - 8.0;
            let _ = writeln!(
                out,
                r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="14" fill="{color}">{}</text>"#,
                num(x),
                num(y),
                escape(&label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Triangle at the midpoint of `[a, b]` pointing from `a` to `b`.
fn arrow_head(a: Point2, b: Point2, size: f64) -> Option<[Point2; 3]> {
    let dir = (b - a).normalized()?;
    let mid = a.lerp(b, 0.5);
    let tip = mid + dir * (0.5 * size);
    let back = mid - dir * (0.5 * size);
    let side = dir.perp() * (0.4 * size);
    Some([tip, back + side, back - side])
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_compact() {
        assert_eq!(num(1.5), "1.5");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(-0.0000001), "0");
    }

    #[test]
    fn scene_is_balanced() {
        let mut s = Scene::new("a < b");
        s.path(&[Point2::ORIGIN, Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)], true, PathStyle {
            arrows: true,
            ..PathStyle::default()
        });
        s.marker(Point2::new(0.2, 0.2), "#ff0000", "q");
        let svg = s.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<g").count(), svg.matches("</g>").count());
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("scale("));
    }
}
