//! SVG rendering of unfoldings: the boundary path, marker circles, and the
//! supporting segment, at 1 user unit per length unit.

use crate::geom::Vec2;
use crate::unfolding::{Marker, MarkerKind, Unfolding};
use std::fmt::Write;

fn marker_style(kind: &MarkerKind) -> (&'static str, f64) {
    match kind {
        MarkerKind::LoopPoint => ("#d62728", 0.035),
        MarkerKind::VertexImage => ("#1f77b4", 0.028),
        MarkerKind::Projection => ("#2ca02c", 0.022),
        MarkerKind::QCorner => ("#7f7f7f", 0.018),
    }
}

/// Render the unfolding as a standalone SVG document. The viewBox fits the
/// polygon with a 5% margin; y is flipped so the layout reads as plotted.
pub fn render(unf: &Unfolding) -> String {
    let poly = &unf.polygon;
    let (mut lo, mut hi) = (
        Vec2::new(f64::INFINITY, f64::INFINITY),
        Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in poly {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let span = (hi - lo).norm().max(1e-12);
    let margin = 0.05 * (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let (x0, y0) = (lo.x - margin, lo.y - margin);
    let (w, h) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"800\" height=\"{}\">",
        x0,
        -(y0 + h),
        w,
        h,
        (800.0 * h / w).round()
    );
    let _ = writeln!(out, "<g stroke-linejoin=\"round\">");

    let mut d = String::new();
    for (i, p) in poly.iter().enumerate() {
        let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, p.x, -p.y);
    }
    d.push_str(" Z");
    let _ = writeln!(
        out,
        "<path d=\"{}\" fill=\"#fdf6e3\" stroke=\"#333\" stroke-width=\"{}\"/>",
        d,
        0.004 * span
    );

    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#d62728\" stroke-width=\"{}\"/>",
        unf.s_from.x,
        -unf.s_from.y,
        unf.s_to.x,
        -unf.s_to.y,
        0.012 * span
    );

    for Marker { kind, position, .. } in &unf.markers {
        let (color, r) = marker_style(kind);
        let _ = writeln!(
            out,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>",
            position.x,
            -position.y,
            r * span,
            color
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    // Rendering is exercised end to end by the pipeline tests; here we only
    // check the document skeleton on a tiny hand-made unfolding.
    use super::*;
    use crate::unfolding::{certify_simple_polygon, PlanarDevelopment, RunLoc, SupportingSegment};

    #[test]
    fn renders_document() {
        use crate::geom::Iso2;
        use crate::loops::Side;
        let poly = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let cert = certify_simple_polygon(&poly).unwrap();
        let dev = PlanarDevelopment {
            side: Side::Left,
            placements: vec![Iso2::IDENTITY],
            boundary: Vec::new(),
            edge_tags: Vec::new(),
            with_triangles: false,
            area: 1.0,
            face_parent: Vec::new(),
            triangle_specs: Vec::new(),
            vert_info: Vec::new(),
            loop_len: 4.0,
        };
        let unf = Unfolding {
            polygon: poly,
            markers: vec![Marker {
                kind: MarkerKind::LoopPoint,
                vertex: None,
                position: Vec2::new(0.0, 0.0),
            }],
            s: SupportingSegment {
                arc_from: 0.0,
                arc_to: 1.0,
                dev1_run: (RunLoc { edge: 0, t: 0.0 }, RunLoc { edge: 0, t: 1.0 }),
                dev2_run: (RunLoc { edge: 0, t: 0.0 }, RunLoc { edge: 0, t: 1.0 }),
            },
            s_from: Vec2::new(0.0, 0.0),
            s_to: Vec2::new(1.0, 0.0),
            dev1: dev.clone(),
            dev2: dev,
            area: 1.0,
            certificate: cert,
            x_image_angle_sum: 0.0,
        };
        let svg = render(&unf);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<path"));
        assert!(svg.contains("circle"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
