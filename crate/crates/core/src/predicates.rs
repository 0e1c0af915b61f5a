//! Exact planar predicates (adaptive-precision, after Shewchuk) and the
//! segment-intersection classifications built on them.
//!
//! Everything here decides signs exactly for the given f64 coordinates; no
//! tolerances are involved. Tolerance-based construction geometry lives
//! elsewhere — these predicates are for *certification*.

use crate::geom::Vec2;

fn coord(p: Vec2) -> robust::Coord<f64> {
    robust::Coord { x: p.x, y: p.y }
}

/// Exact sign of the signed area of triangle `(a, b, c)`:
/// positive iff the triangle winds counterclockwise.
pub fn orient2d(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Ccw,
    Cw,
    Collinear,
}

pub fn orientation(a: Vec2, b: Vec2, c: Vec2) -> Orientation {
    let d = orient2d(a, b, c);
    if d > 0.0 {
        Orientation::Ccw
    } else if d < 0.0 {
        Orientation::Cw
    } else {
        Orientation::Collinear
    }
}

/// Exact test: does `p` lie on the closed segment `[a, b]`?
pub fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    if orient2d(a, b, p) != 0.0 {
        return false;
    }
    let (lox, hix) = if a.x <= b.x { (a.x, b.x) } else { (b.x, a.x) };
    let (loy, hiy) = if a.y <= b.y { (a.y, b.y) } else { (b.y, a.y) };
    lox <= p.x && p.x <= hix && loy <= p.y && p.y <= hiy
}

/// Exact test: do the closed segments `[a, b]` and `[c, d]` share any point?
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Exact test for a *proper* crossing: the open interiors intersect
/// transversally.
pub fn segments_cross_properly(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Exact test: do two closed segments that share the endpoint `shared`
/// intersect anywhere besides that endpoint? `a` and `b` are the far
/// endpoints of the two segments.
pub fn adjacent_segments_overlap(shared: Vec2, a: Vec2, b: Vec2) -> bool {
    if orient2d(shared, a, b) != 0.0 {
        return false;
    }
    // Collinear: they overlap iff b is on [shared, a] beyond the shared point,
    // or a is on [shared, b].
    (on_segment(shared, a, b) && b != shared) || (on_segment(shared, b, a) && a != shared)
}

/// Exact point-in-triangle test (closed triangle, any winding).
pub fn point_in_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    let d1 = orient2d(a, b, p);
    let d2 = orient2d(b, c, p);
    let d3 = orient2d(c, a, p);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}
