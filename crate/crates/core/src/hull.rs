//! 3D convex hulls by exact facet enumeration, for test-fixture generation.
//!
//! Every point triple is tested against all remaining points with the
//! adaptive-precision `orient3d` predicate; a triple is a facet exactly when
//! all other points lie strictly on one side. Quadratic-ish and only meant
//! for the small random polytopes the fixtures use.

use crate::geom::Vec3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HullError {
    #[error("need at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

fn coord(p: Vec3) -> robust::Coord3D<f64> {
    robust::Coord3D {
        x: p.x,
        y: p.y,
        z: p.z,
    }
}

/// Outward-CCW triangular facets of the convex hull. Requires the points to
/// be in strictly convex position (no 4 coplanar, none interior); returns
/// `Degenerate` otherwise.
pub fn convex_hull_facets(points: &[Vec3]) -> Result<Vec<[usize; 3]>, HullError> {
    let n = points.len();
    if n < 4 {
        return Err(HullError::TooFewPoints(n));
    }
    let mut facets = Vec::new();
    let mut on_hull = vec![false; n];
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let mut pos = 0usize;
                let mut neg = 0usize;
                for l in 0..n {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    let s = robust::orient3d(
                        coord(points[i]),
                        coord(points[j]),
                        coord(points[k]),
                        coord(points[l]),
                    );
                    if s > 0.0 {
                        pos += 1;
                    } else if s < 0.0 {
                        neg += 1;
                    } else {
                        return Err(HullError::Degenerate(format!(
                            "points {i},{j},{k},{l} are coplanar"
                        )));
                    }
                    if pos > 0 && neg > 0 {
                        break;
                    }
                }
                if pos > 0 && neg > 0 {
                    continue;
                }
                // orient3d > 0 means the witness lies below the CCW plane, so
                // all-positive keeps (i, j, k) outward as given.
                let f = if pos > 0 { [i, j, k] } else { [i, k, j] };
                facets.push(f);
                for v in f {
                    on_hull[v] = true;
                }
            }
        }
    }
    if on_hull.iter().any(|h| !h) {
        return Err(HullError::Degenerate("interior point in input".into()));
    }
    if facets.len() != 2 * n - 4 {
        return Err(HullError::Degenerate(format!(
            "{} facets for {n} vertices (expected {})",
            facets.len(),
            2 * n - 4
        )));
    }
    Ok(facets)
}
