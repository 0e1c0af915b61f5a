//! Face re-tessellation: cut a triangle by disjoint straight chains (plus
//! boundary subdivision points) and triangulate the pieces, keeping global
//! vertex ids consistent across faces.
//!
//! Chains may share endpoints on the boundary but never cross each other;
//! that invariant comes from the callers (a simple loop, or pairwise-disjoint
//! shortest paths).

use crate::geom::Vec2;
use crate::predicates::{orient2d, point_in_triangle};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubdivideError {
    #[error("sliver piece below area tolerance ({0:.3e})")]
    Sliver(f64),
    #[error("chain endpoints not found on any piece boundary")]
    ChainLost,
    #[error("no ear found while triangulating a piece of {0} vertices")]
    NoEar(usize),
}

/// A point of a piece boundary or chain: global vertex id plus its position
/// in the face frame being cut.
#[derive(Clone, Copy, Debug)]
pub struct NodeRef {
    pub gid: usize,
    pub pos: Vec2,
}

/// A straight polyline from boundary to boundary; interior nodes (if any)
/// are strictly inside the face.
#[derive(Clone, Debug)]
pub struct Chain {
    pub nodes: Vec<NodeRef>,
}

/// Crossing-number point-in-polygon test; probes are strictly interior by
/// construction so plain f64 arithmetic is enough.
fn point_in_polygon(poly: &[NodeRef], q: Vec2) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i].pos;
        let b = poly[(i + 1) % n].pos;
        if (a.y > q.y) != (b.y > q.y) {
            let x_cross = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if q.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn polygon_area(poly: &[NodeRef]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].pos.cross(poly[(i + 1) % n].pos);
    }
    s * 0.5
}

/// Split a CCW cycle along the chains into CCW pieces. Each chain's endpoints
/// must appear as cycle nodes (by gid) of exactly one current piece.
pub fn cut_polygon(
    cycle: Vec<NodeRef>,
    chains: &[Chain],
) -> Result<Vec<Vec<NodeRef>>, SubdivideError> {
    let mut pieces = vec![cycle];
    for chain in chains {
        let first = chain.nodes.first().expect("chain has nodes");
        let last = chain.nodes.last().expect("chain has nodes");
        // Probe point strictly inside the owning piece.
        let probe = if chain.nodes.len() > 2 {
            chain.nodes[1].pos
        } else {
            Vec2::lerp(first.pos, last.pos, 0.5)
        };
        let mut owner = None;
        for (pi, piece) in pieces.iter().enumerate() {
            let i0 = piece.iter().position(|n| n.gid == first.gid);
            let i1 = piece.iter().position(|n| n.gid == last.gid);
            if let (Some(i0), Some(i1)) = (i0, i1) {
                if pieces.len() == 1 || point_in_polygon(piece, probe) {
                    owner = Some((pi, i0, i1));
                    break;
                }
            }
        }
        let Some((pi, i0, i1)) = owner else {
            return Err(SubdivideError::ChainLost);
        };
        if i0 == i1 {
            return Err(SubdivideError::ChainLost);
        }
        let piece = pieces.swap_remove(pi);
        let m = piece.len();
        // Forward arc i0 -> i1 plus the chain walked back; then the rest.
        let mut a_side = Vec::new();
        let mut i = i0;
        loop {
            a_side.push(piece[i]);
            if i == i1 {
                break;
            }
            i = (i + 1) % m;
        }
        for node in chain.nodes[1..chain.nodes.len() - 1].iter().rev() {
            a_side.push(*node);
        }
        let mut b_side = Vec::new();
        let mut i = i1;
        loop {
            b_side.push(piece[i]);
            if i == i0 {
                break;
            }
            i = (i + 1) % m;
        }
        for node in chain.nodes[1..chain.nodes.len() - 1].iter() {
            b_side.push(*node);
        }
        pieces.push(a_side);
        pieces.push(b_side);
    }
    Ok(pieces)
}

/// Ear-clip a simple CCW polygon (possibly with collinear boundary runs)
/// into triangles of global vertex ids.
pub fn triangulate_cycle(
    cycle: &[NodeRef],
    eps_area: f64,
) -> Result<Vec<[usize; 3]>, SubdivideError> {
    if polygon_area(cycle) <= eps_area {
        return Err(SubdivideError::Sliver(polygon_area(cycle)));
    }
    let mut idx: Vec<usize> = (0..cycle.len()).collect();
    let mut tris = Vec::with_capacity(cycle.len().saturating_sub(2));
    while idx.len() > 3 {
        let n = idx.len();
        // Preferred ears clear the area floor so collinear runs on
        // subdivided sides never produce degenerate triangles; when the
        // geometry forces it, fall back to the largest positive ear.
        let mut best: Option<(usize, f64)> = None;
        let mut clipped = false;
        for i in 0..n {
            let ip = idx[(i + n - 1) % n];
            let ic = idx[i];
            let inx = idx[(i + 1) % n];
            let (a, b, c) = (cycle[ip].pos, cycle[ic].pos, cycle[inx].pos);
            if orient2d(a, b, c) <= 0.0 {
                continue;
            }
            // No other remaining vertex inside or on the candidate ear.
            let mut blocked = false;
            for &j in &idx {
                if j == ip || j == ic || j == inx {
                    continue;
                }
                if point_in_triangle(cycle[j].pos, a, b, c) {
                    blocked = true;
                    break;
                }
            }
            if blocked {
                continue;
            }
            let area = 0.5 * (b - a).cross(c - a);
            if area <= eps_area {
                if best.map_or(true, |(_, ba)| area > ba) {
                    best = Some((i, area));
                }
                continue;
            }
            tris.push([cycle[ip].gid, cycle[ic].gid, cycle[inx].gid]);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            let Some((i, _)) = best else {
                return Err(SubdivideError::NoEar(idx.len()));
            };
            let n = idx.len();
            let ip = idx[(i + n - 1) % n];
            let ic = idx[i];
            let inx = idx[(i + 1) % n];
            tris.push([cycle[ip].gid, cycle[ic].gid, cycle[inx].gid]);
            idx.remove(i);
        }
    }
    let (a, b, c) = (cycle[idx[0]].pos, cycle[idx[1]].pos, cycle[idx[2]].pos);
    if orient2d(a, b, c) <= 0.0 {
        return Err(SubdivideError::Sliver((b - a).cross(c - a) * 0.5));
    }
    tris.push([cycle[idx[0]].gid, cycle[idx[1]].gid, cycle[idx[2]].gid]);
    Ok(tris)
}

/// Everything needed to re-tessellate one triangle.
#[derive(Clone, Debug)]
pub struct FaceCut {
    pub corner_gids: [usize; 3],
    pub corner_pos: [Vec2; 3],
    /// Subdivision points per local side k (from corner k to corner k+1),
    /// as (parameter along the side, gid); need not be pre-sorted.
    pub edge_points: [Vec<(f64, usize)>; 3],
    pub chains: Vec<Chain>,
}

impl FaceCut {
    pub fn is_trivial(&self) -> bool {
        self.chains.is_empty() && self.edge_points.iter().all(|e| e.is_empty())
    }
}

/// Cut one triangle along its chains; returns CCW triangles of global ids.
pub fn cut_face(fc: &FaceCut, eps_area: f64) -> Result<Vec<[usize; 3]>, SubdivideError> {
    let mut cycle = Vec::new();
    for k in 0..3 {
        cycle.push(NodeRef {
            gid: fc.corner_gids[k],
            pos: fc.corner_pos[k],
        });
        let mut pts = fc.edge_points[k].clone();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let a = fc.corner_pos[k];
        let b = fc.corner_pos[(k + 1) % 3];
        for (t, gid) in pts {
            cycle.push(NodeRef {
                gid,
                pos: Vec2::lerp(a, b, t),
            });
        }
    }
    let pieces = cut_polygon(cycle, &fc.chains)?;
    let mut tris = Vec::new();
    for piece in &pieces {
        tris.extend(triangulate_cycle(piece, eps_area)?);
    }
    Ok(tris)
}
