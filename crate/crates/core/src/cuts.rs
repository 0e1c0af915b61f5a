//! Exact shortest paths from interior vertices to the loop boundary, an
//! independent Steiner-graph Dijkstra oracle, and the structural checks on
//! the resulting cut set (orthogonal arrival, pairwise disjointness).
//!
//! The exact search enumerates face sequences from the source with a funnel
//! of admissible directions per sequence, developed face by face. Funnels
//! pinch shut at interior vertices (shortest paths on a convex surface never
//! pass through positive-curvature vertices), and every boundary window
//! yields perpendicular-foot or endpoint candidates. States expand
//! best-first by a lower bound, so search stops once all open bounds exceed
//! the best candidate.

use crate::geodesics::{develop_strip, CurveSeg, PathSeg, SegmentSet};
use crate::geom::{angle_between, Vec2, Vec3, PI};
use crate::loops::{Half, Provenance, QuasigeodesicLoop, Side};
use crate::mesh::{Polyhedron, SurfacePoint, TriMesh};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CutError {
    #[error("shortest-path propagation failed: {0}")]
    PropagationFailure(String),
}

/// One shortest path sp(v) from an interior vertex to the loop.
#[derive(Clone, Debug)]
pub struct VertexCut {
    /// Original polyhedron vertex id.
    pub vertex: usize,
    /// Local vertex id in the half mesh.
    pub local_vertex: usize,
    /// Path corners on the half mesh: the vertex, then edge crossings, then
    /// the projection.
    pub points: Vec<SurfacePoint>,
    /// Per-face straight pieces in half-mesh face frames.
    pub segs: Vec<PathSeg>,
    pub length: f64,
    /// Projection v′ on the boundary (half-local surface point).
    pub projection: SurfacePoint,
    /// Arc position of v′ along Q, measured from x.
    pub projection_arc: f64,
    /// Angles between the path and Q at v′, (backward, forward) along the
    /// loop travel direction.
    pub alpha: (f64, f64),
    /// Whether v′ is a true corner of Q (bent corner or the loop point).
    pub at_corner: bool,
    pub tie_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Pin {
    /// Window endpoint is the edge's own vertex, reachable by a clean ray.
    EdgeVertex(usize),
    /// Endpoint produced by a wedge clip; paths ending exactly there graze
    /// an earlier vertex and cannot be minimal.
    Blocked,
}

#[derive(Clone, Debug)]
struct FunnelState {
    parent: Option<usize>,
    /// Window half-edge, with coordinates in its own face's frame.
    he: usize,
    /// Source image in that face's frame.
    src: Vec2,
    /// Clipped window on `he`; the cone wa -> wb is CCW around the source.
    wa: Vec2,
    wb: Vec2,
    pin_a: Pin,
    pin_b: Pin,
    lb: f64,
}

#[derive(Clone, Copy, Debug)]
struct QueueItem {
    lb: f64,
    idx: usize,
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.lb == other.lb && self.idx == other.idx
    }
}
impl Eq for QueueItem {}
impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap by (lb, idx) through BinaryHeap's max ordering.
        other
            .lb
            .partial_cmp(&self.lb)
            .unwrap_or(Ordering::Equal)
            .then(other.idx.cmp(&self.idx))
    }
}

#[derive(Clone, Copy, Debug)]
enum CandidateEnd {
    /// Perpendicular foot on the window's boundary edge, at parameter t of
    /// the clipped window.
    Foot { t: f64 },
    /// Path ends at a boundary vertex (local id).
    Vertex { v: usize },
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    len: f64,
    state: usize,
    end: CandidateEnd,
}

fn dist_point_segment(p: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let e = b - a;
    let n2 = e.norm2();
    if n2 <= 0.0 {
        return (p.dist(a), 0.0);
    }
    let t = ((p - a).dot(e) / n2).clamp(0.0, 1.0);
    (p.dist(a + e * t), t)
}

/// Upper bound via Dijkstra on the half's vertex-edge graph, from the source
/// to any boundary vertex.
fn edge_graph_bound(mesh: &TriMesh, src: usize, on_boundary: &[bool]) -> f64 {
    let n = mesh.verts.len();
    let mut dist = vec![f64::INFINITY; n];
    dist[src] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(QueueItem { lb: 0.0, idx: src });
    let mut best = f64::INFINITY;
    while let Some(QueueItem { lb, idx }) = heap.pop() {
        if lb > dist[idx] || lb >= best {
            continue;
        }
        if on_boundary[idx] {
            best = best.min(lb);
            continue;
        }
        let fan = mesh.fan(idx);
        for &he in &fan.hes {
            let w = mesh.head(he);
            let d = lb + mesh.edge_len(he);
            if d < dist[w] {
                dist[w] = d;
                heap.push(QueueItem { lb: d, idx: w });
            }
        }
    }
    best
}

struct Search {
    states: Vec<FunnelState>,
    heap: BinaryHeap<QueueItem>,
    candidates: Vec<Candidate>,
    best: f64,
    on_boundary: Vec<bool>,
    cone_tol: f64,
}

impl Search {
    fn push_state(&mut self, st: FunnelState) {
        // Candidate paths ending at reachable boundary-vertex endpoints.
        for (pin, w) in [(st.pin_a, st.wa), (st.pin_b, st.wb)] {
            if let Pin::EdgeVertex(v) = pin {
                if self.on_boundary[v] {
                    let len = st.src.dist(w);
                    if len < self.best {
                        self.best = len;
                    }
                    self.candidates.push(Candidate {
                        len,
                        state: self.states.len(),
                        end: CandidateEnd::Vertex { v },
                    });
                }
            }
        }
        let item = QueueItem {
            lb: st.lb,
            idx: self.states.len(),
        };
        self.states.push(st);
        self.heap.push(item);
    }
}

fn tie_margin(best: f64, diag: f64) -> f64 {
    1e-9 * best.max(1.0) + 1e-13 * diag
}

/// Exact shortest path from interior local vertex `src_local` to the loop
/// boundary of the half.
pub fn shortest_path_to_loop(
    half: &Half,
    q: &QuasigeodesicLoop,
    src_local: usize,
) -> Result<VertexCut, CutError> {
    let mesh = &half.mesh;
    let eps = mesh.eps.point;
    let n = mesh.verts.len();
    let mut on_boundary = vec![false; n];
    for he in 0..mesh.n_halfedges() {
        if mesh.twin_of(he).is_none() {
            on_boundary[mesh.origin(he)] = true;
            on_boundary[mesh.head(he)] = true;
        }
    }
    if on_boundary[src_local] {
        return Err(CutError::PropagationFailure(format!(
            "vertex {src_local} lies on the boundary"
        )));
    }

    let ub = edge_graph_bound(mesh, src_local, &on_boundary);
    let mut search = Search {
        states: Vec::new(),
        heap: BinaryHeap::new(),
        candidates: Vec::new(),
        best: ub,
        on_boundary,
        cone_tol: 1e-12 * mesh.eps.diag.max(1.0),
    };

    // Initial windows: the edge opposite the source corner in every incident
    // face.
    let fan = mesh.fan(src_local);
    if fan.boundary {
        return Err(CutError::PropagationFailure(
            "interior vertex has a boundary fan".into(),
        ));
    }
    for &he_out in &fan.hes {
        let f = mesh.face_of(he_out);
        let k = mesh.corner_of(f, src_local).expect("fan face");
        let opp = mesh.he_of(f, (k + 1) % 3);
        let src = mesh.frames[f].p[k];
        let wa = mesh.frames[f].p[(k + 1) % 3];
        let wb = mesh.frames[f].p[(k + 2) % 3];
        let (lb, _) = dist_point_segment(src, wa, wb);
        debug_assert!((wa - src).cross(wb - src) > 0.0);
        search.push_state(FunnelState {
            parent: None,
            he: opp,
            src,
            wa,
            wb,
            pin_a: Pin::EdgeVertex(mesh.origin(opp)),
            pin_b: Pin::EdgeVertex(mesh.head(opp)),
            lb,
        });
    }

    let max_states = 500_000usize;
    while let Some(QueueItem { lb, idx }) = search.heap.pop() {
        if lb > search.best + tie_margin(search.best, mesh.eps.diag) {
            break;
        }
        if search.states.len() > max_states {
            return Err(CutError::PropagationFailure(format!(
                "state budget exhausted ({max_states})"
            )));
        }
        let st = search.states[idx].clone();
        if mesh.twin_of(st.he).is_none() {
            // Boundary window: perpendicular foot strictly inside it.
            let (d, t) = dist_point_segment(st.src, st.wa, st.wb);
            let win_len = st.wa.dist(st.wb);
            if t * win_len > eps && (1.0 - t) * win_len > eps {
                if d < search.best {
                    search.best = d;
                }
                search.candidates.push(Candidate {
                    len: d,
                    state: idx,
                    end: CandidateEnd::Foot { t },
                });
            }
            continue;
        }

        // Expand across the window edge into the twin face.
        let tw = mesh.twin_of(st.he).expect("interior");
        let iso = mesh.transfer(st.he).expect("interior");
        let g = mesh.face_of(tw);
        let src_g = iso.apply(st.src);
        let da = iso.apply(st.wa) - src_g;
        let db = iso.apply(st.wb) - src_g;
        let tk = tw % 3;
        for next_k in [(tk + 1) % 3, (tk + 2) % 3] {
            let he2 = mesh.he_of(g, next_k);
            let p0 = mesh.frames[g].p[next_k];
            let p1 = mesh.frames[g].p[(next_k + 1) % 3];
            // Clip [p0, p1] to the CCW cone (da -> db):
            //   cross(da, x − src) ≥ 0  and  cross(db, x − src) ≤ 0.
            let e = p1 - p0;
            let r0 = p0 - src_g;
            let mut lo = 0.0f64;
            let mut hi = 1.0f64;
            let mut lo_pin = Pin::EdgeVertex(mesh.origin(he2));
            let mut hi_pin = Pin::EdgeVertex(mesh.head(he2));
            let tol = search.cone_tol;

            let a0 = da.cross(r0);
            let a1 = da.cross(e);
            if a1.abs() < 1e-30 {
                if a0 < -tol {
                    continue;
                }
            } else {
                let t_cross = -a0 / a1;
                if a1 > 0.0 {
                    if t_cross > lo {
                        lo = t_cross;
                        lo_pin = Pin::Blocked;
                    }
                } else if t_cross < hi {
                    hi = t_cross;
                    hi_pin = Pin::Blocked;
                }
            }
            let b0 = db.cross(r0);
            let b1 = db.cross(e);
            if b1.abs() < 1e-30 {
                if b0 > tol {
                    continue;
                }
            } else {
                let t_cross = -b0 / b1;
                if b1 < 0.0 {
                    if t_cross > lo {
                        lo = t_cross;
                        lo_pin = Pin::Blocked;
                    }
                } else if t_cross < hi {
                    hi = t_cross;
                    hi_pin = Pin::Blocked;
                }
            }
            if lo >= hi - 1e-15 {
                continue;
            }
            let mut wa2 = p0 + e * lo;
            let mut wb2 = p0 + e * hi;
            // Snap near-vertex clips back onto the vertex so vertex pins
            // survive exactly symmetric geometry (paths along edges).
            if lo_pin == Pin::Blocked && wa2.dist(p0) <= eps {
                wa2 = p0;
                lo_pin = Pin::EdgeVertex(mesh.origin(he2));
            }
            if hi_pin == Pin::Blocked && wb2.dist(p1) <= eps {
                wb2 = p1;
                hi_pin = Pin::EdgeVertex(mesh.head(he2));
            }
            let (wa2, wb2, pin_a, pin_b) = if (wa2 - src_g).cross(wb2 - src_g) >= 0.0 {
                (wa2, wb2, lo_pin, hi_pin)
            } else {
                (wb2, wa2, hi_pin, lo_pin)
            };
            let (lb2, _) = dist_point_segment(src_g, wa2, wb2);
            search.push_state(FunnelState {
                parent: Some(idx),
                he: he2,
                src: src_g,
                wa: wa2,
                wb: wb2,
                pin_a,
                pin_b,
                lb: lb2.max(st.lb),
            });
        }
    }

    if search.candidates.is_empty() {
        return Err(CutError::PropagationFailure(
            "no boundary candidate found (empty funnel search)".into(),
        ));
    }

    let best = search
        .candidates
        .iter()
        .map(|c| c.len)
        .fold(f64::INFINITY, f64::min);
    let keep = tie_margin(best, mesh.eps.diag);
    let mut paths: Vec<ReconstructedPath> = Vec::new();
    for cand in search.candidates.iter().filter(|c| c.len <= best + keep) {
        paths.push(
            reconstruct(half, &search.states, cand, src_local)
                .map_err(CutError::PropagationFailure)?,
        );
    }
    // Dedup by quantized geometry.
    let quant = 1e-8 * mesh.eps.diag.max(1.0);
    let mut uniq: Vec<ReconstructedPath> = Vec::new();
    'outer: for p in paths {
        for u in &uniq {
            if p.same_geometry(u, quant) {
                continue 'outer;
            }
        }
        uniq.push(p);
    }
    let tie_count = uniq.len();

    // Deterministic representative: (length, arc of v′ from x, face list).
    uniq.sort_by(|a, b| {
        a.length
            .partial_cmp(&b.length)
            .unwrap()
            .then(a.arc.partial_cmp(&b.arc).unwrap())
            .then(a.faces.cmp(&b.faces))
    });
    let chosen = uniq.into_iter().next().unwrap();
    let orig_vertex = match half.provenance[src_local] {
        Provenance::Orig(v) => v,
        Provenance::QCorner(_) => {
            return Err(CutError::PropagationFailure(
                "source is a loop corner".into(),
            ))
        }
    };

    let (alpha, at_corner) = arrival_angles(half, q, &chosen);
    Ok(VertexCut {
        vertex: orig_vertex,
        local_vertex: src_local,
        points: chosen.points,
        segs: chosen.segs,
        length: chosen.length,
        projection: chosen.projection,
        projection_arc: chosen.arc,
        alpha,
        at_corner,
        tie_count,
    })
}

#[derive(Clone, Debug)]
struct ReconstructedPath {
    points: Vec<SurfacePoint>,
    positions: Vec<Vec3>,
    segs: Vec<PathSeg>,
    faces: Vec<usize>,
    length: f64,
    projection: SurfacePoint,
    arc: f64,
    /// Arrival direction (unit) in the final face's frame.
    arrival_dir: Vec2,
}

impl ReconstructedPath {
    fn same_geometry(&self, other: &ReconstructedPath, tol: f64) -> bool {
        self.positions.len() == other.positions.len()
            && self
                .positions
                .iter()
                .zip(other.positions.iter())
                .all(|(a, b)| a.dist(*b) <= tol)
    }
}

fn reconstruct(
    half: &Half,
    states: &[FunnelState],
    cand: &Candidate,
    src_local: usize,
) -> Result<ReconstructedPath, String> {
    let mesh = &half.mesh;
    let mut chain = Vec::new();
    let mut cur = Some(cand.state);
    while let Some(i) = cur {
        chain.push(i);
        cur = states[i].parent;
    }
    chain.reverse();
    let strip_faces: Vec<usize> = chain.iter().map(|&i| mesh.face_of(states[i].he)).collect();
    let isos = develop_strip(mesh, &strip_faces).map_err(|e| e.to_string())?;
    let src_pos = isos[0].apply(states[chain[0]].src);

    let last_state = &states[*chain.last().unwrap()];
    let (target_local, end_vertex): (Vec2, Option<usize>) = match cand.end {
        CandidateEnd::Foot { t } => (Vec2::lerp(last_state.wa, last_state.wb, t), None),
        CandidateEnd::Vertex { v } => {
            let f = mesh.face_of(last_state.he);
            let k = mesh
                .corner_of(f, v)
                .ok_or("endpoint vertex not on final face")?;
            (mesh.frames[f].p[k], Some(v))
        }
    };
    let target = isos.last().unwrap().apply(target_local);
    let length = src_pos.dist(target);
    let dirv = (target - src_pos) * (1.0 / length.max(1e-300));

    let mut raw_points = vec![SurfacePoint::Vertex(src_local)];
    let mut raw_segs = Vec::new();
    let mut prev_local = states[chain[0]].src;
    for (j, &si) in chain.iter().enumerate() {
        let st = &states[si];
        let f = mesh.face_of(st.he);
        let is_last = j + 1 == chain.len();
        let exit_local = if is_last {
            target_local
        } else {
            let k = st.he % 3;
            let e0 = isos[j].apply(mesh.frames[f].p[k]);
            let e1 = isos[j].apply(mesh.frames[f].p[(k + 1) % 3]);
            let e = e1 - e0;
            let denom = dirv.cross(e);
            if denom.abs() < 1e-300 {
                return Err("degenerate crossing during reconstruction".into());
            }
            let u = ((e0 - src_pos).cross(dirv) / denom).clamp(0.0, 1.0);
            raw_points.push(mesh.canonicalize(&SurfacePoint::Edge { he: st.he, t: u }));
            Vec2::lerp(mesh.frames[f].p[k], mesh.frames[f].p[(k + 1) % 3], u)
        };
        raw_segs.push(PathSeg {
            face: f,
            a: prev_local,
            b: exit_local,
        });
        if !is_last {
            let iso = mesh.transfer(st.he).expect("interior crossing");
            prev_local = iso.apply(exit_local);
        }
    }

    // Drop zero-length pieces (crossings that land exactly on a vertex), so
    // equal geometries reconstructed through different strips compare equal.
    let eps = mesh.eps.point;
    let mut points = vec![raw_points[0]];
    let mut segs: Vec<PathSeg> = Vec::new();
    let mut faces = Vec::new();
    for (i, seg) in raw_segs.iter().enumerate() {
        let end_pt = raw_points.get(i + 1).copied();
        if seg.len() <= eps {
            if let Some(pt) = end_pt {
                *points.last_mut().unwrap() = pt;
            }
            continue;
        }
        segs.push(*seg);
        faces.push(seg.face);
        if let Some(pt) = end_pt {
            points.push(pt);
        }
    }
    if segs.is_empty() {
        return Err("path collapsed to a point".into());
    }
    let arrival_dir = segs.last().unwrap().dir();

    let (projection, arc) = match end_vertex {
        Some(v) => {
            let ci = match half.provenance[v] {
                Provenance::QCorner(ci) => ci,
                Provenance::Orig(_) => return Err("projection vertex off the loop".into()),
            };
            (SurfacePoint::Vertex(v), half.corner_arc(ci))
        }
        None => {
            let he = last_state.he;
            let k = he % 3;
            let f = mesh.face_of(he);
            let e0 = mesh.frames[f].p[k];
            let e1 = mesh.frames[f].p[(k + 1) % 3];
            let t = ((target_local - e0).dot(e1 - e0) / (e1 - e0).norm2()).clamp(0.0, 1.0);
            (
                mesh.canonicalize(&SurfacePoint::Edge { he, t }),
                half.arc_at_loop(he, t),
            )
        }
    };
    // Append the projection, replacing a coincident trailing crossing.
    let proj_pos = mesh.position(&projection);
    if points.len() > 1 && mesh.position(points.last().unwrap()).dist(proj_pos) <= eps {
        *points.last_mut().unwrap() = projection;
    } else {
        points.push(projection);
    }

    let positions = points.iter().map(|sp| mesh.position(sp)).collect();
    Ok(ReconstructedPath {
        points,
        positions,
        segs,
        faces,
        length,
        projection,
        arc,
        arrival_dir,
    })
}

/// Angles between the arriving path and the loop at the projection,
/// (backward, forward) with respect to the loop travel direction, plus
/// whether the projection is a true corner of Q.
fn arrival_angles(
    half: &Half,
    q: &QuasigeodesicLoop,
    path: &ReconstructedPath,
) -> ((f64, f64), bool) {
    let mesh = &half.mesh;
    let eps = mesh.eps.angle;
    match path.projection {
        SurfacePoint::Edge { he, .. } => {
            let e = mesh.edge_dir(he);
            let travel = if half.side == Side::Left { e } else { -e };
            let a_fwd = angle_between(-path.arrival_dir, travel);
            ((PI - a_fwd, a_fwd), false)
        }
        SurfacePoint::Vertex(v) => {
            let ci = match half.provenance[v] {
                Provenance::QCorner(ci) => ci,
                Provenance::Orig(_) => unreachable!("projection lies on the loop"),
            };
            let corner = &q.corners[ci];
            let bent = (corner.left - PI).abs() > eps
                || (corner.right - PI).abs() > eps
                || ci == q.loop_point;
            // Interior angle split by the arrival ray, measured in the fan.
            let fan = mesh.fan(v);
            let f_arr = *path.faces.last().unwrap();
            let phi = mesh
                .fan_angle(&fan, v, f_arr, -path.arrival_dir)
                .unwrap_or(0.0);
            // The fan starts at the boundary outgoing half-edge: for the left
            // half that is the travel-forward ray, for the right half the
            // travel-backward ray.
            if half.side == Side::Left {
                ((fan.total - phi, phi), bent)
            } else {
                ((phi, fan.total - phi), bent)
            }
        }
        SurfacePoint::Face { .. } => ((0.0, 0.0), false),
    }
}

/// Shortest-path cuts for every curvature-carrying interior vertex of the
/// half, computed in parallel and returned ordered by original vertex id.
pub fn cut_all(half: &Half, q: &QuasigeodesicLoop) -> Result<Vec<VertexCut>, CutError> {
    let mut interior = half.interior.clone();
    interior.sort_by_key(|&(_, orig, _)| orig);
    let flat_eps = half.mesh.eps.angle;
    interior
        .par_iter()
        .filter(|&&(_, _, w)| w > flat_eps)
        .map(|&(local, _, _)| shortest_path_to_loop(half, q, local))
        .collect()
}

// --- oracle ---

/// Dijkstra upper-bound oracle on a Steiner graph: mesh vertices plus `k−1`
/// evenly spaced points per edge plus `k−1` samples per loop segment, with
/// complete co-facial connections weighted by straight-line distance.
/// Subdivisions nest along divisibility chains (4 | 16 | 64), making the
/// bound non-increasing along them.
pub struct Oracle {
    nodes: Vec<Vec3>,
    on_q: Vec<bool>,
    adj: Vec<Vec<(u32, f64)>>,
    pub k: usize,
}

impl Oracle {
    pub fn new(p: &Polyhedron, q: &QuasigeodesicLoop, k: usize) -> Oracle {
        assert!(k >= 1, "subdivision count must be at least 1");
        let mesh = &p.mesh;
        let nv = mesh.verts.len();
        let mut nodes: Vec<Vec3> = mesh.verts.clone();
        let mut on_q = vec![false; nv];
        let mut node_faces: Vec<Vec<usize>> = (0..nv)
            .map(|v| mesh.fan(v).hes.iter().map(|&h| mesh.face_of(h)).collect())
            .collect();

        for c in &q.corners {
            if let SurfacePoint::Vertex(v) = c.point {
                on_q[v] = true;
            }
        }

        let mut seen: BTreeMap<usize, ()> = BTreeMap::new();
        for he in 0..mesh.n_halfedges() {
            let canon = mesh.canonical_edge(he);
            if seen.insert(canon, ()).is_some() {
                continue;
            }
            let a = mesh.verts[mesh.origin(canon)];
            let b = mesh.verts[mesh.head(canon)];
            let mut faces = vec![mesh.face_of(canon)];
            if let Some(tw) = mesh.twin_of(canon) {
                faces.push(mesh.face_of(tw));
            }
            for i in 1..k {
                nodes.push(Vec3::lerp(a, b, i as f64 / k as f64));
                on_q.push(false);
                node_faces.push(faces.clone());
            }
        }

        for (i, c) in q.corners.iter().enumerate() {
            if !matches!(c.point, SurfacePoint::Vertex(_)) {
                nodes.push(mesh.position(&c.point));
                on_q.push(true);
                node_faces.push(mesh.faces_of(&c.point));
            }
            let seg = &q.segments[i];
            let a3 = mesh.position(&q.corners[i].point);
            let b3 = mesh.position(&q.corners[(i + 1) % q.corners.len()].point);
            for j in 1..k {
                nodes.push(Vec3::lerp(a3, b3, j as f64 / k as f64));
                on_q.push(true);
                node_faces.push(vec![seg.face]);
            }
        }

        let mut per_face: Vec<Vec<u32>> = vec![Vec::new(); mesh.faces.len()];
        for (i, fs) in node_faces.iter().enumerate() {
            for &f in fs {
                per_face[f].push(i as u32);
            }
        }
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nodes.len()];
        for members in &per_face {
            for (ii, &a) in members.iter().enumerate() {
                for &b in &members[ii + 1..] {
                    if a == b {
                        continue;
                    }
                    let d = nodes[a as usize].dist(nodes[b as usize]);
                    adj[a as usize].push((b, d));
                    adj[b as usize].push((a, d));
                }
            }
        }
        Oracle {
            nodes,
            on_q,
            adj,
            k,
        }
    }

    /// Upper bound on the geodesic distance from vertex `v` to the loop.
    pub fn distance(&self, v: usize) -> f64 {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        dist[v] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(QueueItem { lb: 0.0, idx: v });
        let mut best = f64::INFINITY;
        while let Some(QueueItem { lb, idx }) = heap.pop() {
            if lb > dist[idx] || lb >= best {
                continue;
            }
            if self.on_q[idx] {
                best = best.min(lb);
                continue;
            }
            for &(w, d) in &self.adj[idx] {
                let nd = lb + d;
                if nd < dist[w as usize] {
                    dist[w as usize] = nd;
                    heap.push(QueueItem {
                        lb: nd,
                        idx: w as usize,
                    });
                }
            }
        }
        best
    }
}

/// Convenience wrapper matching the operation signature.
pub fn oracle_distance(p: &Polyhedron, q: &QuasigeodesicLoop, v: usize, k: usize) -> f64 {
    Oracle::new(p, q, k).distance(v)
}

// --- lemma verification ---

#[derive(Clone, Debug, Serialize)]
pub struct AlphaCheck {
    pub vertex: usize,
    pub alpha: (f64, f64),
    pub at_corner: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub alpha: Vec<AlphaCheck>,
    /// Pairs of original vertex ids whose paths touch away from x.
    pub intersecting_pairs: Vec<(usize, usize)>,
    /// Paths with a mesh vertex in their relative interior.
    pub interior_vertex_violations: Vec<usize>,
    pub passes: bool,
}

/// Structural checks on a half's cut set: arrival angles (π/2 exactly
/// off-corner, ≥ π/2 at corners), pairwise disjointness except at the loop
/// point, and vertex-free path interiors.
pub fn verify_cut_lemmas(half: &Half, _q: &QuasigeodesicLoop, cuts: &[VertexCut]) -> LemmaReport {
    let mesh = &half.mesh;
    let eps_pt = mesh.eps.point;
    let mut alpha = Vec::with_capacity(cuts.len());
    for c in cuts {
        let (a, b) = c.alpha;
        let ok = if c.at_corner {
            a >= PI / 2.0 - 1e-7 && b >= PI / 2.0 - 1e-7
        } else {
            (a - PI / 2.0).abs() <= 1e-7 && (b - PI / 2.0).abs() <= 1e-7
        };
        alpha.push(AlphaCheck {
            vertex: c.vertex,
            alpha: c.alpha,
            at_corner: c.at_corner,
            ok,
        });
    }

    let mut interior_vertex_violations = Vec::new();
    for c in cuts {
        if c.points.len() >= 2 {
            for sp in &c.points[1..c.points.len() - 1] {
                if sp.is_vertex() {
                    interior_vertex_violations.push(c.vertex);
                    break;
                }
            }
        }
    }

    // Pairwise disjointness; a shared endpoint at x is allowed.
    let x_pos3 = mesh.verts[half.x_local];
    let mut set = SegmentSet::default();
    for (ci, c) in cuts.iter().enumerate() {
        for (si, s) in c.segs.iter().enumerate() {
            set.push(CurveSeg {
                face: s.face,
                a: s.a,
                b: s.b,
                tag: ((ci as u64) << 32) | si as u64,
            });
        }
    }
    let mut intersecting_pairs: Vec<(usize, usize)> = Vec::new();
    for (ci, c) in cuts.iter().enumerate() {
        let ends_at_x = mesh.position(&c.projection).dist(x_pos3) <= eps_pt * 2.0;
        for (si, s) in c.segs.iter().enumerate() {
            let hit = set.first_contact(s.face, s.a, s.b, eps_pt, |tag, pt| {
                let oc = (tag >> 32) as usize;
                let os = (tag & 0xffff_ffff) as usize;
                if oc == ci {
                    if os == si {
                        return true;
                    }
                    if os + 1 == si {
                        return pt.dist(s.a) <= 2.0 * eps_pt;
                    }
                    if si + 1 == os {
                        return pt.dist(s.b) <= 2.0 * eps_pt;
                    }
                    return false;
                }
                let other_at_x = mesh.position(&cuts[oc].projection).dist(x_pos3) <= eps_pt * 2.0;
                if ends_at_x && other_at_x {
                    if let Some(xq) = mesh.pos_in_face(&SurfacePoint::Vertex(half.x_local), s.face)
                    {
                        return pt.dist(xq) <= 2.0 * eps_pt;
                    }
                }
                false
            });
            if let Some(h) = hit {
                let oc = (set.segs[h.seg].tag >> 32) as usize;
                let pair = (cuts[ci.min(oc)].vertex, cuts[ci.max(oc)].vertex);
                if !intersecting_pairs.contains(&pair) {
                    intersecting_pairs.push(pair);
                }
            }
        }
    }

    let passes = alpha.iter().all(|a| a.ok)
        && intersecting_pairs.is_empty()
        && interior_vertex_violations.is_empty();
    LemmaReport {
        alpha,
        intersecting_pairs,
        interior_vertex_violations,
        passes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::loops::{loop_from_vertices, split_halves};
    use approx::assert_relative_eq;

    fn bottom_loop_setup() -> (Polyhedron, QuasigeodesicLoop, Half, Half) {
        let p = fixtures::unit_cube();
        let q = loop_from_vertices(&p, &[0, 1, 2, 3]).unwrap();
        let (l, r) = split_halves(&p, &q).unwrap();
        let (small, big) = if l.interior.is_empty() {
            (l, r)
        } else {
            (r, l)
        };
        (p, q, small, big)
    }

    #[test]
    fn bottom_loop_cuts_are_vertical_edges() {
        let (_p, q, _small, big) = bottom_loop_setup();
        let cuts = cut_all(&big, &q).unwrap();
        assert_eq!(cuts.len(), 4);
        for c in &cuts {
            assert_relative_eq!(c.length, 1.0, epsilon = 1e-9);
            assert_eq!(c.tie_count, 1, "vertex {} ties", c.vertex);
            assert!(c.at_corner, "projection of {} is a bent corner", c.vertex);
            assert_relative_eq!(c.alpha.0, PI / 2.0, epsilon = 1e-7);
            assert_relative_eq!(c.alpha.1, PI / 2.0, epsilon = 1e-7);
            assert_eq!(c.points.len(), 2, "straight cube edge");
        }
        let report = verify_cut_lemmas(&big, &q, &cuts);
        assert!(report.passes, "{report:?}");
    }

    #[test]
    fn girth_loop_cuts_reach_half_depth() {
        let p = fixtures::unit_cube();
        let (face, sp) = p.locate(2, Vec3::new(0.4, 0.0, 0.5)).unwrap();
        let dir = p.mesh.frames[face]
            .project_dir(Vec3::new(1.0, 0.0, 0.0))
            .normalized();
        let td = crate::mesh::TangentDirection::new(sp, face, dir);
        let q = crate::loops::construct_loop(
            &p,
            &sp,
            &td,
            crate::geodesics::VertexPolicy::Bisector,
            50.0,
        )
        .unwrap();
        assert_relative_eq!(q.total_len, 4.0, epsilon = 1e-9);
        let (l, r) = split_halves(&p, &q).unwrap();
        for half in [&l, &r] {
            let cuts = cut_all(half, &q).unwrap();
            assert_eq!(cuts.len(), 4);
            for c in &cuts {
                assert_relative_eq!(c.length, 0.5, epsilon = 1e-9);
                assert!(!c.at_corner);
                assert_relative_eq!(c.alpha.0, PI / 2.0, epsilon = 1e-7);
                assert_relative_eq!(c.alpha.1, PI / 2.0, epsilon = 1e-7);
            }
            let report = verify_cut_lemmas(half, &q, &cuts);
            assert!(report.passes, "{report:?}");
        }
    }

    #[test]
    fn diagonal_triangle_ties() {
        // Three face diagonals around cube corner 0: both the cut-off corner
        // and the far corner have three tied shortest paths.
        let p = fixtures::unit_cube();
        let q = loop_from_vertices(&p, &[1, 3, 4]).unwrap();
        let (l, r) = split_halves(&p, &q).unwrap();
        let (small, big) = if l.interior.len() == 1 {
            (l, r)
        } else {
            (r, l)
        };

        let cuts_small = cut_all(&small, &q).unwrap();
        assert_eq!(cuts_small.len(), 1);
        assert_eq!(cuts_small[0].vertex, 0);
        assert_eq!(
            cuts_small[0].tie_count, 3,
            "cut-off corner has 3 tied paths"
        );

        let cuts_big = cut_all(&big, &q).unwrap();
        assert_eq!(cuts_big.len(), 4);
        let far = cuts_big.iter().find(|c| c.vertex == 6).unwrap();
        assert_eq!(far.tie_count, 3, "far corner has 3 tied paths");
        for c in &cuts_big {
            if c.vertex != 6 {
                assert_eq!(c.tie_count, 1, "vertex {}", c.vertex);
            }
        }
        for half_cuts in [&cuts_small, &cuts_big] {
            for c in half_cuts.iter() {
                let ub = oracle_distance(&p, &q, c.vertex, 16);
                assert!(c.length <= ub + 1e-9, "exact {} > oracle {}", c.length, ub);
            }
        }
        let report = verify_cut_lemmas(&big, &q, &cuts_big);
        assert!(report.passes, "{report:?}");
    }

    #[test]
    fn oracle_upper_bounds_and_converges() {
        let (p, q, _small, big) = bottom_loop_setup();
        let cuts = cut_all(&big, &q).unwrap();
        let mut prev = f64::INFINITY;
        for k in [1usize, 4, 16, 64] {
            let oracle = Oracle::new(&p, &q, k);
            let mut worst_gap = 0.0f64;
            for c in &cuts {
                let ub = oracle.distance(c.vertex);
                assert!(
                    ub >= c.length - 1e-9,
                    "oracle below exact at k={k}: {ub} < {}",
                    c.length
                );
                worst_gap = worst_gap.max((ub - c.length) / c.length);
            }
            assert!(worst_gap <= prev + 1e-12, "gap grew along nested ladder");
            prev = worst_gap;
            if k == 64 {
                assert!(worst_gap <= 0.01, "gap {worst_gap} at k=64");
            }
        }
    }

    #[test]
    fn two_cuts_may_share_the_loop_point() {
        // A symmetric loop on the right-angle tetrahedron whose nonconvex
        // half has two vertices projecting exactly to x: their paths may
        // share that endpoint and nothing else.
        let p = fixtures::right_angle_tetrahedron();
        let pt = Vec3::new(0.45, 0.45, 0.1);
        let (face, sp) = p.locate(3, pt).unwrap();
        let dir = p.mesh.frames[face]
            .project_dir(Vec3::new(1.0, -1.0, 0.0))
            .normalized();
        let td = crate::mesh::TangentDirection::new(sp, face, dir);
        let q = crate::loops::construct_loop(
            &p,
            &sp,
            &td,
            crate::geodesics::VertexPolicy::Bisector,
            60.0,
        )
        .unwrap();
        assert_relative_eq!(q.beta().to_degrees(), 330.0, epsilon = 1e-6);
        let (l, r) = crate::loops::split_halves(&p, &q).unwrap();
        let big = if l.interior.len() == 3 { l } else { r };
        let cuts = cut_all(&big, &q).unwrap();
        let to_x: Vec<usize> = cuts
            .iter()
            .filter(|c| c.projection_arc < 1e-6 || q.total_len - c.projection_arc < 1e-6)
            .map(|c| c.vertex)
            .collect();
        assert_eq!(to_x.len(), 2, "projections to x: {to_x:?}");
        let report = verify_cut_lemmas(&big, &q, &cuts);
        assert!(report.passes, "{report:?}");
    }

    #[test]
    fn crossing_paths_are_reported() {
        let (_p, q, _small, big) = bottom_loop_setup();
        let mut cuts = cut_all(&big, &q).unwrap();
        // Graft one path onto another cut so the pair must intersect.
        let stolen_segs = cuts[1].segs.clone();
        let stolen_pts = cuts[1].points.clone();
        cuts[0].segs = stolen_segs;
        cuts[0].points[1..].clone_from_slice(&stolen_pts[1..]);
        let report = verify_cut_lemmas(&big, &q, &cuts);
        assert!(!report.passes);
        assert!(!report.intersecting_pairs.is_empty());
    }
}
