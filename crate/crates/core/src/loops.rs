//! Quasigeodesic loops: construction from a seed point, explicit
//! vertex-chain loops, validation, and splitting the surface into the two
//! halves bounded by the loop.

use crate::geodesics::{
    continue_through_vertex, trace_geodesic, CurveSeg, PathSeg, SegmentSet, StepEnd, StopCondition,
    StopReason, TraceError, Tracer, VertexPassage, VertexPolicy,
};
use crate::geom::{Vec2, Vec3, PI, TAU};
use crate::mesh::{MeshError, Polyhedron, SurfacePoint, TangentDirection, TriMesh};
use crate::subdivide::{cut_face, Chain, FaceCut, NodeRef, SubdivideError};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("no self-intersection within length budget {searched:.3}")]
    NoIntersection { searched: f64 },
    #[error("loop construction must start at a nonvertex point")]
    StartAtVertex,
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("subdivision failure: {0}")]
    SubdivisionFailure(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

impl From<SubdivideError> for LoopError {
    fn from(e: SubdivideError) -> Self {
        LoopError::SubdivisionFailure(e.to_string())
    }
}

/// One corner of the loop polyline with travel directions on both sides and
/// the measured surface angles.
#[derive(Clone, Debug)]
pub struct LoopCorner {
    pub point: SurfacePoint,
    pub face_in: usize,
    pub dir_in: Vec2,
    pub face_out: usize,
    pub dir_out: Vec2,
    pub left: f64,
    pub right: f64,
}

/// Straight piece of the loop between corners `i` and `i+1`, in `face`'s
/// frame. `along_edge` is set when the piece runs along a mesh edge.
#[derive(Clone, Debug)]
pub struct LoopSegment {
    pub face: usize,
    pub a: Vec2,
    pub b: Vec2,
    pub len: f64,
    pub along_edge: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LoopMeta {
    pub policy: Option<VertexPolicy>,
    pub branch_lengths: [f64; 2],
    pub passages: Vec<VertexPassage>,
    pub event: String,
}

#[derive(Clone, Debug)]
pub struct QuasigeodesicLoop {
    pub corners: Vec<LoopCorner>,
    pub segments: Vec<LoopSegment>,
    /// Index of the loop point x in `corners`.
    pub loop_point: usize,
    pub total_len: f64,
    /// Arc position of each corner measured from x along the travel
    /// direction.
    pub arc: Vec<f64>,
    pub turn_left: f64,
    pub turn_right: f64,
    pub meta: LoopMeta,
}

impl QuasigeodesicLoop {
    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    /// β = max(L(x), R(x)).
    pub fn beta(&self) -> f64 {
        let x = &self.corners[self.loop_point];
        x.left.max(x.right)
    }

    /// Number of loop segments crossing face interiors (segments along
    /// artificial flat edges count as crossings of the original face).
    pub fn crossed_faces(&self, p: &Polyhedron) -> usize {
        self.segments
            .iter()
            .filter(|s| s.along_edge.is_none_or(|he| p.flat_he[he]))
            .count()
    }
}

/// Recompute arcs, turns, and angle sums after corners/segments are built.
fn finish_loop(
    p: &Polyhedron,
    mut corners: Vec<LoopCorner>,
    segments: Vec<LoopSegment>,
    meta: LoopMeta,
    forced_loop_point: Option<usize>,
) -> Result<QuasigeodesicLoop, LoopError> {
    let n = corners.len();
    if n != segments.len() || n < 2 {
        return Err(LoopError::InvalidLoop(format!(
            "corner/segment count mismatch ({n} corners, {} segments)",
            segments.len()
        )));
    }
    for c in corners.iter_mut() {
        let incoming = TangentDirection::new(c.point, c.face_in, c.dir_in);
        let outgoing = TangentDirection::new(c.point, c.face_out, c.dir_out);
        let (l, r) = p.mesh.angle_sides(&c.point, &incoming, &outgoing)?;
        c.left = l;
        c.right = r;
    }
    let eps = p.eps().angle;

    // Flat face-interior corners (the seed point of a traced loop) carry no
    // information and leave collinear triples in the re-tessellation; merge
    // them away. The designated loop point always survives.
    let mut segments = segments;
    loop {
        let n = corners.len();
        let flat = (0..n).find(|&i| {
            forced_loop_point != Some(i)
                && matches!(corners[i].point, SurfacePoint::Face { .. })
                && (corners[i].left - PI).abs() <= eps
                && (corners[i].right - PI).abs() <= eps
        });
        let Some(i) = flat else { break };
        if n <= 2 {
            break;
        }
        debug_assert!(
            forced_loop_point.map_or(true, |x| x == 0),
            "compaction assumes x at 0"
        );
        let prev = (i + n - 1) % n;
        if segments[prev].face != segments[i].face {
            break;
        }
        let merged = LoopSegment {
            face: segments[prev].face,
            a: segments[prev].a,
            b: segments[i].b,
            len: segments[prev].len + segments[i].len,
            along_edge: None,
        };
        segments[prev] = merged;
        segments.remove(i);
        corners.remove(i);
    }

    let n = corners.len();
    let loop_point = match forced_loop_point {
        Some(i) => i,
        None => {
            let mut worst = 0;
            let mut worst_angle = 0.0;
            for (i, c) in corners.iter().enumerate() {
                let m = c.left.max(c.right);
                if m > worst_angle {
                    worst_angle = m;
                    worst = i;
                }
            }
            if worst_angle > PI + eps {
                worst
            } else {
                0
            }
        }
    };
    let total_len = segments.iter().map(|s| s.len).sum();
    let mut arc = vec![0.0; n];
    let mut acc = 0.0;
    for k in 0..n {
        let i = (loop_point + k) % n;
        arc[i] = acc;
        acc += segments[i].len;
    }
    let turn_left: f64 = corners.iter().map(|c| PI - c.left).sum();
    let turn_right: f64 = corners.iter().map(|c| PI - c.right).sum();
    Ok(QuasigeodesicLoop {
        corners,
        segments,
        loop_point,
        total_len,
        arc,
        turn_left,
        turn_right,
        meta,
    })
}

fn make_segments(p: &Polyhedron, corners: &[LoopCorner], raw: &[PathSeg]) -> Vec<LoopSegment> {
    let n = corners.len();
    raw.iter()
        .enumerate()
        .map(|(i, s)| {
            let c0 = &corners[i];
            let c1 = &corners[(i + 1) % n];
            let along_edge = match (&c0.point, &c1.point) {
                (SurfacePoint::Vertex(a), SurfacePoint::Vertex(b)) => {
                    p.mesh.find_he(*a, *b).map(|he| p.mesh.canonical_edge(he))
                }
                _ => None,
            };
            LoopSegment {
                face: s.face,
                a: s.a,
                b: s.b,
                len: s.len(),
                along_edge,
            }
        })
        .collect()
}

// --- construction from a seed ---

#[derive(Clone, Debug)]
struct CornerRec {
    at: SurfacePoint,
    face_in: usize,
    dir_in: Vec2,
    face_out: usize,
    dir_out: Vec2,
}

impl CornerRec {
    fn reversed(&self) -> CornerRec {
        CornerRec {
            at: self.at,
            face_in: self.face_out,
            dir_in: -self.dir_out,
            face_out: self.face_in,
            dir_out: -self.dir_in,
        }
    }

    fn to_loop_corner(&self) -> LoopCorner {
        LoopCorner {
            point: self.at,
            face_in: self.face_in,
            dir_in: self.dir_in,
            face_out: self.face_out,
            dir_out: self.dir_out,
            left: 0.0,
            right: 0.0,
        }
    }
}

struct Branch<'m> {
    tracer: Tracer<'m>,
    segs: Vec<PathSeg>,
    corners: Vec<CornerRec>,
    passages: Vec<VertexPassage>,
    len: f64,
    done: bool,
}

/// A cut position along a branch polyline: arc length within segment `seg`.
#[derive(Clone, Copy, Debug)]
struct Cut {
    seg: usize,
    arc: f64,
}

/// Forward portion of a branch from its start to `cut`: full segments, an
/// optional partial one, and the junction corners strictly before the cut.
fn portion(
    segs: &[PathSeg],
    corners: &[CornerRec],
    cut: Cut,
    eps: f64,
) -> (Vec<PathSeg>, Vec<CornerRec>) {
    let len = segs[cut.seg].len();
    if cut.arc <= eps {
        // Cut at the start of seg `cut.seg` = at corner `cut.seg - 1`.
        if cut.seg == 0 {
            return (Vec::new(), Vec::new());
        }
        let out_segs = segs[..cut.seg].to_vec();
        let out_corners = corners[..cut.seg - 1].to_vec();
        (out_segs, out_corners)
    } else if cut.arc >= len - eps {
        let out_segs = segs[..=cut.seg].to_vec();
        let out_corners = corners[..cut.seg].to_vec();
        (out_segs, out_corners)
    } else {
        let mut out_segs = segs[..cut.seg].to_vec();
        let s = &segs[cut.seg];
        let t = cut.arc / len;
        out_segs.push(PathSeg {
            face: s.face,
            a: s.a,
            b: Vec2::lerp(s.a, s.b, t),
        });
        let out_corners = corners[..cut.seg].to_vec();
        (out_segs, out_corners)
    }
}

fn reverse_portion(segs: &[PathSeg], corners: &[CornerRec]) -> (Vec<PathSeg>, Vec<CornerRec>) {
    let rs = segs.iter().rev().map(|s| s.reversed()).collect();
    let rc = corners.iter().rev().map(|c| c.reversed()).collect();
    (rs, rc)
}

/// Slice of one branch between two cuts (lasso case), `from` strictly before
/// `to` in branch order.
fn slice(
    segs: &[PathSeg],
    corners: &[CornerRec],
    mut from: Cut,
    mut to: Cut,
    eps: f64,
) -> (Vec<PathSeg>, Vec<CornerRec>) {
    // Normalize: `from` at a segment end moves to the next segment's start;
    // `to` at a segment start moves to the previous segment's end.
    if from.arc >= segs[from.seg].len() - eps {
        from = Cut {
            seg: from.seg + 1,
            arc: 0.0,
        };
    } else if from.arc <= eps {
        from.arc = 0.0;
    }
    if to.arc <= eps {
        to = Cut {
            seg: to.seg - 1,
            arc: segs[to.seg - 1].len(),
        };
    } else if to.arc >= segs[to.seg].len() - eps {
        to.arc = segs[to.seg].len();
    }

    let sub = |s: &PathSeg, a0: f64, a1: f64| -> PathSeg {
        let l = s.len();
        PathSeg {
            face: s.face,
            a: Vec2::lerp(s.a, s.b, a0 / l),
            b: Vec2::lerp(s.a, s.b, a1 / l),
        }
    };

    let mut out_segs = Vec::new();
    if from.seg == to.seg {
        out_segs.push(sub(&segs[from.seg], from.arc, to.arc));
        return (out_segs, Vec::new());
    }
    out_segs.push(sub(&segs[from.seg], from.arc, segs[from.seg].len()));
    for s in &segs[from.seg + 1..to.seg] {
        out_segs.push(*s);
    }
    out_segs.push(sub(&segs[to.seg], 0.0, to.arc));
    let out_corners = corners[from.seg..to.seg].to_vec();
    (out_segs, out_corners)
}

/// Construct a quasigeodesic loop by extending a geodesic from `p` in the
/// `u` and `−u` directions until the two branches (or one branch with
/// itself) first touch. The contact point becomes the loop point x and the
/// tails beyond it are discarded.
pub fn construct_loop(
    p: &Polyhedron,
    seed: &SurfacePoint,
    u: &TangentDirection,
    policy: VertexPolicy,
    max_length: f64,
) -> Result<QuasigeodesicLoop, LoopError> {
    let mesh = &p.mesh;
    let seed_pt = mesh.canonicalize(seed);
    if seed_pt.is_vertex() {
        return Err(LoopError::StartAtVertex);
    }
    if !(max_length > 0.0) {
        return Err(LoopError::InvalidLoop("max_length must be positive".into()));
    }
    let eps = mesh.eps.point;

    let fwd = TangentDirection::new(seed_pt, u.face, u.dir);
    let bwd = TangentDirection::new(seed_pt, u.face, -u.dir);
    let mut branches = [
        Branch {
            tracer: Tracer::new(mesh, &fwd)?,
            segs: Vec::new(),
            corners: Vec::new(),
            passages: Vec::new(),
            len: 0.0,
            done: false,
        },
        Branch {
            tracer: Tracer::new(mesh, &bwd)?,
            segs: Vec::new(),
            corners: Vec::new(),
            passages: Vec::new(),
            len: 0.0,
            done: false,
        },
    ];

    let mut set = SegmentSet::default();
    let tag_of = |b: usize, i: usize| -> u64 { ((b as u64) << 32) | i as u64 };
    // Positions of the seed point per face (for contact exclusions at p).
    let seed_positions: Vec<(usize, Vec2)> = mesh
        .faces_of(&seed_pt)
        .into_iter()
        .filter_map(|f| mesh.pos_in_face(&seed_pt, f).map(|q| (f, q)))
        .collect();

    loop {
        // Lockstep: extend the shorter unfinished branch; ties go to 0.
        let bi = match (branches[0].done, branches[1].done) {
            (true, true) => {
                return Err(LoopError::NoIntersection {
                    searched: max_length,
                })
            }
            (true, false) => 1,
            (false, true) => 0,
            (false, false) => {
                if branches[0].len <= branches[1].len {
                    0
                } else {
                    1
                }
            }
        };

        let remaining = max_length - branches[bi].len;
        if remaining <= eps {
            branches[bi].done = true;
            continue;
        }
        let (seg, end) = {
            let br = &mut branches[bi];
            br.tracer.step(remaining)?
        };

        // First contact with everything drawn so far (both branches).
        let new_idx = branches[bi].segs.len();
        let contact = set.first_contact(seg.face, seg.a, seg.b, eps, |tag, pt| {
            let ob = (tag >> 32) as usize;
            let oi = (tag & 0xffff_ffff) as usize;
            if ob == bi && oi + 1 == new_idx {
                // Predecessor on the same branch: ignore the shared junction.
                return pt.dist(seg.a) <= 2.0 * eps;
            }
            if ob != bi && oi == 0 && new_idx == 0 {
                // Sibling initial segment: ignore contact at the seed point.
                return seed_positions
                    .iter()
                    .any(|(f, q)| *f == seg.face && pt.dist(*q) <= 2.0 * eps);
            }
            false
        });

        if let Some(c) = contact {
            let ob = (set.segs[c.seg].tag >> 32) as usize;
            let oi = (set.segs[c.seg].tag & 0xffff_ffff) as usize;
            let old_seg = set.segs[c.seg];
            let old_arc = c.u * old_seg.a.dist(old_seg.b);
            let (new_segs, passages, event);
            let corners: Vec<CornerRec>;
            let x_point = mesh.point_from_face_pos(seg.face, c.point);

            if ob == bi {
                // Lasso: keep the portion between the two contacts.
                let br = &branches[bi];
                let mut all_segs = br.segs.clone();
                all_segs.push(seg);
                let (s_slice, c_slice) = slice(
                    &all_segs,
                    &br.corners,
                    Cut {
                        seg: oi,
                        arc: old_arc,
                    },
                    Cut {
                        seg: all_segs.len() - 1,
                        arc: c.s,
                    },
                    eps,
                );
                let x_rec = CornerRec {
                    at: x_point,
                    face_in: s_slice.last().unwrap().face,
                    dir_in: s_slice.last().unwrap().dir(),
                    face_out: s_slice.first().unwrap().face,
                    dir_out: s_slice.first().unwrap().dir(),
                };
                let mut cs = vec![x_rec];
                cs.extend(c_slice);
                corners = cs;
                new_segs = s_slice;
                passages = br.passages.clone();
                event = format!(
                    "self-intersection within one branch (segments {oi} and {})",
                    all_segs.len() - 1
                );
            } else {
                // Between branches: x -> (new branch reversed) -> p -> (old
                // branch forward) -> x.
                let brn = &branches[bi];
                let bro = &branches[ob];
                let mut n_all = brn.segs.clone();
                n_all.push(seg);
                let (n_fwd_segs, n_fwd_corners) = portion(
                    &n_all,
                    &brn.corners,
                    Cut {
                        seg: n_all.len() - 1,
                        arc: c.s,
                    },
                    eps,
                );
                let (n_segs, n_corners) = reverse_portion(&n_fwd_segs, &n_fwd_corners);
                let (o_segs, o_corners) = portion(
                    &bro.segs,
                    &bro.corners,
                    Cut {
                        seg: oi,
                        arc: old_arc,
                    },
                    eps,
                );

                let mut cs = Vec::new();
                let mut ss = Vec::new();
                // x record: arrives along the last segment of the cycle,
                // leaves along the first.
                let first_seg = n_segs.first().or(o_segs.first()).expect("nonempty loop");
                let last_seg = o_segs.last().or(n_segs.last()).expect("nonempty loop");
                cs.push(CornerRec {
                    at: x_point,
                    face_in: last_seg.face,
                    dir_in: last_seg.dir(),
                    face_out: first_seg.face,
                    dir_out: first_seg.dir(),
                });
                cs.extend(n_corners);
                ss.extend(n_segs.iter().copied());
                if !n_segs.is_empty() && !o_segs.is_empty() {
                    cs.push(CornerRec {
                        at: seed_pt,
                        face_in: n_segs.last().unwrap().face,
                        dir_in: n_segs.last().unwrap().dir(),
                        face_out: o_segs.first().unwrap().face,
                        dir_out: o_segs.first().unwrap().dir(),
                    });
                }
                cs.extend(o_corners);
                ss.extend(o_segs.iter().copied());
                corners = cs;
                new_segs = ss;
                let mut pas = bro.passages.clone();
                pas.extend(brn.passages.iter().copied());
                passages = pas;
                event = "intersection between branches".to_string();
            }

            let loop_corners: Vec<LoopCorner> =
                corners.iter().map(|c| c.to_loop_corner()).collect();
            let loop_segs = make_segments(p, &loop_corners, &new_segs);
            let meta = LoopMeta {
                policy: Some(policy),
                branch_lengths: [branches[0].len, branches[1].len],
                passages,
                event,
            };
            return finish_loop(p, loop_corners, loop_segs, meta, Some(0));
        }

        // No contact: commit the segment and its end corner.
        let seg_len = seg.len();
        set.push(CurveSeg {
            face: seg.face,
            a: seg.a,
            b: seg.b,
            tag: tag_of(bi, new_idx),
        });
        let br = &mut branches[bi];
        br.segs.push(seg);
        br.len += seg_len;
        match end {
            StepEnd::Exhausted { .. } => {
                br.done = true;
            }
            StepEnd::AtBoundary { .. } => {
                return Err(LoopError::InvalidLoop(
                    "trace reached a boundary on a closed surface".into(),
                ));
            }
            StepEnd::Crossed { at } => {
                br.corners.push(CornerRec {
                    at,
                    face_in: seg.face,
                    dir_in: seg.dir(),
                    face_out: br.tracer.face,
                    dir_out: br.tracer.dir,
                });
            }
            StepEnd::AtVertex { v } => {
                let arrival = TangentDirection::new(SurfacePoint::Vertex(v), seg.face, seg.dir());
                let (out, passage) = continue_through_vertex(mesh, v, &arrival, policy)?;
                br.passages.push(passage);
                br.corners.push(CornerRec {
                    at: SurfacePoint::Vertex(v),
                    face_in: seg.face,
                    dir_in: seg.dir(),
                    face_out: out.face,
                    dir_out: out.dir,
                });
                br.tracer.depart_vertex(&out)?;
            }
        }
    }
}

/// Build a closed quasigeodesic through the given vertices. Consecutive
/// vertices must either share a mesh edge or lie on a common input polygon
/// (the connecting segment then runs straight across that polygon).
pub fn loop_from_vertices(p: &Polyhedron, ids: &[usize]) -> Result<QuasigeodesicLoop, LoopError> {
    let mesh = &p.mesh;
    if ids.len() < 3 {
        return Err(LoopError::InvalidLoop("need at least 3 vertices".into()));
    }
    let mut uniq = ids.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.len() != ids.len() {
        return Err(LoopError::InvalidLoop("repeated vertex in loop".into()));
    }
    for &v in ids {
        if v >= p.n() {
            return Err(LoopError::InvalidLoop(format!("vertex {v} out of range")));
        }
    }

    let mut corners: Vec<CornerRec> = Vec::new();
    let mut raw_segs: Vec<PathSeg> = Vec::new();
    // Per input id, remember the corner index it lands at.
    for w in 0..ids.len() {
        let a = ids[w];
        let b = ids[(w + 1) % ids.len()];
        let start_corner = CornerRec {
            at: SurfacePoint::Vertex(a),
            face_in: 0,
            dir_in: Vec2::ZERO,
            face_out: 0,
            dir_out: Vec2::ZERO,
        };
        corners.push(start_corner);
        if let Some(he) = mesh.find_he(a, b) {
            let f = mesh.face_of(he);
            let k = he % 3;
            raw_segs.push(PathSeg {
                face: f,
                a: mesh.frames[f].p[k],
                b: mesh.frames[f].p[(k + 1) % 3],
            });
            continue;
        }
        // Straight run across a shared input polygon.
        let shared: Vec<usize> = p
            .source_faces_of_vertex(a)
            .into_iter()
            .filter(|s| p.input_polys[*s].contains(&b))
            .collect();
        let Some(&poly) = shared.first() else {
            return Err(LoopError::InvalidLoop(format!(
                "vertices {a} and {b} share no edge and no input face"
            )));
        };
        // Find the triangle of `poly` whose wedge at `a` contains the
        // direction toward `b`.
        let d3 = mesh.verts[b] - mesh.verts[a];
        let mut start: Option<TangentDirection> = None;
        for (fi, _) in mesh.faces.iter().enumerate() {
            if p.source_face[fi] != poly {
                continue;
            }
            let Some(k) = mesh.corner_of(fi, a) else {
                continue;
            };
            let frame = &mesh.frames[fi];
            let dir = frame.project_dir(d3).normalized();
            let e1 = (frame.p[(k + 1) % 3] - frame.p[k]).normalized();
            let e2 = (frame.p[(k + 2) % 3] - frame.p[k]).normalized();
            let width = crate::geom::ccw_angle(e1, e2);
            let local = crate::geom::ccw_angle(e1, dir);
            if local <= width + 1e-9 {
                start = Some(TangentDirection::new(SurfacePoint::Vertex(a), fi, dir));
                break;
            }
        }
        let Some(start) = start else {
            return Err(LoopError::InvalidLoop(format!(
                "no triangle of face {poly} contains the direction {a} -> {b}"
            )));
        };
        let path = trace_geodesic(
            mesh,
            &start,
            StopCondition::FirstVertex {
                max_length: 4.0 * mesh.eps.diag,
            },
            VertexPolicy::Bisector,
        )?;
        match path.reason {
            StopReason::VertexHit(v) if v == b => {}
            ref r => {
                return Err(LoopError::InvalidLoop(format!(
                    "straight run from {a} toward {b} ended with {r:?}"
                )))
            }
        }
        // Interior crossing corners join the loop.
        for (i, seg) in path.segs.iter().enumerate() {
            raw_segs.push(*seg);
            if i + 1 < path.segs.len() {
                corners.push(CornerRec {
                    at: path.points[i + 1],
                    face_in: seg.face,
                    dir_in: seg.dir(),
                    face_out: path.segs[i + 1].face,
                    dir_out: path.segs[i + 1].dir(),
                });
            }
        }
    }

    // Fill in the directions at the vertex corners from adjacent segments.
    let n = corners.len();
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let (pf, pd) = (raw_segs[prev].face, raw_segs[prev].dir());
        let (nf, nd) = (raw_segs[i].face, raw_segs[i].dir());
        corners[i].face_in = pf;
        corners[i].dir_in = pd;
        corners[i].face_out = nf;
        corners[i].dir_out = nd;
    }

    let loop_corners: Vec<LoopCorner> = corners.iter().map(|c| c.to_loop_corner()).collect();
    let segs = make_segments(p, &loop_corners, &raw_segs);
    let meta = LoopMeta {
        policy: None,
        branch_lengths: [0.0, 0.0],
        passages: Vec::new(),
        event: "explicit vertex loop".into(),
    };
    finish_loop(p, loop_corners, segs, meta, None)
}

/// Re-snap loop corners with a widened tolerance (merging corners that
/// collapse onto the same point) and rebuild the loop. Used to retry a
/// subdivision that produced sliver pieces because the loop passed within a
/// hair of a vertex.
pub fn resnap_loop(
    p: &Polyhedron,
    q: &QuasigeodesicLoop,
    eps_scale: f64,
) -> Result<QuasigeodesicLoop, LoopError> {
    let mesh = &p.mesh;
    let eps = mesh.eps.point * eps_scale;
    let n = q.corners.len();

    // Snap each corner to the nearest vertex within the widened tolerance.
    let snapped: Vec<SurfacePoint> = q
        .corners
        .iter()
        .map(|c| {
            let pos = mesh.position(&c.point);
            for f in mesh.faces_of(&c.point) {
                for &v in &mesh.faces[f] {
                    if mesh.verts[v].dist(pos) <= eps {
                        return SurfacePoint::Vertex(v);
                    }
                }
            }
            c.point
        })
        .collect();

    // Keep one corner per run of coincident points (cyclically).
    let mut keep = vec![true; n];
    for i in 0..n {
        let j = (i + 1) % n;
        if mesh.position(&snapped[i]).dist(mesh.position(&snapped[j])) <= eps {
            keep[j] = false;
        }
    }
    if keep.iter().filter(|&&k| k).count() < 2 {
        return Err(LoopError::SubdivisionFailure(
            "loop collapsed during re-snap".into(),
        ));
    }

    let kept: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    let m = kept.len();
    let mut corners = Vec::with_capacity(m);
    let mut raw_segs = Vec::with_capacity(m);
    for w in 0..m {
        let i = kept[w];
        let j = kept[(w + 1) % m];
        let (a, b) = (snapped[i], snapped[j]);
        // A face carrying the straight piece: prefer the old segment's face.
        let old_face = q.segments[i].face;
        let face = if mesh.pos_in_face(&a, old_face).is_some()
            && mesh.pos_in_face(&b, old_face).is_some()
        {
            old_face
        } else {
            let fa = mesh.faces_of(&a);
            let fb = mesh.faces_of(&b);
            *fa.iter().find(|f| fb.contains(f)).ok_or_else(|| {
                LoopError::SubdivisionFailure("re-snapped corners share no face".into())
            })?
        };
        let pa = mesh.pos_in_face(&a, face).expect("corner on face");
        let pb = mesh.pos_in_face(&b, face).expect("corner on face");
        corners.push(LoopCorner {
            point: a,
            face_in: 0,
            dir_in: Vec2::ZERO,
            face_out: 0,
            dir_out: Vec2::ZERO,
            left: 0.0,
            right: 0.0,
        });
        raw_segs.push(PathSeg { face, a: pa, b: pb });
    }
    for w in 0..m {
        let prev = (w + m - 1) % m;
        corners[w].face_in = raw_segs[prev].face;
        corners[w].dir_in = raw_segs[prev].dir();
        corners[w].face_out = raw_segs[w].face;
        corners[w].dir_out = raw_segs[w].dir();
    }
    let loop_corners: Vec<LoopCorner> = corners;
    let segments = make_segments(p, &loop_corners, &raw_segs);
    let new_loop_point = kept
        .iter()
        .position(|&i| i == q.loop_point)
        .unwrap_or_else(|| {
            // x merged into a neighbor; use the surviving corner closest to it.
            let xp = mesh.position(&q.corners[q.loop_point].point);
            kept.iter()
                .enumerate()
                .min_by(|(_, &a), (_, &b)| {
                    mesh.position(&snapped[a])
                        .dist(xp)
                        .partial_cmp(&mesh.position(&snapped[b]).dist(xp))
                        .unwrap()
                })
                .map(|(w, _)| w)
                .unwrap()
        });
    let mut meta = q.meta.clone();
    meta.event = format!("{}; re-snapped at {eps_scale}x point tolerance", meta.event);
    finish_loop(p, loop_corners, segments, meta, Some(new_loop_point))
}

// --- validation ---

#[derive(Clone, Debug, Serialize)]
pub struct CornerCheck {
    pub index: usize,
    pub locus: SurfacePoint,
    pub left: f64,
    pub right: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopValidation {
    pub corners: Vec<CornerCheck>,
    pub loop_point: usize,
    pub beta: f64,
    pub simple: bool,
    pub crossing_pairs: Vec<(usize, usize)>,
    pub passes: bool,
}

/// Check the quasigeodesic angle conditions at every corner and certify the
/// loop is simple (no two segments touch except at shared corners).
pub fn validate_loop(p: &Polyhedron, q: &QuasigeodesicLoop) -> LoopValidation {
    let eps = p.eps().angle;
    let n = q.corners.len();
    let mut corners = Vec::with_capacity(n);
    for (i, c) in q.corners.iter().enumerate() {
        let ok = if i == q.loop_point {
            // At most one side may exceed π, and β < 2π.
            let over = [c.left, c.right].iter().filter(|&&a| a > PI + eps).count();
            over <= 1 && c.left.max(c.right) < TAU - eps
        } else {
            c.left <= PI + eps && c.right <= PI + eps
        };
        corners.push(CornerCheck {
            index: i,
            locus: c.point,
            left: c.left,
            right: c.right,
            ok,
        });
    }

    // Simplicity: pairwise contacts, allowing only junctions of neighbors.
    let tol = p.eps().point;
    let mut crossing_pairs = Vec::new();
    let mut set = SegmentSet::default();
    for (i, s) in q.segments.iter().enumerate() {
        set.push(CurveSeg {
            face: s.face,
            a: s.a,
            b: s.b,
            tag: i as u64,
        });
    }
    for i in 0..n {
        let si = &q.segments[i];
        let corner_i = si.a; // shared with predecessor
        let corner_next = si.b;
        if let Some(c) = set.first_contact(si.face, si.a, si.b, tol, |tag, pt| {
            let j = tag as usize;
            if j == i {
                return true;
            }
            if (j + 1) % n == i {
                // predecessor: shared corner at si.a
                return pt.dist(corner_i) <= 2.0 * tol;
            }
            if (i + 1) % n == j {
                return pt.dist(corner_next) <= 2.0 * tol;
            }
            false
        }) {
            let j = set.segs[c.seg].tag as usize;
            let pair = (i.min(j), i.max(j));
            if !crossing_pairs.contains(&pair) {
                crossing_pairs.push(pair);
            }
        }
    }
    let simple = crossing_pairs.is_empty();
    let passes = simple && corners.iter().all(|c| c.ok);
    LoopValidation {
        corners,
        loop_point: q.loop_point,
        beta: q.beta(),
        simple,
        crossing_pairs,
        passes,
    }
}

// --- splitting ---

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// Where a half-mesh vertex came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Original polyhedron vertex.
    Orig(usize),
    /// Loop corner (index into the loop's corner list).
    QCorner(usize),
}

/// One boundary edge of a half, covering loop segment `corner_from ->
/// corner_to`. `he` is the half's own directed boundary half-edge.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryEdge {
    pub he: usize,
    pub corner_from: usize,
    pub corner_to: usize,
}

/// One closed side of the surface after cutting along Q: a triangulated
/// topological disk whose boundary is exactly Q.
#[derive(Clone, Debug)]
pub struct Half {
    pub side: Side,
    pub mesh: TriMesh,
    pub provenance: Vec<Provenance>,
    /// Original polyhedron face per half face.
    pub face_parent: Vec<usize>,
    /// Interior original vertices: (local id, original id, curvature).
    pub interior: Vec<(usize, usize, f64)>,
    /// Boundary edges in loop-segment order (index = loop segment index).
    pub boundary: Vec<BoundaryEdge>,
    /// Local vertex id of the loop point x.
    pub x_local: usize,
    pub enclosed_curvature: f64,
    /// Total turn of Q toward this half.
    pub turn: f64,
    /// Arc position of each loop corner (copied from the loop).
    pub corner_arcs: Vec<f64>,
    /// Per corner: true when the corner bends (a vertex corner or x).
    pub corner_bent: Vec<bool>,
    /// Length of each loop segment (copied from the loop).
    pub seg_lens: Vec<f64>,
    pub loop_len: f64,
}

impl Half {
    /// Local vertex id of loop corner `i`.
    pub fn corner_local(&self, i: usize) -> usize {
        let he = self.boundary[i].he;
        debug_assert_eq!(self.boundary[i].corner_from, i);
        if self.side == Side::Left {
            self.mesh.origin(he)
        } else {
            self.mesh.head(he)
        }
    }

    /// Arc position of loop corner `ci`, measured from x.
    pub fn corner_arc(&self, ci: usize) -> f64 {
        self.corner_arcs[ci]
    }

    /// Whether loop corner `ci` is a true corner (bends the development).
    pub fn corner_is_bent(&self, ci: usize) -> bool {
        self.corner_bent[ci]
    }

    /// The loop segment a boundary half-edge covers.
    pub fn boundary_he_corner(&self, he: usize) -> Option<usize> {
        self.boundary
            .iter()
            .find(|b| b.he == he)
            .map(|b| b.corner_from)
    }

    /// Arc position (from x, along the loop travel direction) for a point on
    /// boundary half-edge `he` at parameter `t` along that half-edge.
    pub fn arc_at_loop(&self, he: usize, t: f64) -> f64 {
        for be in &self.boundary {
            if be.he == he {
                let len = self.seg_lens[be.corner_from];
                let along = t * len;
                let local = if self.side == Side::Left {
                    along
                } else {
                    len - along
                };
                return (self.corner_arcs[be.corner_from] + local)
                    % self.loop_len.max(f64::MIN_POSITIVE);
            }
        }
        panic!("half-edge {he} is not a boundary edge");
    }

    /// Interior surface angle toward this half at a boundary vertex.
    pub fn boundary_angle(&self, local_v: usize) -> f64 {
        self.mesh.fan(local_v).total
    }
}

struct Retess {
    verts: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    face_parent: Vec<usize>,
    corner_gid: Vec<usize>,
}

fn retess_along_loop(p: &Polyhedron, q: &QuasigeodesicLoop) -> Result<Retess, LoopError> {
    let mesh = &p.mesh;
    let eps_retess = mesh.eps.retess();
    let n = q.corners.len();

    // Global ids for corners.
    let mut verts = mesh.verts.clone();
    let mut corner_gid = Vec::with_capacity(n);
    for c in &q.corners {
        match c.point {
            SurfacePoint::Vertex(v) => corner_gid.push(v),
            _ => {
                corner_gid.push(verts.len());
                verts.push(mesh.position(&c.point));
            }
        }
    }

    // Edge subdivision points per canonical half-edge.
    let mut edge_points: BTreeMap<usize, Vec<(f64, usize)>> = BTreeMap::new();
    for (i, c) in q.corners.iter().enumerate() {
        if let SurfacePoint::Edge { he, t } = c.point {
            let canon = mesh.canonical_edge(he);
            let tc = if canon == he { t } else { 1.0 - t };
            edge_points
                .entry(canon)
                .or_default()
                .push((tc, corner_gid[i]));
        }
    }

    // Chains per face: group consecutive non-edge-aligned segments joined by
    // face-interior corners. Start at a corner that is not a face locus.
    let mut chains_per_face: BTreeMap<usize, Vec<Chain>> = BTreeMap::new();
    let start = (0..n)
        .find(|&i| !matches!(q.corners[i].point, SurfacePoint::Face { .. }))
        .ok_or_else(|| LoopError::InvalidLoop("loop entirely inside one face".into()))?;
    let mut i = start;
    loop {
        let seg_idx = i;
        let seg = &q.segments[seg_idx];
        if seg.along_edge.is_some() {
            i = (i + 1) % n;
            if i == start {
                break;
            }
            continue;
        }
        // Collect the chain starting with this segment.
        let face = seg.face;
        let mut nodes = vec![NodeRef {
            gid: corner_gid[seg_idx],
            pos: seg.a,
        }];
        let mut j = seg_idx;
        loop {
            let s = &q.segments[j];
            debug_assert_eq!(s.face, face);
            let next_corner = (j + 1) % n;
            nodes.push(NodeRef {
                gid: corner_gid[next_corner],
                pos: s.b,
            });
            if matches!(q.corners[next_corner].point, SurfacePoint::Face { .. }) {
                j = next_corner;
            } else {
                break;
            }
        }
        chains_per_face
            .entry(face)
            .or_default()
            .push(Chain { nodes });
        i = (j + 1) % n;
        if i == start {
            break;
        }
    }

    // Rebuild faces.
    let mut faces = Vec::new();
    let mut face_parent = Vec::new();
    for f in 0..mesh.faces.len() {
        let mut fc = FaceCut {
            corner_gids: mesh.faces[f],
            corner_pos: mesh.frames[f].p,
            edge_points: [Vec::new(), Vec::new(), Vec::new()],
            chains: chains_per_face.remove(&f).unwrap_or_default(),
        };
        for k in 0..3 {
            let he = mesh.he_of(f, k);
            let canon = mesh.canonical_edge(he);
            if let Some(pts) = edge_points.get(&canon) {
                for &(tc, gid) in pts {
                    let t = if canon == he { tc } else { 1.0 - tc };
                    fc.edge_points[k].push((t, gid));
                }
            }
        }
        if fc.is_trivial() {
            faces.push(mesh.faces[f]);
            face_parent.push(f);
            continue;
        }
        for tri in cut_face(&fc, eps_retess.area)? {
            faces.push(tri);
            face_parent.push(f);
        }
    }

    Ok(Retess {
        verts,
        faces,
        face_parent,
        corner_gid,
    })
}

/// Split the surface along a validated loop into the left and right halves.
pub fn split_halves(p: &Polyhedron, q: &QuasigeodesicLoop) -> Result<(Half, Half), LoopError> {
    let retess = retess_along_loop(p, q)?;
    let n = q.corners.len();
    let tmesh = TriMesh::build(retess.verts.clone(), retess.faces.clone(), p.eps().retess())
        .map_err(|e| LoopError::SubdivisionFailure(format!("re-tessellation: {e}")))?;

    // Directed loop edges in travel order.
    let mut q_dir_he = Vec::with_capacity(n);
    let mut q_edge_set: HashSet<usize> = HashSet::new();
    for i in 0..n {
        let a = retess.corner_gid[i];
        let b = retess.corner_gid[(i + 1) % n];
        let he = tmesh.find_he(a, b).ok_or_else(|| {
            LoopError::SubdivisionFailure(format!(
                "loop segment {i} is not an edge after re-tessellation"
            ))
        })?;
        q_dir_he.push(he);
        q_edge_set.insert(tmesh.canonical_edge(he));
    }

    // Flood fill sides without crossing loop edges.
    let mut label = vec![u8::MAX; tmesh.faces.len()];
    let seed_left = tmesh.face_of(q_dir_he[0]);
    let mut stack = vec![(seed_left, 0u8)];
    while let Some((f, side)) = stack.pop() {
        if label[f] != u8::MAX {
            continue;
        }
        label[f] = side;
        for k in 0..3 {
            let he = tmesh.he_of(f, k);
            if q_edge_set.contains(&tmesh.canonical_edge(he)) {
                continue;
            }
            if let Some(tw) = tmesh.twin_of(he) {
                let g = tmesh.face_of(tw);
                if label[g] == u8::MAX {
                    stack.push((g, side));
                }
            }
        }
    }
    // The complement of the left region is the right region.
    let seed_right = tmesh
        .twin_of(q_dir_he[0])
        .map(|tw| tmesh.face_of(tw))
        .ok_or_else(|| LoopError::SubdivisionFailure("loop edge has no twin".into()))?;
    if label[seed_right] != u8::MAX {
        return Err(LoopError::SubdivisionFailure(
            "loop does not separate the surface (flood fill leaked)".into(),
        ));
    }
    let mut stack = vec![(seed_right, 1u8)];
    while let Some((f, side)) = stack.pop() {
        if label[f] != u8::MAX {
            continue;
        }
        label[f] = side;
        for k in 0..3 {
            let he = tmesh.he_of(f, k);
            if q_edge_set.contains(&tmesh.canonical_edge(he)) {
                continue;
            }
            if let Some(tw) = tmesh.twin_of(he) {
                let g = tmesh.face_of(tw);
                if label[g] == u8::MAX {
                    stack.push((g, side));
                }
            }
        }
    }
    if label.contains(&u8::MAX) {
        return Err(LoopError::SubdivisionFailure(
            "unlabeled faces after flood fill".into(),
        ));
    }

    let left = extract_half(p, q, &retess, &tmesh, &label, 0, Side::Left)?;
    let right = extract_half(p, q, &retess, &tmesh, &label, 1, Side::Right)?;

    // Gauss-Bonnet bookkeeping must close on both sides.
    for h in [&left, &right] {
        let gb = h.turn + h.enclosed_curvature;
        if (gb - TAU).abs() > 1e-8 {
            return Err(LoopError::SubdivisionFailure(format!(
                "Gauss-Bonnet violated on {:?} half: turn {} + curvature {} != 2π",
                h.side, h.turn, h.enclosed_curvature
            )));
        }
    }
    Ok((left, right))
}

fn extract_half(
    p: &Polyhedron,
    q: &QuasigeodesicLoop,
    retess: &Retess,
    tmesh: &TriMesh,
    label: &[u8],
    side_label: u8,
    side: Side,
) -> Result<Half, LoopError> {
    let n = q.corners.len();
    let mut gid_to_local: HashMap<usize, usize> = HashMap::new();
    let mut local_verts = Vec::new();
    let mut provenance = Vec::new();
    let mut faces = Vec::new();
    let mut face_parent = Vec::new();

    let corner_of_gid: HashMap<usize, usize> = retess
        .corner_gid
        .iter()
        .enumerate()
        .map(|(i, &g)| (g, i))
        .collect();

    for (f, tri) in tmesh.faces.iter().enumerate() {
        if label[f] != side_label {
            continue;
        }
        let mut local_tri = [0usize; 3];
        for (k, &g) in tri.iter().enumerate() {
            let lid = *gid_to_local.entry(g).or_insert_with(|| {
                let lid = local_verts.len();
                local_verts.push(retess.verts[g]);
                provenance.push(match corner_of_gid.get(&g) {
                    Some(&ci) => Provenance::QCorner(ci),
                    None => Provenance::Orig(g),
                });
                lid
            });
            local_tri[k] = lid;
        }
        faces.push(local_tri);
        face_parent.push(retess.face_parent[f]);
    }
    if faces.is_empty() {
        return Err(LoopError::SubdivisionFailure("empty half".into()));
    }

    let mesh = TriMesh::build(local_verts, faces, p.eps().retess())
        .map_err(|e| LoopError::SubdivisionFailure(format!("half mesh: {e}")))?;

    // Both-orig vertices on Q: the set of corner gids.
    let corner_gid_set: HashSet<usize> = retess.corner_gid.iter().copied().collect();

    let mut interior = Vec::new();
    let mut enclosed = 0.0;
    for (lid, prov) in provenance.iter().enumerate() {
        if let Provenance::Orig(g) = prov {
            if !corner_gid_set.contains(g) {
                let w = p.curvature[*g];
                interior.push((lid, *g, w));
                enclosed += w;
            }
        }
    }

    // Boundary edges in loop order.
    let mut boundary = Vec::with_capacity(n);
    for i in 0..n {
        let ga = retess.corner_gid[i];
        let gb = retess.corner_gid[(i + 1) % n];
        let (&la, &lb) = match (gid_to_local.get(&ga), gid_to_local.get(&gb)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(LoopError::SubdivisionFailure(
                    "loop corner missing from half".into(),
                ))
            }
        };
        let (from, to) = if side == Side::Left {
            (la, lb)
        } else {
            (lb, la)
        };
        let he = mesh.find_he(from, to).ok_or_else(|| {
            LoopError::SubdivisionFailure(format!("boundary edge {i} missing in half"))
        })?;
        if mesh.twin_of(he).is_some() {
            return Err(LoopError::SubdivisionFailure(format!(
                "loop edge {i} is interior to a half"
            )));
        }
        boundary.push(BoundaryEdge {
            he,
            corner_from: i,
            corner_to: (i + 1) % n,
        });
    }

    // Disk check: χ = V − E + F = 1, one boundary cycle.
    let v = mesh.verts.len() as i64;
    let f = mesh.faces.len() as i64;
    let b = mesh.boundary_count() as i64;
    let e = (3 * f + b) / 2;
    if v - e + f != 1 {
        return Err(LoopError::SubdivisionFailure(format!(
            "half is not a disk (χ = {})",
            v - e + f
        )));
    }
    if b != n as i64 {
        return Err(LoopError::SubdivisionFailure(format!(
            "boundary has {b} edges, expected {n}"
        )));
    }

    // Turn toward this half: Σ (π − interior angle) over boundary vertices.
    let mut turn = 0.0;
    for be in &boundary {
        let lv = if side == Side::Left {
            mesh.origin(be.he)
        } else {
            mesh.head(be.he)
        };
        turn += PI - mesh.fan(lv).total;
    }

    let x_gid = retess.corner_gid[q.loop_point];
    let x_local = *gid_to_local
        .get(&x_gid)
        .ok_or_else(|| LoopError::SubdivisionFailure("loop point missing from half".into()))?;

    Ok(Half {
        side,
        mesh,
        provenance,
        face_parent,
        interior,
        boundary,
        x_local,
        enclosed_curvature: enclosed,
        turn,
        corner_arcs: q.arc.clone(),
        corner_bent: q
            .corners
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (c.left - PI).abs() > 1e-9 || (c.right - PI).abs() > 1e-9 || i == q.loop_point
            })
            .collect(),
        seg_lens: q.segments.iter().map(|s| s.len).collect(),
        loop_len: q.total_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    fn cube_girth_seed(p: &Polyhedron) -> (SurfacePoint, TangentDirection) {
        let (face, sp) = p.locate(0, Vec3::new(0.5, 0.25, 0.0)).unwrap();
        let frame = &p.mesh.frames[face];
        let dir = frame.project_dir(Vec3::new(0.0, 1.0, 0.0)).normalized();
        (sp, TangentDirection::new(sp, face, dir))
    }

    #[test]
    fn girth_loop_closes_as_geodesic() {
        let p = fixtures::unit_cube();
        let (sp, td) = cube_girth_seed(&p);
        let q = construct_loop(&p, &sp, &td, VertexPolicy::Bisector, 50.0).unwrap();
        assert_relative_eq!(q.total_len, 4.0, epsilon = 1e-9);
        for c in &q.corners {
            assert_relative_eq!(c.left, PI, epsilon = 1e-9);
            assert_relative_eq!(c.right, PI, epsilon = 1e-9);
        }
        let val = validate_loop(&p, &q);
        assert!(val.passes, "girth loop validates: {val:?}");
        assert_relative_eq!(q.turn_left, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn girth_split_has_balanced_halves() {
        let p = fixtures::unit_cube();
        let (sp, td) = cube_girth_seed(&p);
        let q = construct_loop(&p, &sp, &td, VertexPolicy::Bisector, 50.0).unwrap();
        let (l, r) = split_halves(&p, &q).unwrap();
        assert_eq!(l.interior.len(), 4);
        assert_eq!(r.interior.len(), 4);
        assert_relative_eq!(l.enclosed_curvature, TAU, epsilon = 1e-9);
        assert_relative_eq!(r.enclosed_curvature, TAU, epsilon = 1e-9);
        assert_relative_eq!(l.turn, 0.0, epsilon = 1e-9);
        // Areas partition the cube surface.
        assert_relative_eq!(
            l.mesh.total_area() + r.mesh.total_area(),
            6.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn start_at_vertex_is_rejected() {
        let p = fixtures::unit_cube();
        let sp = SurfacePoint::Vertex(0);
        let td = TangentDirection::new(sp, 0, Vec2::new(1.0, 0.0));
        assert!(matches!(
            construct_loop(&p, &sp, &td, VertexPolicy::Bisector, 10.0),
            Err(LoopError::StartAtVertex)
        ));
    }

    #[test]
    fn regular_tetrahedron_has_no_loop() {
        // Geodesics on the isosceles tetrahedron never self-intersect, so the
        // budget runs out.
        let p = fixtures::regular_tetrahedron();
        let f = 0;
        let frame = &p.mesh.frames[f];
        let c = (frame.p[0] + frame.p[1] + frame.p[2]) / 3.0;
        let sp = p.mesh.point_from_face_pos(f, c);
        let td = TangentDirection::new(sp, f, Vec2::new(0.378_624_3, 0.925_551_1).normalized());
        match construct_loop(&p, &sp, &td, VertexPolicy::Bisector, 30.0) {
            Err(LoopError::NoIntersection { searched }) => {
                assert_relative_eq!(searched, 30.0);
            }
            other => panic!("expected NoIntersection, got {other:?}"),
        }
    }

    #[test]
    fn bottom_face_loop_is_quasigeodesic() {
        let p = fixtures::unit_cube();
        let q = loop_from_vertices(&p, &[0, 1, 2, 3]).unwrap();
        assert_eq!(q.corners.len(), 4);
        assert_relative_eq!(q.total_len, 4.0, epsilon = 1e-12);
        for c in &q.corners {
            let (lo, hi) = (c.left.min(c.right), c.left.max(c.right));
            assert_relative_eq!(lo, PI / 2.0, epsilon = 1e-9);
            assert_relative_eq!(hi, PI, epsilon = 1e-9);
        }
        let val = validate_loop(&p, &q);
        assert!(val.passes, "{val:?}");
    }

    #[test]
    fn bottom_face_split() {
        let p = fixtures::unit_cube();
        let q = loop_from_vertices(&p, &[0, 1, 2, 3]).unwrap();
        let (l, r) = split_halves(&p, &q).unwrap();
        // One side is the bottom face alone, the other the remaining five.
        let (small, big) = if l.mesh.faces.len() < r.mesh.faces.len() {
            (l, r)
        } else {
            (r, l)
        };
        assert_eq!(small.interior.len(), 0);
        assert_relative_eq!(small.mesh.total_area(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(small.turn, TAU, epsilon = 1e-9);
        assert_eq!(big.interior.len(), 4);
        assert_relative_eq!(big.enclosed_curvature, TAU, epsilon = 1e-9);
        assert_relative_eq!(big.turn, 0.0, epsilon = 1e-9);
        assert_relative_eq!(big.mesh.total_area(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_triangle_loop_matches_quasigeodesic_angles() {
        // Three face diagonals around corner 0: at each corner π to one side
        // and π/2 to the other.
        let p = fixtures::unit_cube();
        let q = loop_from_vertices(&p, &[1, 3, 4]).unwrap();
        let val = validate_loop(&p, &q);
        assert!(val.passes, "{val:?}");
        for c in q.corners.iter().filter(|c| c.point.is_vertex()) {
            let (lo, hi) = (c.left.min(c.right), c.left.max(c.right));
            assert_relative_eq!(lo, PI / 2.0, epsilon = 1e-9);
            assert_relative_eq!(hi, PI, epsilon = 1e-9);
        }
        assert_relative_eq!(q.total_len, 3.0 * 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn diagonal_triangle_split() {
        let p = fixtures::unit_cube();
        let q = loop_from_vertices(&p, &[1, 3, 4]).unwrap();
        let (l, r) = split_halves(&p, &q).unwrap();
        let (small, big) = if l.interior.len() < r.interior.len() {
            (l, r)
        } else {
            (r, l)
        };
        assert_eq!(small.interior.len(), 1);
        assert_eq!(small.interior[0].1, 0);
        assert_relative_eq!(small.enclosed_curvature, PI / 2.0, epsilon = 1e-9);
        assert_relative_eq!(small.turn, 3.0 * PI / 2.0, epsilon = 1e-9);
        assert_eq!(big.interior.len(), 4);
        assert_relative_eq!(big.enclosed_curvature, TAU, epsilon = 1e-9);
        assert_relative_eq!(big.turn, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn invalid_corner_loop_fails_validation() {
        // Two edges and a face diagonal around a cube corner: the diagonal
        // corners see more than π to one side.
        let p = fixtures::unit_cube();
        let q = loop_from_vertices(&p, &[0, 1, 5]).unwrap();
        let val = validate_loop(&p, &q);
        assert!(!val.passes);
        let bad: Vec<_> = val.corners.iter().filter(|c| !c.ok).collect();
        assert!(!bad.is_empty());
        for c in bad {
            assert!(c.left.max(c.right) > PI + 1e-9);
        }
    }

    #[test]
    fn constructed_loop_is_deterministic() {
        let p = fixtures::unit_cube();
        let (sp, td) = cube_girth_seed(&p);
        let a = construct_loop(&p, &sp, &td, VertexPolicy::Bisector, 50.0).unwrap();
        let b = construct_loop(&p, &sp, &td, VertexPolicy::Bisector, 50.0).unwrap();
        assert_eq!(a.corners.len(), b.corners.len());
        for (ca, cb) in a.corners.iter().zip(b.corners.iter()) {
            assert_eq!(format!("{:?}", ca.point), format!("{:?}", cb.point));
            assert_eq!(ca.left.to_bits(), cb.left.to_bits());
            assert_eq!(ca.right.to_bits(), cb.right.to_bits());
        }
    }

    #[test]
    fn three_five_loop_turn_and_retrace() {
        // The traced loop with a 3/5 split turns π/2 toward the 3-vertex
        // side; retracing it from x with its recorded direction comes back
        // to x.
        let p = fixtures::unit_cube();
        let (sp, td) = fixtures::seed_tangent(&p, fixtures::CUBE_THREE_FIVE_SEED);
        let q = construct_loop(&p, &sp, &td, VertexPolicy::Bisector, 50.0).unwrap();
        let small_turn = q.turn_left.abs().min(q.turn_right.abs());
        assert_relative_eq!(small_turn, PI / 2.0, epsilon = 1e-9);
        let x = &q.corners[q.loop_point];
        let start = TangentDirection::new(x.point, x.face_out, x.dir_out);
        let path = crate::geodesics::trace_geodesic(
            &p.mesh,
            &start,
            crate::geodesics::StopCondition::MaxLength(q.total_len),
            VertexPolicy::Bisector,
        )
        .unwrap();
        let gap = p.mesh.position(path.end()).dist(p.mesh.position(&x.point));
        assert!(gap < 1e-9, "loop retrace gap {gap}");
    }

    #[test]
    fn traced_loop_through_vertex_is_quasigeodesic() {
        // Aim the trace exactly at a cube corner so the loop must continue
        // through it; both continuation policies give valid loops.
        let p = fixtures::unit_cube();
        let (face, sp) = p.locate(0, Vec3::new(0.5, 0.25, 0.0)).unwrap();
        let frame = &p.mesh.frames[face];
        let pos = frame.project_point(Vec3::new(0.5, 0.25, 0.0));
        let target = frame.project_point(Vec3::new(1.0, 1.0, 0.0));
        let td = TangentDirection::new(sp, face, (target - pos).normalized());
        for policy in [VertexPolicy::Bisector, VertexPolicy::LeftmostAdmissible] {
            let q = construct_loop(&p, &sp, &td, policy, 60.0).unwrap();
            assert!(!q.meta.passages.is_empty(), "{policy:?}: no vertex passage");
            assert!(q.corners.iter().any(|c| c.point.is_vertex()));
            let val = validate_loop(&p, &q);
            assert!(val.passes, "{policy:?}: {val:?}");
            // The vertex on Q belongs to neither half's interior.
            let (l, r) = split_halves(&p, &q).unwrap();
            let on_q: Vec<usize> = q
                .corners
                .iter()
                .filter_map(|c| match c.point {
                    SurfacePoint::Vertex(v) => Some(v),
                    _ => None,
                })
                .collect();
            for h in [&l, &r] {
                for &(_, orig, _) in &h.interior {
                    assert!(!on_q.contains(&orig));
                }
            }
            assert_eq!(l.interior.len() + r.interior.len() + on_q.len(), 8);
        }
    }

    #[test]
    fn random_hull_loops_satisfy_gauss_bonnet() {
        for seed in 0..8u64 {
            let p = fixtures::random_hull(seed, 10 + (seed as usize % 8));
            let f = (seed as usize * 3) % p.mesh.faces.len();
            let frame = &p.mesh.frames[f];
            let c = (frame.p[0] + frame.p[1] + frame.p[2]) / 3.0;
            let sp = p.mesh.point_from_face_pos(f, c);
            let ang = 0.3 + seed as f64 * 0.61;
            let td = TangentDirection::new(sp, f, Vec2::new(ang.cos(), ang.sin()));
            let q = match construct_loop(&p, &sp, &td, VertexPolicy::Bisector, 100.0) {
                Ok(q) => q,
                Err(LoopError::NoIntersection { .. }) => continue,
                Err(e) => panic!("seed {seed}: {e}"),
            };
            let val = validate_loop(&p, &q);
            assert!(val.passes, "seed {seed}: {val:?}");
            let (l, r) = split_halves(&p, &q).unwrap();
            assert_relative_eq!(l.turn + l.enclosed_curvature, TAU, epsilon = 1e-8);
            assert_relative_eq!(r.turn + r.enclosed_curvature, TAU, epsilon = 1e-8);
            assert_relative_eq!(
                l.mesh.total_area() + r.mesh.total_area(),
                p.mesh.total_area(),
                max_relative = 1e-9
            );
        }
    }
}
