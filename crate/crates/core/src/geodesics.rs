//! Intrinsic straight-line machinery: develop face strips into the plane,
//! trace geodesics across faces, and continue quasigeodesically through
//! vertices.
//!
//! A trace keeps its state in the *current face's frame* and transfers
//! (point, direction) across each crossed edge, so coordinates stay
//! face-local and drift does not accumulate with strip length.

use crate::geom::{ccw_angle, Iso2, Vec2, PI};
use crate::mesh::{MeshError, SurfacePoint, TangentDirection, TriMesh};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("faces {0} and {1} are not adjacent")]
    NonAdjacentFaces(usize, usize),
    #[error("stalled trace in face {face} after {traveled:.6} length units")]
    StalledTrace { face: usize, traveled: f64 },
    #[error("start point/direction invalid: {0}")]
    BadStart(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// One straight piece of a path inside a single face, in that face's frame.
#[derive(Clone, Copy, Debug)]
pub struct PathSeg {
    pub face: usize,
    pub a: Vec2,
    pub b: Vec2,
}

impl PathSeg {
    pub fn len(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn dir(&self) -> Vec2 {
        (self.b - self.a).normalized()
    }

    pub fn reversed(&self) -> PathSeg {
        PathSeg {
            face: self.face,
            a: self.b,
            b: self.a,
        }
    }
}

/// Why a trace ended.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StopReason {
    LengthExhausted,
    VertexHit(usize),
    /// Hit a segment of the query curve; carries the tag of the segment hit
    /// and the parameter along it.
    CurveHit {
        tag: u64,
        u: f64,
    },
    /// Reached a boundary edge of an open mesh.
    BoundaryHit,
}

/// A vertex the trace passed through, with the side angles of the chosen
/// continuation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VertexPassage {
    pub vertex: usize,
    pub left: f64,
    pub right: f64,
}

#[derive(Clone, Debug)]
pub struct GeodesicPath {
    /// Corner points: `points[i]` joins `segs[i-1]` to `segs[i]`.
    pub points: Vec<SurfacePoint>,
    pub segs: Vec<PathSeg>,
    pub length: f64,
    pub reason: StopReason,
    pub passages: Vec<VertexPassage>,
}

impl GeodesicPath {
    pub fn faces(&self) -> Vec<usize> {
        self.segs.iter().map(|s| s.face).collect()
    }

    pub fn end(&self) -> &SurfacePoint {
        self.points.last().expect("nonempty path")
    }
}

/// Continuation rule at a vertex passage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VertexPolicy {
    /// Split the total angle evenly: L = R = (2π − ω)/2.
    Bisector,
    /// L = π exactly when the total angle admits it, otherwise bisect.
    LeftmostAdmissible,
}

/// Face-bucketed straight segments on the surface, queried for first contact
/// by advancing traces.
#[derive(Clone, Debug, Default)]
pub struct SegmentSet {
    pub segs: Vec<CurveSeg>,
    by_face: std::collections::BTreeMap<usize, Vec<usize>>,
}

#[derive(Clone, Copy, Debug)]
pub struct CurveSeg {
    pub face: usize,
    pub a: Vec2,
    pub b: Vec2,
    pub tag: u64,
}

/// First contact of a probe segment with a stored segment.
#[derive(Clone, Copy, Debug)]
pub struct Contact {
    /// Arc position of the contact along the probe segment, in length units.
    pub s: f64,
    /// Parameter in `[0,1]` along the stored segment.
    pub u: f64,
    pub seg: usize,
    pub point: Vec2,
}

impl SegmentSet {
    pub fn push(&mut self, seg: CurveSeg) -> usize {
        let id = self.segs.len();
        self.by_face.entry(seg.face).or_default().push(id);
        self.segs.push(seg);
        id
    }

    /// Earliest contact of probe `[a, b]` in `face` with any stored segment,
    /// within distance tolerance `tol`. `skip` can veto a contact given the
    /// stored segment's tag and the contact point.
    pub fn first_contact(
        &self,
        face: usize,
        a: Vec2,
        b: Vec2,
        tol: f64,
        mut skip: impl FnMut(u64, Vec2) -> bool,
    ) -> Option<Contact> {
        let ids = self.by_face.get(&face)?;
        let mut best: Option<Contact> = None;
        for &id in ids {
            let seg = &self.segs[id];
            if let Some((s, u, point)) = segment_contact(a, b, seg.a, seg.b, tol) {
                if skip(seg.tag, point) {
                    continue;
                }
                if best.is_none_or(|c| s < c.s) {
                    best = Some(Contact {
                        s,
                        u,
                        seg: id,
                        point,
                    });
                }
            }
        }
        best
    }
}

/// Earliest contact of probe `[p0, p1]` with segment `[q0, q1]`:
/// transversal crossings plus touches within `tol` (endpoint-on-segment and
/// near-parallel overlap). Returns (arc length along probe, parameter along
/// the stored segment, contact point).
pub fn segment_contact(
    p0: Vec2,
    p1: Vec2,
    q0: Vec2,
    q1: Vec2,
    tol: f64,
) -> Option<(f64, f64, Vec2)> {
    let d = p1 - p0;
    let e = q1 - q0;
    let dlen = d.norm();
    if dlen <= 0.0 {
        return None;
    }
    let elen = e.norm();
    let denom = d.cross(e);
    let rhs = q0 - p0;
    let mut best: Option<(f64, f64, Vec2)> = None;
    let mut consider = |s: f64, u: f64, point: Vec2| {
        if best.is_none_or(|b| s < b.0) {
            best = Some((s, u, point));
        }
    };

    if denom.abs() > 1e-12 * dlen * elen.max(1.0) {
        // Transversal: p0 + t·d = q0 + u·e.
        let t = rhs.cross(e) / denom;
        let u = rhs.cross(d) / denom;
        let t_tol = tol / dlen;
        let u_tol = if elen > 0.0 { tol / elen } else { 0.0 };
        if t >= -t_tol && t <= 1.0 + t_tol && u >= -u_tol && u <= 1.0 + u_tol {
            let tc = t.clamp(0.0, 1.0);
            let uc = u.clamp(0.0, 1.0);
            consider(tc * dlen, uc, p0 + d * tc);
        }
    } else {
        // Near-parallel: lateral separation, then 1D overlap.
        let lateral = rhs.cross(d) / dlen;
        if lateral.abs() <= tol {
            let s0 = (q0 - p0).dot(d) / dlen;
            let s1 = (q1 - p0).dot(d) / dlen;
            let (lo, hi, rev) = if s0 <= s1 {
                (s0, s1, false)
            } else {
                (s1, s0, true)
            };
            let start = lo.max(0.0);
            if start <= hi + tol && start <= dlen + tol {
                let s = start.clamp(0.0, dlen);
                let u = if hi - lo > 0.0 {
                    let raw = (s - lo) / (hi - lo);
                    if rev {
                        1.0 - raw
                    } else {
                        raw
                    }
                } else {
                    0.0
                };
                consider(s, u.clamp(0.0, 1.0), p0 + d * (s / dlen));
            }
        }
    }

    // Endpoint-to-segment touches (tip contacts the cases above can miss at
    // tolerance boundaries).
    let project = |pt: Vec2| -> (f64, f64) {
        let t = ((pt - p0).dot(d) / (dlen * dlen)).clamp(0.0, 1.0);
        (t, pt.dist(p0 + d * t))
    };
    for (pt, u) in [(q0, 0.0), (q1, 1.0)] {
        let (t, dist) = project(pt);
        if dist <= tol {
            consider(t * dlen, u, pt);
        }
    }
    if elen > 0.0 {
        for (pt, s) in [(p0, 0.0), (p1, dlen)] {
            let u = ((pt - q0).dot(e) / (elen * elen)).clamp(0.0, 1.0);
            if pt.dist(q0 + e * u) <= tol {
                consider(s, u, pt);
            }
        }
    }
    best
}

/// Where a single tracing step ended.
#[derive(Clone, Debug)]
pub enum StepEnd {
    /// Crossed into the adjacent face through an edge interior.
    Crossed { at: SurfacePoint },
    /// Reached a mesh vertex.
    AtVertex { v: usize },
    /// Reached a boundary edge (open meshes only).
    AtBoundary { at: SurfacePoint },
    /// Ran out of allotted length inside the face.
    Exhausted { at: SurfacePoint },
}

/// Incremental geodesic tracer; state lives in the current face's frame.
#[derive(Clone, Debug)]
pub struct Tracer<'m> {
    pub mesh: &'m TriMesh,
    pub face: usize,
    pub pos: Vec2,
    pub dir: Vec2,
    /// Local edge index (0..3) we entered through, excluded from exit tests.
    entry: Option<usize>,
    pub at: SurfacePoint,
    pub traveled: f64,
}

impl<'m> Tracer<'m> {
    pub fn new(mesh: &'m TriMesh, start: &TangentDirection) -> Result<Self, TraceError> {
        let face = start.face;
        if face >= mesh.faces.len() {
            return Err(TraceError::BadStart(format!("face {face} out of range")));
        }
        let pos = mesh
            .pos_in_face(&start.at, face)
            .ok_or_else(|| TraceError::BadStart("start point not on start face".into()))?;
        let n = start.dir.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(TraceError::BadStart("zero or non-finite direction".into()));
        }
        let mut tracer = Tracer {
            mesh,
            face,
            pos,
            dir: start.dir * (1.0 / n),
            entry: None,
            at: mesh.canonicalize(&start.at),
            traveled: 0.0,
        };
        // A start point on an edge of `face` with the direction pointing
        // outward belongs in the twin face; hop across so the first step can
        // make progress.
        let frame = &mesh.frames[face].p;
        for k in 0..3 {
            let (a, b) = (frame[k], frame[(k + 1) % 3]);
            let e = b - a;
            let on_edge = (tracer.pos - a).cross(e).abs() <= mesh.eps.point * e.norm()
                && (tracer.pos - a).dot(e) >= -mesh.eps.point * e.norm()
                && (tracer.pos - b).dot(e) <= mesh.eps.point * e.norm();
            if on_edge && tracer.dir.cross(e) > 1e-14 {
                // Interior is left of the CCW edge; dir × e > 0 means dir
                // points right of it, i.e. outward.
                let he = mesh.he_of(face, k);
                if let Some(tw) = mesh.twin_of(he) {
                    let iso = mesh.transfer(he).expect("twin exists");
                    tracer.face = mesh.face_of(tw);
                    tracer.pos = iso.apply(tracer.pos);
                    tracer.dir = iso.apply_vec(tracer.dir).normalized();
                }
                break;
            }
        }
        Ok(tracer)
    }

    /// Advance one face-crossing (or less, if `remaining` runs out first).
    /// Returns the segment traced and how it ended; on `Crossed` the state
    /// has already been transferred into the next face.
    pub fn step(&mut self, remaining: f64) -> Result<(PathSeg, StepEnd), TraceError> {
        let m = self.mesh;
        let eps = m.eps.point;
        let frame = &m.frames[self.face].p;

        // Exit through the face boundary: smallest positive ray parameter.
        let mut hit: Option<(f64, usize, f64)> = None; // (s, edge k, u)
        for k in 0..3 {
            if self.entry == Some(k) {
                continue;
            }
            let a = frame[k];
            let b = frame[(k + 1) % 3];
            let e = b - a;
            let denom = self.dir.cross(e);
            if denom.abs() < 1e-16 * e.norm() {
                continue;
            }
            let rhs = a - self.pos;
            let s = rhs.cross(e) / denom;
            let u = rhs.cross(self.dir) / denom;
            let u_tol = eps / e.norm();
            if s > eps && (-u_tol..=1.0 + u_tol).contains(&u) && hit.is_none_or(|h| s < h.0) {
                hit = Some((s, k, u.clamp(0.0, 1.0)));
            }
        }

        let Some((s_exit, k, u)) = hit else {
            return Err(TraceError::StalledTrace {
                face: self.face,
                traveled: self.traveled,
            });
        };

        if s_exit >= remaining {
            let end = self.pos + self.dir * remaining;
            let seg = PathSeg {
                face: self.face,
                a: self.pos,
                b: end,
            };
            self.pos = end;
            self.traveled += remaining;
            self.at = m.point_from_face_pos(self.face, end);
            return Ok((seg, StepEnd::Exhausted { at: self.at }));
        }

        let exit = self.pos + self.dir * s_exit;
        let seg = PathSeg {
            face: self.face,
            a: self.pos,
            b: exit,
        };
        let he = m.he_of(self.face, k);

        // Vertex snap.
        let a = frame[k];
        let b = frame[(k + 1) % 3];
        let vertex = if exit.dist(a) <= eps {
            Some(m.origin(he))
        } else if exit.dist(b) <= eps {
            Some(m.head(he))
        } else {
            None
        };
        self.traveled += s_exit;

        if let Some(v) = vertex {
            self.at = SurfacePoint::Vertex(v);
            self.pos = exit;
            self.entry = None;
            return Ok((seg, StepEnd::AtVertex { v }));
        }

        let at = SurfacePoint::Edge { he, t: u };
        self.at = m.canonicalize(&at);
        match m.twin_of(he) {
            None => {
                self.pos = exit;
                Ok((seg, StepEnd::AtBoundary { at: self.at }))
            }
            Some(tw) => {
                let iso = m.transfer(he).expect("twin exists");
                self.face = m.face_of(tw);
                self.pos = iso.apply(exit);
                self.dir = iso.apply_vec(self.dir).normalized();
                self.entry = Some(tw % 3);
                Ok((seg, StepEnd::Crossed { at: self.at }))
            }
        }
    }

    /// Resume from a vertex with a fresh outgoing direction.
    pub fn depart_vertex(&mut self, out: &TangentDirection) -> Result<(), TraceError> {
        let pos = self
            .mesh
            .pos_in_face(&out.at, out.face)
            .ok_or_else(|| TraceError::BadStart("vertex not on continuation face".into()))?;
        self.face = out.face;
        self.pos = pos;
        self.dir = out.dir.normalized();
        self.entry = None;
        Ok(())
    }
}

/// Quasigeodesic continuation through a vertex. `arrival.dir` is the travel
/// direction pointing into the vertex. The result satisfies L ≤ π and R ≤ π;
/// `Bisector` always splits evenly, `LeftmostAdmissible` pins L = π when the
/// total angle allows it.
pub fn continue_through_vertex(
    mesh: &TriMesh,
    v: usize,
    arrival: &TangentDirection,
    policy: VertexPolicy,
) -> Result<(TangentDirection, VertexPassage), MeshError> {
    let fan = mesh.fan(v);
    let phi_back = mesh.fan_angle(&fan, v, arrival.face, -arrival.dir)?;
    let left = match policy {
        VertexPolicy::Bisector => fan.total / 2.0,
        VertexPolicy::LeftmostAdmissible => {
            // L = π needs R = total − π to stay positive; at total = π the
            // only continuation with both sides positive and ≤ π is straight.
            if fan.total > PI + mesh.eps.angle {
                PI
            } else {
                fan.total / 2.0
            }
        }
    };
    let phi_out = (phi_back - left).rem_euclid(fan.total);
    let (face, dir) = mesh.fan_direction(&fan, phi_out);
    Ok((
        TangentDirection::new(SurfacePoint::Vertex(v), face, dir),
        VertexPassage {
            vertex: v,
            left,
            right: fan.total - left,
        },
    ))
}

/// When to end a trace.
#[derive(Clone, Copy, Debug)]
pub enum StopCondition<'a> {
    MaxLength(f64),
    /// Stop at the first vertex encountered (or when length runs out).
    FirstVertex {
        max_length: f64,
    },
    /// Stop when touching any segment of `curve` (or when length runs out).
    HitsCurve {
        curve: &'a SegmentSet,
        max_length: f64,
    },
}

/// Trace a geodesic from `start`, continuing through vertices with `policy`
/// unless the stop condition claims them.
pub fn trace_geodesic(
    mesh: &TriMesh,
    start: &TangentDirection,
    stop: StopCondition,
    policy: VertexPolicy,
) -> Result<GeodesicPath, TraceError> {
    let max_length = match stop {
        StopCondition::MaxLength(l)
        | StopCondition::FirstVertex { max_length: l }
        | StopCondition::HitsCurve { max_length: l, .. } => l,
    };
    if !(max_length > 0.0) {
        return Err(TraceError::BadStart("max_length must be positive".into()));
    }

    let mut tracer = Tracer::new(mesh, start)?;
    let mut points = vec![tracer.at];
    let mut segs: Vec<PathSeg> = Vec::new();
    let mut passages = Vec::new();
    let mut length = 0.0;

    loop {
        let remaining = max_length - length;
        let (seg, end) = tracer.step(remaining)?;

        // Curve-hit test gets first claim on the segment just traced.
        if let StopCondition::HitsCurve { curve, .. } = stop {
            if let Some(c) =
                curve.first_contact(seg.face, seg.a, seg.b, mesh.eps.point, |_, _| false)
            {
                let cut = PathSeg {
                    face: seg.face,
                    a: seg.a,
                    b: c.point,
                };
                length += cut.len();
                let at = mesh.point_from_face_pos(seg.face, c.point);
                points.push(at);
                segs.push(cut);
                return Ok(GeodesicPath {
                    points,
                    segs,
                    length,
                    reason: StopReason::CurveHit {
                        tag: curve.segs[c.seg].tag,
                        u: c.u,
                    },
                    passages,
                });
            }
        }

        length += seg.len();
        segs.push(seg);
        match end {
            StepEnd::Exhausted { at } => {
                points.push(at);
                return Ok(GeodesicPath {
                    points,
                    segs,
                    length,
                    reason: StopReason::LengthExhausted,
                    passages,
                });
            }
            StepEnd::AtBoundary { at } => {
                points.push(at);
                return Ok(GeodesicPath {
                    points,
                    segs,
                    length,
                    reason: StopReason::BoundaryHit,
                    passages,
                });
            }
            StepEnd::AtVertex { v } => {
                points.push(SurfacePoint::Vertex(v));
                if matches!(stop, StopCondition::FirstVertex { .. }) {
                    return Ok(GeodesicPath {
                        points,
                        segs,
                        length,
                        reason: StopReason::VertexHit(v),
                        passages,
                    });
                }
                let arrival =
                    TangentDirection::new(SurfacePoint::Vertex(v), tracer.face, tracer.dir);
                let (out, passage) = continue_through_vertex(mesh, v, &arrival, policy)?;
                passages.push(passage);
                tracer.depart_vertex(&out)?;
            }
            StepEnd::Crossed { at } => {
                points.push(at);
            }
        }
    }
}

/// Planar isometries developing a strip of edge-adjacent faces: `iso[i]`
/// maps `faces[i]`'s frame into the common plane of `faces[0]`.
pub fn develop_strip(mesh: &TriMesh, faces: &[usize]) -> Result<Vec<Iso2>, TraceError> {
    let mut isos = Vec::with_capacity(faces.len());
    isos.push(Iso2::IDENTITY);
    for w in faces.windows(2) {
        let (f, g) = (w[0], w[1]);
        if f == g {
            let last = *isos.last().unwrap();
            isos.push(last);
            continue;
        }
        let mut found = None;
        for k in 0..3 {
            let he = mesh.he_of(f, k);
            if let Some(tw) = mesh.twin_of(he) {
                if mesh.face_of(tw) == g {
                    found = Some(he);
                    break;
                }
            }
        }
        let he = found.ok_or(TraceError::NonAdjacentFaces(f, g))?;
        let step = mesh.transfer(he).expect("interior edge").inverse();
        let prev = *isos.last().unwrap();
        isos.push(prev.compose(&step));
    }
    Ok(isos)
}

/// Develop a traced path into the plane of its first segment's face.
pub fn develop_path(mesh: &TriMesh, path: &GeodesicPath) -> Result<Vec<Vec2>, TraceError> {
    let faces = path.faces();
    let isos = develop_strip(mesh, &faces)?;
    let mut pts = Vec::with_capacity(path.segs.len() + 1);
    if let Some(first) = path.segs.first() {
        pts.push(isos[0].apply(first.a));
    }
    for (i, seg) in path.segs.iter().enumerate() {
        pts.push(isos[i].apply(seg.b));
    }
    Ok(pts)
}

/// Signed turn of the path at interior corner `i` (between segs i-1 and i),
/// measured in the developed plane: 0 for straight, positive for left turns.
pub fn corner_turn(mesh: &TriMesh, path: &GeodesicPath, i: usize) -> Result<f64, TraceError> {
    if i == 0 || i >= path.segs.len() {
        return Err(TraceError::BadStart("corner index out of range".into()));
    }
    let prev = &path.segs[i - 1];
    let next = &path.segs[i];
    let d_next_in_prev = if prev.face == next.face {
        next.dir()
    } else {
        let mut he_found = None;
        for k in 0..3 {
            let he = mesh.he_of(next.face, k);
            if let Some(tw) = mesh.twin_of(he) {
                if mesh.face_of(tw) == prev.face {
                    he_found = Some(he);
                    break;
                }
            }
        }
        let he = he_found.ok_or(TraceError::NonAdjacentFaces(prev.face, next.face))?;
        mesh.transfer(he).expect("twin").apply_vec(next.dir())
    };
    let turn = ccw_angle(prev.dir(), d_next_in_prev);
    Ok(if turn > PI { turn - 2.0 * PI } else { turn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    fn cube_bottom_center_up() -> (crate::mesh::Polyhedron, TangentDirection) {
        let p = fixtures::unit_cube();
        // Bottom input face is polygon 0; start at its centroid heading +y.
        let face = p.source_face.iter().position(|&s| s == 0).unwrap();
        let center3 = crate::geom::Vec3::new(0.5, 0.5, 0.0);
        let frame = &p.mesh.frames[face];
        let pos2 = frame.project_point(center3);
        let sp = p.mesh.point_from_face_pos(face, pos2);
        let dir = frame
            .project_dir(crate::geom::Vec3::new(0.0, 1.0, 0.0))
            .normalized();
        let td = TangentDirection::new(sp, face, dir);
        (p, td)
    }

    #[test]
    fn single_face_strip_is_identity() {
        let p = fixtures::unit_cube();
        let isos = develop_strip(&p.mesh, &[0]).unwrap();
        assert_eq!(isos.len(), 1);
        assert!(isos[0].apply(Vec2::new(0.3, 0.4)).dist(Vec2::new(0.3, 0.4)) < 1e-15);
    }

    #[test]
    fn coplanar_strip_preserves_shared_edges() {
        let p = fixtures::unit_cube();
        let f0 = p.source_face.iter().position(|&s| s == 0).unwrap();
        let f1 = f0 + 1;
        assert_eq!(p.source_face[f1], 0);
        let isos = develop_strip(&p.mesh, &[f0, f1]).unwrap();
        let m = &p.mesh;
        let mut he_shared = None;
        for k in 0..3 {
            let he = m.he_of(f0, k);
            if m.twin_of(he).map(|t| m.face_of(t)) == Some(f1) {
                he_shared = Some(he);
            }
        }
        let he = he_shared.unwrap();
        let k = he % 3;
        let tw = m.twin_of(he).unwrap();
        let tk = tw % 3;
        let a0 = isos[0].apply(m.frames[f0].p[k]);
        let b0 = isos[0].apply(m.frames[f0].p[(k + 1) % 3]);
        let a1 = isos[1].apply(m.frames[f1].p[(tk + 1) % 3]);
        let b1 = isos[1].apply(m.frames[f1].p[tk]);
        assert!(a0.dist(a1) < 1e-12);
        assert!(b0.dist(b1) < 1e-12);
    }

    #[test]
    fn cube_side_band_develops_straight_for_four_units() {
        let p = fixtures::unit_cube();
        let (_, start) = cube_bottom_center_up();
        let path = trace_geodesic(
            &p.mesh,
            &start,
            StopCondition::MaxLength(4.0 - 1e-9),
            VertexPolicy::Bisector,
        )
        .unwrap();
        let pts = develop_path(&p.mesh, &path).unwrap();
        let first = *pts.first().unwrap();
        let last = *pts.last().unwrap();
        assert_relative_eq!(first.dist(last), 4.0 - 1e-9, epsilon = 1e-9);
    }

    #[test]
    fn straight_segment_within_one_face() {
        let p = fixtures::unit_cube();
        let (_, start) = cube_bottom_center_up();
        let path = trace_geodesic(
            &p.mesh,
            &start,
            StopCondition::MaxLength(0.3),
            VertexPolicy::Bisector,
        )
        .unwrap();
        assert_eq!(path.reason, StopReason::LengthExhausted);
        assert_relative_eq!(path.length, 0.3, epsilon = 1e-12);
        assert_eq!(path.segs.len(), 1);
    }

    #[test]
    fn face_diagonal_hits_vertex() {
        // From the bottom-face center along the diagonal: first vertex hit is
        // the far corner at distance √2/2.
        let p = fixtures::unit_cube();
        let face = p.source_face.iter().position(|&s| s == 0).unwrap();
        let frame = &p.mesh.frames[face];
        let center = frame.project_point(crate::geom::Vec3::new(0.5, 0.5, 0.0));
        let sp = p.mesh.point_from_face_pos(face, center);
        let corner3 = crate::geom::Vec3::new(1.0, 1.0, 0.0);
        let corner2 = frame.project_point(corner3);
        let dir = (corner2 - center).normalized();
        let td = TangentDirection::new(sp, face, dir);
        let path = trace_geodesic(
            &p.mesh,
            &td,
            StopCondition::FirstVertex { max_length: 10.0 },
            VertexPolicy::Bisector,
        )
        .unwrap();
        match path.reason {
            StopReason::VertexHit(v) => {
                assert!(p.mesh.verts[v].dist(corner3) < 1e-12);
            }
            ref r => panic!("expected vertex hit, got {r:?}"),
        }
        assert_relative_eq!(path.length, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn girth_band_closes_after_length_four() {
        let p = fixtures::unit_cube();
        let (_, start) = cube_bottom_center_up();
        let path = trace_geodesic(
            &p.mesh,
            &start,
            StopCondition::MaxLength(4.0),
            VertexPolicy::Bisector,
        )
        .unwrap();
        assert_relative_eq!(path.length, 4.0, epsilon = 1e-12);
        let end3 = p.mesh.position(path.end());
        let start3 = p.mesh.position(&start.at);
        assert!(end3.dist(start3) < 1e-9, "girth geodesic closes up");
        assert!(path.passages.is_empty());
    }

    #[test]
    fn retrace_reverses() {
        let p = fixtures::random_hull(7, 14);
        let f = 0;
        let sp = p.mesh.point_from_face_pos(
            f,
            (p.mesh.frames[f].p[0] + p.mesh.frames[f].p[1] + p.mesh.frames[f].p[2]) / 3.0,
        );
        let td = TangentDirection::new(sp, f, Vec2::new(0.6, 0.8));
        let fwd = trace_geodesic(
            &p.mesh,
            &td,
            StopCondition::MaxLength(1.7),
            VertexPolicy::Bisector,
        )
        .unwrap();
        let last = fwd.segs.last().unwrap();
        let back = TangentDirection::new(*fwd.end(), last.face, -last.dir());
        let rev = trace_geodesic(
            &p.mesh,
            &back,
            StopCondition::MaxLength(fwd.length),
            VertexPolicy::Bisector,
        )
        .unwrap();
        assert_eq!(rev.points.len(), fwd.points.len());
        for (a, b) in rev.points.iter().zip(fwd.points.iter().rev()) {
            assert!(
                p.mesh.position(a).dist(p.mesh.position(b)) < 1e-9,
                "retraced corner mismatch"
            );
        }
    }

    #[test]
    fn developed_geodesic_is_straight() {
        let p = fixtures::random_hull(3, 12);
        let f = 0;
        let sp = p.mesh.point_from_face_pos(
            f,
            (p.mesh.frames[f].p[0] + p.mesh.frames[f].p[1] + p.mesh.frames[f].p[2]) / 3.0,
        );
        let td = TangentDirection::new(sp, f, Vec2::new(0.31, 0.95));
        let path = trace_geodesic(
            &p.mesh,
            &td,
            StopCondition::MaxLength(2.0),
            VertexPolicy::Bisector,
        )
        .unwrap();
        let pts = develop_path(&p.mesh, &path).unwrap();
        let a = *pts.first().unwrap();
        let b = *pts.last().unwrap();
        let chord = (b - a).normalized();
        for q in &pts {
            let dev = (*q - a).cross(chord).abs();
            assert!(
                dev < 1e-9 * path.length.max(1.0),
                "interior deviation {dev}"
            );
        }
    }

    #[test]
    fn cube_vertex_continuations() {
        let p = fixtures::unit_cube();
        let m = &p.mesh;
        // Arrive at vertex 0 along the cube edge from vertex 1.
        let he10 = m.find_he(1, 0).unwrap();
        let f = m.face_of(he10);
        let arrival = TangentDirection::new(SurfacePoint::Vertex(0), f, m.edge_dir(he10));
        let (_, pass) = continue_through_vertex(m, 0, &arrival, VertexPolicy::Bisector).unwrap();
        assert_relative_eq!(pass.left, 3.0 * PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(pass.right, 3.0 * PI / 4.0, epsilon = 1e-12);

        // LeftmostAdmissible pins L = π; verified against an independent
        // angle measurement around the vertex.
        let (out, pass) =
            continue_through_vertex(m, 0, &arrival, VertexPolicy::LeftmostAdmissible).unwrap();
        assert_relative_eq!(pass.left, PI, epsilon = 1e-12);
        assert_relative_eq!(pass.right, PI / 2.0, epsilon = 1e-12);
        let (l, r) = m
            .angle_sides(&SurfacePoint::Vertex(0), &arrival, &out)
            .unwrap();
        assert_relative_eq!(l, PI, epsilon = 1e-12);
        assert_relative_eq!(r, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn tetrahedron_vertex_unique_continuation() {
        let p = fixtures::regular_tetrahedron();
        let m = &p.mesh;
        let he = m.find_he(1, 0).unwrap();
        let arrival = TangentDirection::new(SurfacePoint::Vertex(0), m.face_of(he), m.edge_dir(he));
        for policy in [VertexPolicy::Bisector, VertexPolicy::LeftmostAdmissible] {
            let (_, pass) = continue_through_vertex(m, 0, &arrival, policy).unwrap();
            assert_relative_eq!(pass.left, PI / 2.0, epsilon = 1e-12);
            assert_relative_eq!(pass.right, PI / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn angle_sides_at_cube_vertex_diagonal_split() {
        // Enter and leave a cube vertex along directions that split the 3π/2
        // total angle evenly: L = R = 3π/4, confirmed by the independent fan
        // measurement in angle_sides.
        let p = fixtures::unit_cube();
        let m = &p.mesh;
        let mut tri = None;
        for (fi, f) in m.faces.iter().enumerate() {
            if p.source_face[fi] == 0 && f.contains(&0) && f.contains(&2) {
                tri = Some(fi);
            }
        }
        let tri = tri.unwrap();
        let k0 = m.corner_of(tri, 0).unwrap();
        let k2 = m.corner_of(tri, 2).unwrap();
        let dir_in = (m.frames[tri].p[k0] - m.frames[tri].p[k2]).normalized();
        let arrival = TangentDirection::new(SurfacePoint::Vertex(0), tri, dir_in);
        let (out, _) = continue_through_vertex(m, 0, &arrival, VertexPolicy::Bisector).unwrap();
        let (l, r) = m
            .angle_sides(&SurfacePoint::Vertex(0), &arrival, &out)
            .unwrap();
        assert_relative_eq!(l + r, 3.0 * PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(l, 3.0 * PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(r, 3.0 * PI / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_hits_given_curve() {
        let p = fixtures::unit_cube();
        let (_, up) = cube_bottom_center_up();
        // Head toward the front face (−y) instead.
        let start = TangentDirection::new(up.at, up.face, -up.dir);
        // Lay an obstacle across the front face at height 0.5 and trace into it.
        let front = p
            .source_face
            .iter()
            .position(|&s| s == 2)
            .expect("front input face");
        let frame = &p.mesh.frames[front];
        let a = frame.project_point(crate::geom::Vec3::new(0.2, 0.0, 0.5));
        let b = frame.project_point(crate::geom::Vec3::new(0.8, 0.0, 0.5));
        let mut set = SegmentSet::default();
        set.push(CurveSeg {
            face: front,
            a,
            b,
            tag: 7,
        });
        // Also the coplanar triangle sharing the quad: add same obstacle there
        // in case the trace passes through the other half of the quad.
        let front2 = p
            .source_face
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 2)
            .map(|(i, _)| i)
            .nth(1)
            .unwrap();
        let frame2 = &p.mesh.frames[front2];
        let a2 = frame2.project_point(crate::geom::Vec3::new(0.2, 0.0, 0.5));
        let b2 = frame2.project_point(crate::geom::Vec3::new(0.8, 0.0, 0.5));
        set.push(CurveSeg {
            face: front2,
            a: a2,
            b: b2,
            tag: 8,
        });

        let path = trace_geodesic(
            &p.mesh,
            &start,
            StopCondition::HitsCurve {
                curve: &set,
                max_length: 4.0,
            },
            VertexPolicy::Bisector,
        )
        .unwrap();
        match path.reason {
            StopReason::CurveHit { .. } => {}
            ref r => panic!("expected curve hit, got {r:?}"),
        }
        // Hit is at arc length 0.5 (to the bottom edge) + 0.5 (up the face).
        assert_relative_eq!(path.length, 1.0, epsilon = 1e-9);
        let hit3 = p.mesh.position(path.end());
        assert!(hit3.dist(crate::geom::Vec3::new(0.5, 0.0, 0.5)) < 1e-9);
    }
}
