//! Triangle meshes with half-edge connectivity, intrinsic per-face frames,
//! and the validated convex `Polyhedron` the rest of the crate consumes.
//!
//! Half-edge layout is implicit: face `f` owns half-edges `3f`, `3f+1`,
//! `3f+2`; half-edge `3f+k` starts at `faces[f][k]` and ends at
//! `faces[f][(k+1)%3]`. `twin` is `None` on boundary half-edges (cut-open
//! halves); a validated `Polyhedron` is closed and has no boundary.

use crate::geom::{angle_between, ccw_angle, Iso2, Vec2, Vec3, PI, TAU};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not a closed orientable 2-manifold: {0}")]
    NotManifold(String),
    #[error("not convex: vertex {vertex} lies {distance:.6e} outside the supporting plane of face {face}")]
    NotConvex {
        vertex: usize,
        face: usize,
        distance: f64,
    },
    #[error("degenerate face {face} (area {area:.3e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("mismatched locus: {0}")]
    MismatchedLocus(String),
}

/// Scale-relative tolerance knobs. Absolute values are resolved against the
/// bounding-box diagonal so fixtures stay unit-free.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Convexity test: signed plane distance, relative to the diagonal.
    pub planar_rel: f64,
    /// Locus snapping distance, relative to the diagonal.
    pub point_rel: f64,
    /// Angle comparisons, radians (absolute).
    pub angle: f64,
    /// Face-area floor, relative to the squared diagonal.
    pub area_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            planar_rel: 1e-9,
            point_rel: 1e-12,
            angle: 1e-9,
            area_rel: 1e-12,
        }
    }
}

/// Tolerances resolved to absolute units for a given mesh scale.
#[derive(Clone, Copy, Debug)]
pub struct Eps {
    pub diag: f64,
    pub planar: f64,
    pub point: f64,
    pub angle: f64,
    pub area: f64,
}

impl Tolerances {
    pub fn resolve(&self, diag: f64) -> Eps {
        Eps {
            diag,
            planar: self.planar_rel * diag,
            point: self.point_rel * diag,
            angle: self.angle,
            area: self.area_rel * diag * diag,
        }
    }
}

impl Eps {
    /// Area floor for internal re-tessellations. Cutting along loops and
    /// shortest paths legitimately produces very thin pieces (e.g. the wedge
    /// between two cuts meeting at the loop point), so only true
    /// floating-point degeneracy is rejected there — unlike input
    /// validation, which keeps the stricter `area`.
    pub fn retess(&self) -> Eps {
        Eps {
            area: 3e-15 * self.diag * self.diag,
            ..*self
        }
    }
}

/// Intrinsic 2D frame of a face: corner `k` of the face sits at `p[k]`, with
/// `p[0]` at the origin and `p[1]` on the positive x-axis; `e1`,`e2` are the
/// 3D basis vectors realizing the frame.
#[derive(Clone, Debug)]
pub struct FaceFrame {
    pub p: [Vec2; 3],
    pub e1: Vec3,
    pub e2: Vec3,
    pub origin: Vec3,
}

impl FaceFrame {
    pub fn project_dir(&self, d: Vec3) -> Vec2 {
        Vec2::new(d.dot(self.e1), d.dot(self.e2))
    }

    pub fn project_point(&self, p: Vec3) -> Vec2 {
        self.project_dir(p - self.origin)
    }
}

/// Where a point lives on the surface. Canonical form prefers the lowest-
/// dimensional locus within snapping distance; edge loci use the smaller of
/// the two twin half-edge indices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SurfacePoint {
    Vertex(usize),
    Edge { he: usize, t: f64 },
    Face { face: usize, bary: [f64; 3] },
}

impl SurfacePoint {
    pub fn is_vertex(&self) -> bool {
        matches!(self, SurfacePoint::Vertex(_))
    }
}

/// A unit direction in the intrinsic frame of `face`, anchored at a surface
/// point incident to that face.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TangentDirection {
    pub at: SurfacePoint,
    pub face: usize,
    pub dir: Vec2,
}

impl TangentDirection {
    pub fn new(at: SurfacePoint, face: usize, dir: Vec2) -> Self {
        TangentDirection {
            at,
            face,
            dir: dir.normalized(),
        }
    }

    pub fn reversed(&self) -> Self {
        TangentDirection {
            at: self.at,
            face: self.face,
            dir: -self.dir,
        }
    }
}

/// The counterclockwise fan of faces around a vertex, with cumulative corner
/// angles. For boundary vertices the fan is the open chain of sectors between
/// the two boundary edges.
#[derive(Clone, Debug)]
pub struct Fan {
    /// Outgoing half-edges in CCW order; `hes[i]` starts the i-th sector.
    pub hes: Vec<usize>,
    /// Cumulative angle at the start of each sector; `cum[len] = total`.
    pub cum: Vec<f64>,
    pub total: f64,
    pub boundary: bool,
}

impl Fan {
    /// Sector index whose face is `face`.
    pub fn sector_of_face(&self, mesh: &TriMesh, face: usize) -> Option<usize> {
        self.hes.iter().position(|&h| mesh.face_of(h) == face)
    }
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    pub verts: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    pub twin: Vec<Option<usize>>,
    /// One outgoing half-edge per vertex. For boundary vertices this is the
    /// clockwise-most outgoing half-edge (the boundary half-edge itself), so
    /// fans start at the boundary.
    pub vert_he: Vec<usize>,
    pub frames: Vec<FaceFrame>,
    pub eps: Eps,
}

impl TriMesh {
    pub fn build(verts: Vec<Vec3>, faces: Vec<[usize; 3]>, eps: Eps) -> Result<TriMesh, MeshError> {
        let nv = verts.len();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= nv {
                    return Err(MeshError::IndexOutOfRange(format!(
                        "face {fi} references vertex {v} of {nv}"
                    )));
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace {
                    face: fi,
                    area: 0.0,
                });
            }
        }

        let mut frames = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let (a, b, c) = (verts[f[0]], verts[f[1]], verts[f[2]]);
            let area = (b - a).cross(c - a).norm() * 0.5;
            if !(area > eps.area) {
                return Err(MeshError::DegenerateFace { face: fi, area });
            }
            let e1 = (b - a).normalized();
            let n = (b - a).cross(c - a).normalized();
            let e2 = n.cross(e1);
            let frame = FaceFrame {
                p: [
                    Vec2::ZERO,
                    Vec2::new((b - a).norm(), 0.0),
                    Vec2::new((c - a).dot(e1), (c - a).dot(e2)),
                ],
                e1,
                e2,
                origin: a,
            };
            debug_assert!(frame.p[2].y > 0.0);
            frames.push(frame);
        }

        // Twins from directed edges; a repeated directed edge means
        // inconsistent winding or a non-manifold edge.
        let mut dir_edges = std::collections::HashMap::with_capacity(faces.len() * 3);
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let he = 3 * fi + k;
                let key = (f[k], f[(k + 1) % 3]);
                if dir_edges.insert(key, he).is_some() {
                    return Err(MeshError::NotManifold(format!(
                        "directed edge {}->{} appears twice (inconsistent winding or non-manifold)",
                        key.0, key.1
                    )));
                }
            }
        }
        let mut twin = vec![None; faces.len() * 3];
        for (&(a, b), &he) in dir_edges.iter() {
            if let Some(&other) = dir_edges.get(&(b, a)) {
                twin[he] = Some(other);
            }
        }

        let mut vert_he = vec![usize::MAX; nv];
        for he in 0..faces.len() * 3 {
            let v = faces[he / 3][he % 3];
            if vert_he[v] == usize::MAX || twin[he].is_none() {
                // Prefer a boundary outgoing half-edge so fans start there.
                if vert_he[v] == usize::MAX || twin[vert_he[v]].is_some() {
                    vert_he[v] = he;
                }
            }
        }
        for (v, &h) in vert_he.iter().enumerate() {
            if h == usize::MAX && !verts.is_empty() {
                // Isolated vertices only appear in cut-open intermediates;
                // reject them outright here.
                return Err(MeshError::NotManifold(format!("isolated vertex {v}")));
            }
        }

        Ok(TriMesh {
            verts,
            faces,
            twin,
            vert_he,
            frames,
            eps,
        })
    }

    // --- half-edge primitives ---

    pub fn n_halfedges(&self) -> usize {
        self.faces.len() * 3
    }

    pub fn face_of(&self, he: usize) -> usize {
        he / 3
    }

    pub fn next(&self, he: usize) -> usize {
        3 * (he / 3) + (he + 1) % 3
    }

    pub fn prev(&self, he: usize) -> usize {
        3 * (he / 3) + (he + 2) % 3
    }

    pub fn origin(&self, he: usize) -> usize {
        self.faces[he / 3][he % 3]
    }

    pub fn head(&self, he: usize) -> usize {
        self.faces[he / 3][(he + 1) % 3]
    }

    pub fn twin_of(&self, he: usize) -> Option<usize> {
        self.twin[he]
    }

    /// The half-edge of face `f` starting at its corner `k`.
    pub fn he_of(&self, f: usize, k: usize) -> usize {
        3 * f + k
    }

    /// Corner index of vertex `v` in face `f`.
    pub fn corner_of(&self, f: usize, v: usize) -> Option<usize> {
        self.faces[f].iter().position(|&w| w == v)
    }

    /// Half-edge from `a` to `b`, if the directed edge exists.
    pub fn find_he(&self, a: usize, b: usize) -> Option<usize> {
        let mut he = self.vert_he[a];
        loop {
            if self.head(he) == b {
                return Some(he);
            }
            match self.rot_ccw(he) {
                Some(next) if next != self.vert_he[a] => he = next,
                Some(_) => return None,
                None => return None,
            }
        }
    }

    /// Rotate an outgoing half-edge counterclockwise around its origin.
    pub fn rot_ccw(&self, he: usize) -> Option<usize> {
        self.twin[self.prev(he)]
    }

    /// Rotate an outgoing half-edge clockwise around its origin.
    pub fn rot_cw(&self, he: usize) -> Option<usize> {
        self.twin[he].map(|t| self.next(t))
    }

    pub fn canonical_edge(&self, he: usize) -> usize {
        match self.twin[he] {
            Some(t) => he.min(t),
            None => he,
        }
    }

    // --- per-face geometry ---

    pub fn corner_angle(&self, f: usize, k: usize) -> f64 {
        let p = &self.frames[f].p;
        let a = p[(k + 1) % 3] - p[k];
        let b = p[(k + 2) % 3] - p[k];
        angle_between(a, b)
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let p = &self.frames[f].p;
        0.5 * (p[1] - p[0]).cross(p[2] - p[0])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Unit direction of half-edge `he` in its face's frame.
    pub fn edge_dir(&self, he: usize) -> Vec2 {
        let f = self.face_of(he);
        let k = he % 3;
        (self.frames[f].p[(k + 1) % 3] - self.frames[f].p[k]).normalized()
    }

    pub fn edge_len(&self, he: usize) -> f64 {
        let f = self.face_of(he);
        let k = he % 3;
        (self.frames[f].p[(k + 1) % 3] - self.frames[f].p[k]).norm()
    }

    /// Transfer isometry taking coordinates in `face_of(he)`'s frame to
    /// coordinates in the twin face's frame. `None` on boundary.
    pub fn transfer(&self, he: usize) -> Option<Iso2> {
        let t = self.twin[he]?;
        let f = self.face_of(he);
        let g = self.face_of(t);
        let (k, j) = (he % 3, t % 3);
        let a_f = self.frames[f].p[k];
        let b_f = self.frames[f].p[(k + 1) % 3];
        // twin runs opposite: origin(t) = head(he)
        let b_g = self.frames[g].p[j];
        let a_g = self.frames[g].p[(j + 1) % 3];
        Some(Iso2::mapping_segment(a_f, b_f, a_g, b_g))
    }

    // --- fans ---

    pub fn fan(&self, v: usize) -> Fan {
        let start = {
            // Walk clockwise to the boundary if there is one.
            let mut h = self.vert_he[v];
            let first = h;
            loop {
                match self.rot_cw(h) {
                    Some(p) if p != first => h = p,
                    Some(_) => break first,
                    None => break h,
                }
            }
        };
        let mut hes = Vec::new();
        let mut cum = vec![0.0];
        let mut h = start;
        let mut boundary = false;
        loop {
            hes.push(h);
            let f = self.face_of(h);
            let k = self.corner_of(f, v).expect("outgoing half-edge origin");
            cum.push(cum.last().unwrap() + self.corner_angle(f, k));
            match self.rot_ccw(h) {
                Some(nx) if nx != start => h = nx,
                Some(_) => break,
                None => {
                    boundary = true;
                    break;
                }
            }
        }
        let total = *cum.last().unwrap();
        Fan {
            hes,
            cum,
            total,
            boundary,
        }
    }

    /// Angular position of direction `dir` (given in `face`'s frame) within
    /// the fan around `v`, measured counterclockwise from the fan start.
    pub fn fan_angle(&self, fan: &Fan, v: usize, face: usize, dir: Vec2) -> Result<f64, MeshError> {
        let sector = fan.sector_of_face(self, face).ok_or_else(|| {
            MeshError::MismatchedLocus(format!("face {face} is not incident to vertex {v}"))
        })?;
        let he = fan.hes[sector];
        let e0 = self.edge_dir(he);
        let mut local = ccw_angle(e0, dir);
        let width = fan.cum[sector + 1] - fan.cum[sector];
        // Directions numerically a hair outside the sector wedge get clamped.
        if local > width {
            if local > PI + width / 2.0 {
                local = 0.0;
            } else {
                local = width;
            }
        }
        Ok(fan.cum[sector] + local)
    }

    /// Inverse of `fan_angle`: the (face, direction) at angular position
    /// `phi ∈ [0, total]` within the fan.
    pub fn fan_direction(&self, fan: &Fan, phi: f64) -> (usize, Vec2) {
        let phi = phi.clamp(0.0, fan.total);
        let mut sector = fan.hes.len() - 1;
        for i in 0..fan.hes.len() {
            if phi <= fan.cum[i + 1] {
                sector = i;
                break;
            }
        }
        let he = fan.hes[sector];
        let e0 = self.edge_dir(he);
        let local = phi - fan.cum[sector];
        let rot = Iso2::rotation(local);
        (self.face_of(he), rot.apply_vec(e0))
    }

    /// Total surface angle at a point: `2π` off-vertex, the fan total at a
    /// vertex (`2π − ω` on a closed convex mesh).
    pub fn total_angle(&self, sp: &SurfacePoint) -> f64 {
        match sp {
            SurfacePoint::Vertex(v) => self.fan(*v).total,
            _ => TAU,
        }
    }

    // --- surface points ---

    pub fn position(&self, sp: &SurfacePoint) -> Vec3 {
        match *sp {
            SurfacePoint::Vertex(v) => self.verts[v],
            SurfacePoint::Edge { he, t } => {
                Vec3::lerp(self.verts[self.origin(he)], self.verts[self.head(he)], t)
            }
            SurfacePoint::Face { face, bary } => {
                let f = self.faces[face];
                self.verts[f[0]] * bary[0] + self.verts[f[1]] * bary[1] + self.verts[f[2]] * bary[2]
            }
        }
    }

    /// 2D coordinates of `sp` in the frame of `face`, if `sp` lies on it.
    pub fn pos_in_face(&self, sp: &SurfacePoint, face: usize) -> Option<Vec2> {
        let p = &self.frames[face].p;
        match *sp {
            SurfacePoint::Vertex(v) => self.corner_of(face, v).map(|k| p[k]),
            SurfacePoint::Edge { he, t } => {
                if self.face_of(he) == face {
                    let k = he % 3;
                    Some(Vec2::lerp(p[k], p[(k + 1) % 3], t))
                } else if self.twin[he].map(|tw| self.face_of(tw)) == Some(face) {
                    let tw = self.twin[he].unwrap();
                    let k = tw % 3;
                    Some(Vec2::lerp(p[k], p[(k + 1) % 3], 1.0 - t))
                } else {
                    None
                }
            }
            SurfacePoint::Face { face: f, bary } => {
                if f == face {
                    Some(p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2])
                } else {
                    None
                }
            }
        }
    }

    /// Faces incident to a surface point.
    pub fn faces_of(&self, sp: &SurfacePoint) -> Vec<usize> {
        match *sp {
            SurfacePoint::Vertex(v) => self.fan(v).hes.iter().map(|&h| self.face_of(h)).collect(),
            SurfacePoint::Edge { he, t: _ } => {
                let mut fs = vec![self.face_of(he)];
                if let Some(t) = self.twin[he] {
                    fs.push(self.face_of(t));
                }
                fs
            }
            SurfacePoint::Face { face, .. } => vec![face],
        }
    }

    /// Snap to the canonical lowest-dimensional representation: vertices win
    /// over edges win over face interiors, with the mesh-scale point
    /// tolerance. Iterates to a fixed point so the result is idempotent.
    pub fn canonicalize(&self, sp: &SurfacePoint) -> SurfacePoint {
        let mut cur = *sp;
        for _ in 0..4 {
            let next = self.canonicalize_once(&cur);
            if next == cur {
                break;
            }
            cur = next;
        }
        cur
    }

    fn canonicalize_once(&self, sp: &SurfacePoint) -> SurfacePoint {
        let eps = self.eps.point;
        match *sp {
            SurfacePoint::Vertex(v) => SurfacePoint::Vertex(v),
            SurfacePoint::Edge { he, t } => {
                let len = self.edge_len(he);
                if t * len <= eps {
                    return SurfacePoint::Vertex(self.origin(he));
                }
                if (1.0 - t) * len <= eps {
                    return SurfacePoint::Vertex(self.head(he));
                }
                let canon = self.canonical_edge(he);
                if canon == he {
                    SurfacePoint::Edge { he, t }
                } else {
                    SurfacePoint::Edge {
                        he: canon,
                        t: 1.0 - t,
                    }
                }
            }
            SurfacePoint::Face { face, bary } => {
                let p = &self.frames[face].p;
                let q = p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2];
                for (k, corner) in p.iter().enumerate() {
                    if q.dist(*corner) <= eps {
                        return SurfacePoint::Vertex(self.faces[face][k]);
                    }
                }
                for k in 0..3 {
                    let (a, b) = (p[k], p[(k + 1) % 3]);
                    let e = b - a;
                    let t = ((q - a).dot(e) / e.norm2()).clamp(0.0, 1.0);
                    if q.dist(Vec2::lerp(a, b, t)) <= eps {
                        return SurfacePoint::Edge {
                            he: self.he_of(face, k),
                            t,
                        };
                    }
                }
                SurfacePoint::Face { face, bary }
            }
        }
    }

    /// Surface point for a 2D position inside `face` (canonicalized).
    pub fn point_from_face_pos(&self, face: usize, q: Vec2) -> SurfacePoint {
        let p = &self.frames[face].p;
        let det = (p[1] - p[0]).cross(p[2] - p[0]);
        let b1 = (q - p[0]).cross(p[2] - p[0]) / det;
        let b2 = (p[1] - p[0]).cross(q - p[0]) / det;
        let bary = [1.0 - b1 - b2, b1, b2];
        self.canonicalize(&SurfacePoint::Face { face, bary })
    }

    /// Surface angle split by a directed curve passing through `q`:
    /// `incoming` is the travel direction arriving at `q`, `outgoing` the
    /// travel direction leaving it. Returns `(L, R)`, the total angles
    /// incident to the left and right of the curve.
    pub fn angle_sides(
        &self,
        q: &SurfacePoint,
        incoming: &TangentDirection,
        outgoing: &TangentDirection,
    ) -> Result<(f64, f64), MeshError> {
        let same_point = |a: &SurfacePoint| -> bool {
            self.position(a).dist(self.position(q)) <= self.eps.point.max(1e-30)
        };
        if !same_point(&incoming.at) || !same_point(&outgoing.at) {
            return Err(MeshError::MismatchedLocus(
                "incoming/outgoing directions are not anchored at the query point".into(),
            ));
        }
        match *q {
            SurfacePoint::Vertex(v) => {
                let fan = self.fan(v);
                let phi_back = self.fan_angle(&fan, v, incoming.face, -incoming.dir)?;
                let phi_out = self.fan_angle(&fan, v, outgoing.face, outgoing.dir)?;
                let left = (phi_back - phi_out).rem_euclid(fan.total);
                Ok((left, fan.total - left))
            }
            SurfacePoint::Edge { he, .. } => {
                let f_in = incoming.face;
                let out_dir = if outgoing.face == f_in {
                    outgoing.dir
                } else {
                    // Bring the outgoing direction across the edge into the
                    // incoming face's frame.
                    let (a, b) = (self.face_of(he), self.twin[he].map(|t| self.face_of(t)));
                    let hu = if Some(outgoing.face) == b {
                        self.twin[he].unwrap()
                    } else {
                        he
                    };
                    if self.face_of(hu) != outgoing.face || (a != f_in && b != Some(f_in)) {
                        return Err(MeshError::MismatchedLocus(
                            "directions not incident to the edge locus".into(),
                        ));
                    }
                    let iso = self.transfer(hu).ok_or_else(|| {
                        MeshError::MismatchedLocus("edge locus on boundary".into())
                    })?;
                    iso.apply_vec(outgoing.dir)
                };
                let left = ccw_angle(out_dir, -incoming.dir);
                Ok((left, TAU - left))
            }
            SurfacePoint::Face { face, .. } => {
                if incoming.face != face || outgoing.face != face {
                    return Err(MeshError::MismatchedLocus(
                        "face locus requires both directions in that face".into(),
                    ));
                }
                let left = ccw_angle(outgoing.dir, -incoming.dir);
                Ok((left, TAU - left))
            }
        }
    }

    /// Number of boundary half-edges (0 for closed meshes).
    pub fn boundary_count(&self) -> usize {
        self.twin.iter().filter(|t| t.is_none()).count()
    }

    pub fn bbox_diag(verts: &[Vec3]) -> f64 {
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in verts {
            lo = Vec3::new(lo.x.min(v.x), lo.y.min(v.y), lo.z.min(v.z));
            hi = Vec3::new(hi.x.max(v.x), hi.y.max(v.y), hi.z.max(v.z));
        }
        (hi - lo).norm()
    }
}

/// A validated closed convex triangulated surface.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    pub mesh: TriMesh,
    /// Input polygon id for each triangle (fan triangulation keeps it).
    pub source_face: Vec<usize>,
    /// Input polygons as given (after 0-basing), for original-face queries.
    pub input_polys: Vec<Vec<usize>>,
    /// Per half-edge: true when the edge is an artificial fan diagonal or has
    /// dihedral angle π within tolerance, i.e. invisible to the geometry.
    pub flat_he: Vec<bool>,
    pub curvature: Vec<f64>,
}

impl Polyhedron {
    pub fn from_polygons(
        verts: Vec<Vec3>,
        polys: Vec<Vec<usize>>,
        tol: Tolerances,
    ) -> Result<Polyhedron, MeshError> {
        if verts.len() < 4 {
            return Err(MeshError::Parse(format!("only {} vertices", verts.len())));
        }
        let diag = TriMesh::bbox_diag(&verts);
        if !(diag > 0.0) {
            return Err(MeshError::Parse("degenerate vertex set".into()));
        }
        let eps = tol.resolve(diag);

        // Fan-triangulate every polygon from its lowest-index vertex.
        let mut faces = Vec::new();
        let mut source_face = Vec::new();
        for (pi, poly) in polys.iter().enumerate() {
            if poly.len() < 3 {
                return Err(MeshError::Parse(format!(
                    "face {pi} has {} vertices",
                    poly.len()
                )));
            }
            let start = poly
                .iter()
                .enumerate()
                .min_by_key(|(_, &v)| v)
                .map(|(i, _)| i)
                .unwrap();
            let rot: Vec<usize> = (0..poly.len())
                .map(|i| poly[(start + i) % poly.len()])
                .collect();
            for i in 1..rot.len() - 1 {
                faces.push([rot[0], rot[i], rot[i + 1]]);
                source_face.push(pi);
            }
        }

        let mesh = TriMesh::build(verts, faces, eps)?;

        if mesh.twin.iter().any(|t| t.is_none()) {
            return Err(MeshError::NotManifold("surface has boundary edges".into()));
        }
        let v = mesh.verts.len() as i64;
        let f = mesh.faces.len() as i64;
        let e = 3 * f / 2;
        if v - e + f != 2 {
            return Err(MeshError::NotManifold(format!(
                "Euler characteristic {} (expected 2)",
                v - e + f
            )));
        }

        // Convexity: every vertex within tolerance of the non-positive side
        // of every face's supporting plane. Report the worst violation.
        let mut worst: Option<(usize, usize, f64)> = None;
        for fi in 0..mesh.faces.len() {
            let [a, b, c] = mesh.faces[fi];
            let n = (mesh.verts[b] - mesh.verts[a])
                .cross(mesh.verts[c] - mesh.verts[a])
                .normalized();
            for (vi, p) in mesh.verts.iter().enumerate() {
                let d = (*p - mesh.verts[a]).dot(n);
                if d > worst.map_or(0.0, |w| w.2) {
                    worst = Some((vi, fi, d));
                }
            }
        }
        if let Some((vertex, face, distance)) = worst {
            if distance > eps.planar {
                return Err(MeshError::NotConvex {
                    vertex,
                    face,
                    distance,
                });
            }
        }

        let mut curvature = vec![TAU; mesh.verts.len()];
        for fi in 0..mesh.faces.len() {
            for k in 0..3 {
                curvature[mesh.faces[fi][k]] -= mesh.corner_angle(fi, k);
            }
        }
        let total: f64 = curvature.iter().sum();
        if (total - 2.0 * TAU).abs() > 1e-9 {
            return Err(MeshError::NotManifold(format!(
                "total curvature {total:.12} differs from 4π"
            )));
        }

        // Flat edges: fan diagonals within an input polygon, plus any edge
        // whose dihedral angle is π within tolerance.
        let mut flat_he = vec![false; mesh.n_halfedges()];
        for he in 0..mesh.n_halfedges() {
            let tw = mesh.twin[he].unwrap();
            if source_face[mesh.face_of(he)] == source_face[mesh.face_of(tw)] {
                flat_he[he] = true;
                continue;
            }
            let f = mesh.face_of(he);
            let g = mesh.face_of(tw);
            let nf = Polyhedron::face_normal(&mesh, f);
            let ng = Polyhedron::face_normal(&mesh, g);
            if nf.cross(ng).norm() <= eps.angle && nf.dot(ng) > 0.0 {
                flat_he[he] = true;
            }
        }

        Ok(Polyhedron {
            mesh,
            source_face,
            input_polys: polys,
            flat_he,
            curvature,
        })
    }

    fn face_normal(mesh: &TriMesh, f: usize) -> Vec3 {
        let [a, b, c] = mesh.faces[f];
        (mesh.verts[b] - mesh.verts[a])
            .cross(mesh.verts[c] - mesh.verts[a])
            .normalized()
    }

    pub fn n(&self) -> usize {
        self.mesh.verts.len()
    }

    /// Discrete curvature `ω(v) = 2π − Σ incident face angles`.
    pub fn vertex_curvature(&self, v: usize) -> Result<f64, MeshError> {
        self.curvature
            .get(v)
            .copied()
            .ok_or_else(|| MeshError::IndexOutOfRange(format!("vertex {v} of {}", self.n())))
    }

    pub fn total_curvature(&self) -> f64 {
        self.curvature.iter().sum()
    }

    /// Locate a 3D point lying on the given input polygon: the triangle
    /// containing it and the canonical surface point.
    pub fn locate(&self, source_face: usize, p3: Vec3) -> Option<(usize, SurfacePoint)> {
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for (fi, _) in self.mesh.faces.iter().enumerate() {
            if self.source_face[fi] != source_face {
                continue;
            }
            let frame = &self.mesh.frames[fi];
            let q = frame.project_point(p3);
            let p = &frame.p;
            let det = (p[1] - p[0]).cross(p[2] - p[0]);
            let b1 = (q - p[0]).cross(p[2] - p[0]) / det;
            let b2 = (p[1] - p[0]).cross(q - p[0]) / det;
            let bary = [1.0 - b1 - b2, b1, b2];
            let worst = bary.iter().fold(f64::INFINITY, |m, &b| m.min(b));
            if best.is_none_or(|(w, _, _)| worst > w) {
                best = Some((worst, fi, bary));
            }
        }
        let (worst, fi, bary) = best?;
        if worst < -1e-9 {
            return None;
        }
        let bary = [bary[0].max(0.0), bary[1].max(0.0), bary[2].max(0.0)];
        let s = bary[0] + bary[1] + bary[2];
        let bary = [bary[0] / s, bary[1] / s, bary[2] / s];
        Some((
            fi,
            self.mesh
                .canonicalize(&SurfacePoint::Face { face: fi, bary }),
        ))
    }

    /// The input polygons containing vertex `v`.
    pub fn source_faces_of_vertex(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .input_polys
            .iter()
            .enumerate()
            .filter(|(_, poly)| poly.contains(&v))
            .map(|(i, _)| i)
            .collect();
        out.dedup();
        out
    }

    pub fn eps(&self) -> &Eps {
        &self.mesh.eps
    }
}

/// Total surface angle on each side of a directed curve through `q`
/// (`L + R = 2π − ω(q)` at a vertex, `2π` elsewhere).
pub fn total_angle_sides(
    p: &Polyhedron,
    q: &SurfacePoint,
    incoming: &TangentDirection,
    outgoing: &TangentDirection,
) -> Result<(f64, f64), MeshError> {
    p.mesh.angle_sides(q, incoming, outgoing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    #[test]
    fn cube_topology_and_curvature() {
        let p = fixtures::unit_cube();
        assert_eq!(p.n(), 8);
        assert_eq!(p.mesh.faces.len(), 12);
        // ω = π/2 at every corner, Σω = 4π.
        for v in 0..8 {
            assert_relative_eq!(p.vertex_curvature(v).unwrap(), PI / 2.0, epsilon = 1e-12);
        }
        assert_relative_eq!(p.total_curvature(), 2.0 * TAU, epsilon = 1e-9);
        assert!(p.vertex_curvature(8).is_err());
    }

    #[test]
    fn tetrahedron_topology() {
        let p = fixtures::regular_tetrahedron();
        assert_eq!(p.n(), 4);
        assert_eq!(p.mesh.faces.len(), 4);
        // 6 edges
        assert_eq!(p.mesh.n_halfedges() / 2, 6);
        for v in 0..4 {
            assert_relative_eq!(p.vertex_curvature(v).unwrap(), PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn halfedge_round_trips() {
        let p = fixtures::unit_cube();
        let m = &p.mesh;
        for he in 0..m.n_halfedges() {
            assert_eq!(m.twin_of(m.twin_of(he).unwrap()).unwrap(), he);
            assert_eq!(m.next(m.next(m.next(he))), he);
            let t = m.twin_of(he).unwrap();
            assert_eq!(m.origin(he), m.head(t));
            assert_eq!(m.head(he), m.origin(t));
        }
    }

    #[test]
    fn pushed_in_cube_is_rejected() {
        // Push vertex 6 inward by 0.1 along the cube diagonal, then compute
        // the worst supporting-plane violation independently (plain dot
        // products over the fan triangulation) before asking the library.
        let (verts, polys) = fixtures::unit_cube_data();
        let mut verts = verts;
        let inward = (Vec3::new(0.5, 0.5, 0.5) - verts[6]).normalized();
        verts[6] = verts[6] + inward * 0.1;

        let mut tris = Vec::new();
        for poly in &polys {
            let s = poly.iter().enumerate().min_by_key(|(_, &v)| v).unwrap().0;
            let rot: Vec<usize> = (0..poly.len())
                .map(|i| poly[(s + i) % poly.len()])
                .collect();
            for i in 1..rot.len() - 1 {
                tris.push([rot[0], rot[i], rot[i + 1]]);
            }
        }
        let mut expected = (0usize, 0.0f64);
        for t in &tris {
            let n = (verts[t[1]] - verts[t[0]])
                .cross(verts[t[2]] - verts[t[0]])
                .normalized();
            for (vi, p) in verts.iter().enumerate() {
                let d = (*p - verts[t[0]]).dot(n);
                if d > expected.1 {
                    expected = (vi, d);
                }
            }
        }
        assert!(
            expected.1 > 0.05,
            "perturbation must violate a supporting plane"
        );

        match Polyhedron::from_polygons(verts, polys, Tolerances::default()) {
            Err(MeshError::NotConvex {
                vertex, distance, ..
            }) => {
                assert_eq!(vertex, expected.0);
                assert_relative_eq!(distance, expected.1, epsilon = 1e-9);
            }
            other => panic!("expected NotConvex, got {other:?}"),
        }
    }

    #[test]
    fn transfer_is_isometric() {
        let p = fixtures::unit_cube();
        let m = &p.mesh;
        for he in 0..m.n_halfedges() {
            let t = m.twin_of(he).unwrap();
            let iso = m.transfer(he).unwrap();
            let f = m.face_of(he);
            let k = he % 3;
            let a = m.frames[f].p[k];
            let b = m.frames[f].p[(k + 1) % 3];
            let (tf, tk) = (m.face_of(t), t % 3);
            let bt = m.frames[tf].p[tk];
            let at = m.frames[tf].p[(tk + 1) % 3];
            assert!(iso.apply(a).dist(at) < 1e-12);
            assert!(iso.apply(b).dist(bt) < 1e-12);
        }
    }

    #[test]
    fn fan_totals() {
        let p = fixtures::unit_cube();
        for v in 0..8 {
            let fan = p.mesh.fan(v);
            assert!(!fan.boundary);
            assert_relative_eq!(fan.total, 3.0 * PI / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn canonicalize_snaps() {
        let p = fixtures::unit_cube();
        let m = &p.mesh;
        // A face point essentially at corner 0 of face 0.
        let sp = SurfacePoint::Face {
            face: 0,
            bary: [1.0 - 2e-14, 1e-14, 1e-14],
        };
        assert!(matches!(m.canonicalize(&sp), SurfacePoint::Vertex(_)));
        // A face point on an edge.
        let sp = SurfacePoint::Face {
            face: 0,
            bary: [0.5, 0.5, 0.0],
        };
        assert!(matches!(m.canonicalize(&sp), SurfacePoint::Edge { .. }));
        // Edge parameter at the very end.
        let sp = SurfacePoint::Edge {
            he: 0,
            t: 1.0 - 1e-15,
        };
        assert_eq!(m.canonicalize(&sp), SurfacePoint::Vertex(m.head(0)));
        // Interior point stays put.
        let sp = SurfacePoint::Face {
            face: 0,
            bary: [0.3, 0.3, 0.4],
        };
        assert_eq!(m.canonicalize(&sp), sp);
    }

    #[test]
    fn straight_edge_crossing_has_equal_sides() {
        let p = fixtures::unit_cube();
        let m = &p.mesh;
        // Pick any interior edge and shoot straight across it.
        let he = 0;
        let q = m.canonicalize(&SurfacePoint::Edge { he, t: 0.5 });
        let q = match q {
            SurfacePoint::Edge { .. } => q,
            _ => SurfacePoint::Edge { he, t: 0.5 },
        };
        let f = m.face_of(he);
        let dir_in = m.edge_dir(he).perp() * -1.0; // into the face? direction across the edge
        let incoming = TangentDirection::new(q, f, dir_in);
        let iso = m.transfer(he).unwrap();
        let outgoing =
            TangentDirection::new(q, m.face_of(m.twin_of(he).unwrap()), iso.apply_vec(dir_in));
        let (l, r) = m.angle_sides(&q, &incoming, &outgoing).unwrap();
        assert_relative_eq!(l, PI, epsilon = 1e-12);
        assert_relative_eq!(r, PI, epsilon = 1e-12);
    }
}
