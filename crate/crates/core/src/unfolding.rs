//! Cutting a half along its shortest-path cuts, developing it in the plane,
//! verifying the flattening invariants (curvature-triangle layer), selecting
//! a supporting segment of Q, joining the halves, and certifying the result
//! is a simple planar polygon with exact predicates.

use crate::cuts::VertexCut;
use crate::geom::{Iso2, Vec2, PI, TAU};
use crate::loops::{Half, Provenance, QuasigeodesicLoop, Side};
use crate::mesh::{SurfacePoint, TriMesh};
use crate::predicates::{adjacent_segments_overlap, segments_intersect};
use crate::subdivide::{cut_face, Chain, FaceCut, NodeRef};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UnfoldError {
    #[error("cutting did not produce a disk: {0}")]
    NonDiskResult(String),
    #[error("overlap detected: {0}")]
    OverlapDetected(String),
    #[error("no supporting segment found: {0}")]
    NoSupportingSegment(String),
    #[error("unfolding internal error: {0}")]
    Internal(String),
}

/// Isosceles triangle that flattens a cut vertex: apex angle ω(v), legs
/// |sp(v)|. Not inserted when ω ≥ π (the boundary is already convex there).
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureTriangleSpec {
    pub vertex: usize,
    pub apex_angle: f64,
    pub leg_length: f64,
    pub base_angle: f64,
    pub inserted: bool,
}

impl CurvatureTriangleSpec {
    pub fn new(vertex: usize, omega: f64, leg: f64) -> Self {
        CurvatureTriangleSpec {
            vertex,
            apex_angle: omega,
            leg_length: leg,
            base_angle: PI / 2.0 - omega / 2.0,
            inserted: omega < PI,
        }
    }

    pub fn base_length(&self) -> f64 {
        2.0 * self.leg_length * (self.apex_angle / 2.0).sin()
    }
}

/// Role of a disk vertex in the unfolding boundary.
#[derive(Clone, Debug, Default)]
pub struct VertInfo {
    /// Arc position along Q when the vertex lies on the loop.
    pub q_arc: Option<f64>,
    /// True corner of Q (bent corner or the loop point).
    pub q_bent: bool,
    pub is_x: bool,
    /// Original vertex ids whose shortest paths end here.
    pub projection_of: Vec<usize>,
    /// Slit end: (original vertex id, curvature).
    pub cut_vertex: Option<(usize, f64)>,
    /// Cut path this vertex lies on (interior crossing points).
    pub on_cut: Option<usize>,
}

/// The half after cutting along all its shortest paths: still stored as a
/// mesh, with cut edges marked; the development treats them as boundary.
#[derive(Clone, Debug)]
pub struct CutDisk {
    pub side: Side,
    pub mesh: TriMesh,
    /// Original polyhedron face per disk face.
    pub face_parent: Vec<usize>,
    /// Canonical half-edge ids of cut edges, mapped to the cut index.
    pub cut_edges: HashMap<usize, usize>,
    pub verts: Vec<VertInfo>,
    pub x_local: usize,
    pub triangle_specs: Vec<CurvatureTriangleSpec>,
    pub loop_len: f64,
}

/// Cut the half along its vertex cuts. The result is a topological disk once
/// the cut edges are treated as boundary; every curvature-carrying interior
/// vertex ends up on that boundary.
pub fn cut_half(half: &Half, cuts: &[VertexCut]) -> Result<CutDisk, UnfoldError> {
    let mesh = &half.mesh;
    let eps = mesh.eps;
    let eps_retess = eps.retess();

    // Global ids: existing half vertices, then new points (crossings and
    // edge-interior projections), deduplicated per path point.
    let mut verts = mesh.verts.clone();
    let mut edge_points: BTreeMap<usize, Vec<(f64, usize)>> = BTreeMap::new();
    let mut cut_gids: Vec<Vec<usize>> = Vec::with_capacity(cuts.len());
    for c in cuts {
        let mut gids = Vec::with_capacity(c.points.len());
        for sp in &c.points {
            match *sp {
                SurfacePoint::Vertex(v) => gids.push(v),
                SurfacePoint::Edge { he, t } => {
                    let canon = mesh.canonical_edge(he);
                    let tc = if canon == he { t } else { 1.0 - t };
                    let entry = edge_points.entry(canon).or_default();
                    let len = mesh.edge_len(canon);
                    let found = entry
                        .iter()
                        .find(|(t0, _)| (t0 - tc).abs() * len <= eps.point)
                        .map(|&(_, g)| g);
                    let gid = match found {
                        Some(g) => g,
                        None => {
                            let g = verts.len();
                            verts.push(mesh.position(sp));
                            entry.push((tc, g));
                            g
                        }
                    };
                    gids.push(gid);
                }
                SurfacePoint::Face { .. } => {
                    return Err(UnfoldError::Internal(
                        "cut path has a face-interior corner".into(),
                    ))
                }
            }
        }
        cut_gids.push(gids);
    }

    // Chains: one two-node chain per path segment, in that segment's face.
    // Segments running along existing mesh edges need no subdivision; they
    // are picked up directly when cut edges are marked below.
    let nv_orig = mesh.verts.len();
    let mut chains_per_face: BTreeMap<usize, Vec<Chain>> = BTreeMap::new();
    for (ci, c) in cuts.iter().enumerate() {
        for (si, seg) in c.segs.iter().enumerate() {
            let (a, b) = (cut_gids[ci][si], cut_gids[ci][si + 1]);
            if a < nv_orig && b < nv_orig && mesh.find_he(a, b).is_some() {
                continue;
            }
            let nodes = vec![
                NodeRef { gid: a, pos: seg.a },
                NodeRef { gid: b, pos: seg.b },
            ];
            chains_per_face
                .entry(seg.face)
                .or_default()
                .push(Chain { nodes });
        }
    }

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
            face_parent.push(half.face_parent[f]);
            continue;
        }
        let tris = cut_face(&fc, eps_retess.area)
            .map_err(|e| UnfoldError::NonDiskResult(format!("face {f}: {e}")))?;
        for tri in tris {
            faces.push(tri);
            face_parent.push(half.face_parent[f]);
        }
    }

    let new_mesh = TriMesh::build(verts, faces, eps_retess)
        .map_err(|e| UnfoldError::NonDiskResult(format!("rebuilt half: {e}")))?;

    let mut cut_edges = HashMap::new();
    for (ci, gids) in cut_gids.iter().enumerate() {
        for w in gids.windows(2) {
            let he = new_mesh.find_he(w[0], w[1]).ok_or_else(|| {
                UnfoldError::NonDiskResult(format!("cut {ci} segment is not a mesh edge"))
            })?;
            cut_edges.insert(new_mesh.canonical_edge(he), ci);
        }
    }

    // Vertex roles.
    let mut verts_info: Vec<VertInfo> = vec![VertInfo::default(); new_mesh.verts.len()];
    for (lv, prov) in half.provenance.iter().enumerate() {
        if let Provenance::QCorner(ci) = prov {
            verts_info[lv].q_arc = Some(half.corner_arc(*ci));
            verts_info[lv].q_bent = half.corner_is_bent(*ci);
            verts_info[lv].is_x = lv == half.x_local;
        }
    }
    let mut triangle_specs = Vec::with_capacity(cuts.len());
    for (ci, c) in cuts.iter().enumerate() {
        let omega = half
            .interior
            .iter()
            .find(|&&(lv, _, _)| lv == c.local_vertex)
            .map(|&(_, _, w)| w)
            .ok_or_else(|| UnfoldError::Internal("cut source is not interior".into()))?;
        verts_info[c.local_vertex].cut_vertex = Some((c.vertex, omega));
        triangle_specs.push(CurvatureTriangleSpec::new(c.vertex, omega, c.length));
        let gids = &cut_gids[ci];
        for &g in &gids[1..gids.len() - 1] {
            verts_info[g].on_cut = Some(ci);
        }
        let proj_gid = *gids.last().unwrap();
        verts_info[proj_gid].projection_of.push(c.vertex);
        if verts_info[proj_gid].q_arc.is_none() {
            verts_info[proj_gid].q_arc = Some(c.projection_arc);
        }
    }

    let disk = CutDisk {
        side: half.side,
        mesh: new_mesh,
        face_parent,
        cut_edges,
        verts: verts_info,
        x_local: half.x_local,
        triangle_specs,
        loop_len: half.loop_len,
    };
    disk.check_disk()?;
    Ok(disk)
}

impl CutDisk {
    fn is_cut(&self, he: usize) -> bool {
        self.cut_edges.contains_key(&self.mesh.canonical_edge(he))
    }

    /// Directed half-edges forming the cut-open boundary.
    fn boundary_set(&self) -> Vec<bool> {
        let m = &self.mesh;
        let mut b = vec![false; m.n_halfedges()];
        for (he, slot) in b.iter_mut().enumerate() {
            if m.twin_of(he).is_none() || self.is_cut(he) {
                *slot = true;
            }
        }
        b
    }

    /// Next boundary half-edge with the surface kept on the left.
    fn next_boundary(&self, he: usize, in_boundary: &[bool]) -> usize {
        let m = &self.mesh;
        let mut r = m.next(he);
        loop {
            if in_boundary[r] {
                return r;
            }
            r = m.next(m.twin_of(r).expect("interior edge"));
        }
    }

    /// The cut-open surface must be a single disk: one boundary walk
    /// covering every boundary half-edge.
    fn check_disk(&self) -> Result<(), UnfoldError> {
        let in_boundary = self.boundary_set();
        let total: usize = in_boundary.iter().filter(|&&b| b).count();
        let start = in_boundary
            .iter()
            .position(|&b| b)
            .ok_or_else(|| UnfoldError::NonDiskResult("no boundary".into()))?;
        let mut he = start;
        let mut steps = 0;
        loop {
            he = self.next_boundary(he, &in_boundary);
            steps += 1;
            if he == start {
                break;
            }
            if steps > total {
                return Err(UnfoldError::NonDiskResult(
                    "boundary walk does not close over all boundary edges".into(),
                ));
            }
        }
        if steps != total {
            return Err(UnfoldError::NonDiskResult(format!(
                "boundary walk covers {steps} of {total} boundary half-edges"
            )));
        }
        Ok(())
    }
}

/// One vertex of a development's boundary polygon.
#[derive(Clone, Debug)]
pub struct DevVertex {
    pub pos: Vec2,
    pub local_v: usize,
    pub interior_angle: f64,
}

/// What a boundary polygon edge is.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeTag {
    /// Piece of Q between arc positions (in walk order).
    QArc { arc_from: f64, arc_to: f64 },
    /// One side of a cut path; `cut` indexes the disk's triangle specs.
    Cut { cut: usize },
    /// Base of an inserted curvature triangle (with_triangles layouts).
    TriangleBase { cut: usize },
}

/// Planar isometric layout of a cut-open half.
#[derive(Clone, Debug)]
pub struct PlanarDevelopment {
    pub side: Side,
    pub placements: Vec<Iso2>,
    pub boundary: Vec<DevVertex>,
    pub edge_tags: Vec<EdgeTag>,
    pub with_triangles: bool,
    pub area: f64,
    pub face_parent: Vec<usize>,
    pub triangle_specs: Vec<CurvatureTriangleSpec>,
    /// Info per boundary vertex (slot-parallel with `boundary`).
    pub vert_info: Vec<VertInfo>,
    pub loop_len: f64,
}

impl PlanarDevelopment {
    pub fn polygon(&self) -> Vec<Vec2> {
        self.boundary.iter().map(|v| v.pos).collect()
    }

    /// Number of boundary vertices that are images of the loop point.
    pub fn x_image_count(&self) -> usize {
        self.vert_info.iter().filter(|vi| vi.is_x).count()
    }

    /// Sum of interior boundary angles over the images of the loop point
    /// (equals the loop-point angle toward this half).
    pub fn x_angle_sum(&self) -> f64 {
        self.boundary
            .iter()
            .zip(&self.vert_info)
            .filter(|(_, vi)| vi.is_x)
            .map(|(b, _)| b.interior_angle)
            .sum()
    }

    /// Apply a rigid motion to the whole development.
    pub fn transformed(&self, iso: &Iso2) -> PlanarDevelopment {
        let mut out = self.clone();
        for p in &mut out.placements {
            *p = iso.compose(p);
        }
        for v in &mut out.boundary {
            v.pos = iso.apply(v.pos);
        }
        out
    }
}

/// Lay out the cut disk in the plane by breadth-first development across
/// interior uncut edges. With `with_triangles`, each cut vertex with ω < π
/// has its slit replaced by the base of the curvature triangle (the
/// flattening verification layout).
pub fn develop_half(
    disk: &CutDisk,
    with_triangles: bool,
) -> Result<PlanarDevelopment, UnfoldError> {
    let m = &disk.mesh;
    let nf = m.faces.len();
    let in_boundary = disk.boundary_set();

    let mut placements: Vec<Option<Iso2>> = vec![None; nf];
    placements[0] = Some(Iso2::IDENTITY);
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(f) = queue.pop_front() {
        let base = placements[f].expect("queued face placed");
        for k in 0..3 {
            let he = m.he_of(f, k);
            if in_boundary[he] {
                continue;
            }
            let tw = m.twin_of(he).expect("interior");
            // Both directions of a cut edge are boundary; skip if either is.
            if in_boundary[tw] {
                continue;
            }
            let g = m.face_of(tw);
            if placements[g].is_some() {
                continue;
            }
            let step = m.transfer(tw).expect("interior");
            placements[g] = Some(base.compose(&step));
            queue.push_back(g);
        }
    }
    if placements.iter().any(|p| p.is_none()) {
        return Err(UnfoldError::NonDiskResult(
            "development did not reach all faces (disconnected cut disk)".into(),
        ));
    }
    let placements: Vec<Iso2> = placements.into_iter().map(|p| p.unwrap()).collect();

    // Path independence: non-tree uncut interior edges must agree.
    let closure_tol = 1e-9 * m.eps.diag.max(1.0);
    for (he, _) in in_boundary.iter().enumerate().filter(|(_, &b)| !b) {
        let tw = m.twin_of(he).unwrap();
        if tw < he {
            continue;
        }
        let f = m.face_of(he);
        let g = m.face_of(tw);
        let k = he % 3;
        let a_f = placements[f].apply(m.frames[f].p[k]);
        let b_f = placements[f].apply(m.frames[f].p[(k + 1) % 3]);
        let tk = tw % 3;
        let b_g = placements[g].apply(m.frames[g].p[tk]);
        let a_g = placements[g].apply(m.frames[g].p[(tk + 1) % 3]);
        if a_f.dist(a_g) > closure_tol || b_f.dist(b_g) > closure_tol {
            return Err(UnfoldError::Internal(format!(
                "development holonomy at edge {he}: {:.3e}",
                a_f.dist(a_g).max(b_f.dist(b_g))
            )));
        }
    }

    // Boundary walk.
    let start = in_boundary.iter().position(|&b| b).unwrap();
    let mut walk = Vec::new();
    let mut he = start;
    loop {
        walk.push(he);
        he = disk.next_boundary(he, &in_boundary);
        if he == start {
            break;
        }
    }

    let mut boundary = Vec::with_capacity(walk.len());
    let mut edge_tags = Vec::with_capacity(walk.len());
    let mut vert_info = Vec::with_capacity(walk.len());
    for (i, &he_i) in walk.iter().enumerate() {
        let f = m.face_of(he_i);
        let v = m.origin(he_i);
        let pos = placements[f].apply(m.frames[f].p[he_i % 3]);
        // Interior angle: sum of sector corner angles between the previous
        // boundary edge and this one.
        let prev_he = walk[(i + walk.len() - 1) % walk.len()];
        let mut angle = 0.0;
        let mut r = m.next(prev_he);
        loop {
            let rf = m.face_of(r);
            let rk = m.corner_of(rf, v).expect("sector corner");
            angle += m.corner_angle(rf, rk);
            if r == he_i {
                break;
            }
            r = m.next(m.twin_of(r).expect("sector interior edge"));
        }
        boundary.push(DevVertex {
            pos,
            local_v: v,
            interior_angle: angle,
        });
        vert_info.push(disk.verts[v].clone());
        let tag = match disk.cut_edges.get(&m.canonical_edge(he_i)) {
            Some(&ci) => EdgeTag::Cut { cut: ci },
            None => {
                let a0 = disk.verts[m.origin(he_i)]
                    .q_arc
                    .ok_or_else(|| UnfoldError::Internal("boundary vertex without arc".into()))?;
                let a1 = disk.verts[m.head(he_i)]
                    .q_arc
                    .ok_or_else(|| UnfoldError::Internal("boundary vertex without arc".into()))?;
                EdgeTag::QArc {
                    arc_from: a0,
                    arc_to: a1,
                }
            }
        };
        edge_tags.push(tag);
    }

    let mut dev = PlanarDevelopment {
        side: disk.side,
        placements,
        boundary,
        edge_tags,
        with_triangles,
        area: 0.0,
        face_parent: disk.face_parent.clone(),
        triangle_specs: disk.triangle_specs.clone(),
        vert_info,
        loop_len: disk.loop_len,
    };

    if with_triangles {
        insert_triangles(&mut dev)?;
    }

    let mut area: f64 = (0..nf).map(|f| m.face_area(f)).sum();
    if with_triangles {
        for spec in &dev.triangle_specs {
            if spec.inserted {
                area += 0.5 * spec.leg_length * spec.leg_length * spec.apex_angle.sin();
            }
        }
    }
    dev.area = area;

    let poly = dev.polygon();
    let shoelace = polygon_area(&poly);
    if ((shoelace - area) / area.max(1e-300)).abs() > 1e-8 {
        return Err(UnfoldError::Internal(format!(
            "development area {shoelace} differs from surface area {area}"
        )));
    }
    Ok(dev)
}

/// Replace each slit of a cut vertex with ω < π by the base of its
/// curvature triangle. For ω ≥ π nothing is glued in; the slit stays and
/// the boundary is already convex at its end.
fn insert_triangles(dev: &mut PlanarDevelopment) -> Result<(), UnfoldError> {
    loop {
        let n = dev.boundary.len();
        let mut target = None;
        for i in 0..n {
            if let Some((_, omega)) = dev.vert_info[i].cut_vertex {
                if omega < PI {
                    target = Some(i);
                    break;
                }
            }
        }
        let Some(apex) = target else { break };
        let mut a = apex;
        while matches!(dev.edge_tags[(a + n - 1) % n], EdgeTag::Cut { .. }) {
            a = (a + n - 1) % n;
            if a == apex {
                return Err(UnfoldError::Internal("slit walk did not terminate".into()));
            }
        }
        let mut b = apex;
        while matches!(dev.edge_tags[b], EdgeTag::Cut { .. }) {
            b = (b + 1) % n;
            if b == apex {
                return Err(UnfoldError::Internal("slit walk did not terminate".into()));
            }
        }
        let cut_idx = match dev.edge_tags[a] {
            EdgeTag::Cut { cut } => cut,
            _ => unreachable!("a stops on the first cut edge"),
        };
        let spec = dev.triangle_specs[cut_idx].clone();
        let base = dev.boundary[a].pos.dist(dev.boundary[b].pos);
        if (base - spec.base_length()).abs() > 1e-7 * (1.0 + spec.leg_length) {
            return Err(UnfoldError::Internal(format!(
                "slit mouth {base} differs from triangle base {}",
                spec.base_length()
            )));
        }
        // Splice out the excursion (a, b) exclusive; bridge with the base.
        let mut nb = Vec::new();
        let mut ntags = Vec::new();
        let mut ninfo = Vec::new();
        let mut i = b;
        loop {
            nb.push(dev.boundary[i].clone());
            ninfo.push(dev.vert_info[i].clone());
            if i == a {
                ntags.push(EdgeTag::TriangleBase { cut: cut_idx });
                break;
            }
            ntags.push(dev.edge_tags[i].clone());
            i = (i + 1) % n;
        }
        let last = nb.len() - 1;
        nb[0].interior_angle += spec.base_angle;
        nb[last].interior_angle += spec.base_angle;
        dev.boundary = nb;
        dev.edge_tags = ntags;
        dev.vert_info = ninfo;
    }
    Ok(())
}

pub fn polygon_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += poly[i].cross(poly[(i + 1) % n]);
    }
    s * 0.5
}

/// Certificate of polygon simplicity.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub edges: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossingWitness {
    pub edge_a: usize,
    pub edge_b: usize,
    pub kind: String,
}

/// Exact simplicity certification: adaptive-precision orientation tests over
/// all edge pairs. Adjacent edges may meet only at their shared vertex; all
/// other pairs must be disjoint.
pub fn certify_simple_polygon(poly: &[Vec2]) -> Result<Certificate, CrossingWitness> {
    let n = poly.len();
    if n < 3 {
        return Err(CrossingWitness {
            edge_a: 0,
            edge_b: 0,
            kind: "fewer than 3 vertices".into(),
        });
    }
    for i in 0..n {
        if poly[i] == poly[(i + 1) % n] {
            return Err(CrossingWitness {
                edge_a: i,
                edge_b: i,
                kind: "zero-length edge".into(),
            });
        }
    }
    for i in 0..n {
        let (a0, a1) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            let (b0, b1) = (poly[j], poly[(j + 1) % n]);
            if j == i + 1 {
                // Shared vertex a1 == b0.
                if adjacent_segments_overlap(a1, a0, b1) {
                    return Err(CrossingWitness {
                        edge_a: i,
                        edge_b: j,
                        kind: "adjacent edges overlap".into(),
                    });
                }
                continue;
            }
            if i == 0 && j == n - 1 {
                // Shared vertex a0 == b1.
                if adjacent_segments_overlap(a0, a1, b0) {
                    return Err(CrossingWitness {
                        edge_a: i,
                        edge_b: j,
                        kind: "adjacent edges overlap".into(),
                    });
                }
                continue;
            }
            if segments_intersect(a0, a1, b0, b1) {
                return Err(CrossingWitness {
                    edge_a: i,
                    edge_b: j,
                    kind: "edges intersect".into(),
                });
            }
        }
    }
    Ok(Certificate { edges: n })
}

/// Position along a development's boundary walk: parameter `t ∈ [0,1]`
/// along polygon edge `edge` (in walk direction).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RunLoc {
    pub edge: usize,
    pub t: f64,
}

/// An accepted uncut sub-arc of Q. Each run is the walk interval the arc
/// occupies in that development, `(walk-earlier, walk-later)`.
#[derive(Clone, Debug, Serialize)]
pub struct SupportingSegment {
    pub arc_from: f64,
    pub arc_to: f64,
    pub dev1_run: (RunLoc, RunLoc),
    pub dev2_run: (RunLoc, RunLoc),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateStatus {
    Accepted,
    RejectedSupport,
    RejectedJoin,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateReport {
    pub arc_from: f64,
    pub arc_to: f64,
    pub status: CandidateStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportReport {
    pub candidates: Vec<CandidateReport>,
    pub accepted_index: usize,
}

impl SupportReport {
    /// Accepted candidates as (arc_from, arc_to) pairs.
    pub fn accepted_arcs(&self) -> Vec<(f64, f64)> {
        self.candidates
            .iter()
            .filter(|c| c.status == CandidateStatus::Accepted)
            .map(|c| (c.arc_from, c.arc_to))
            .collect()
    }
}

fn run_pos(dev: &PlanarDevelopment, loc: &RunLoc) -> Vec2 {
    let n = dev.boundary.len();
    let a = dev.boundary[loc.edge].pos;
    let b = dev.boundary[(loc.edge + 1) % n].pos;
    Vec2::lerp(a, b, loc.t)
}

/// Locate the point at arc position `arc` on the development boundary,
/// searching near `probe` (an arc value strictly inside the candidate) so
/// the right copy is found when slits duplicate arc values.
fn locate_arc(dev: &PlanarDevelopment, arc: f64, probe: f64, total: f64) -> Option<RunLoc> {
    let tol = 1e-9 * total.max(1.0);
    for (ei, tag) in dev.edge_tags.iter().enumerate() {
        let EdgeTag::QArc { arc_from, arc_to } = tag else {
            continue;
        };
        // Covered arc span in walk direction, modularly.
        let d = match dev.side {
            Side::Left => (arc_to - arc_from).rem_euclid(total),
            Side::Right => (arc_from - arc_to).rem_euclid(total),
        };
        if d <= tol {
            continue;
        }
        let off_probe = match dev.side {
            Side::Left => (probe - arc_from).rem_euclid(total),
            Side::Right => (arc_from - probe).rem_euclid(total),
        };
        if off_probe > d + tol {
            continue;
        }
        let mut off = match dev.side {
            Side::Left => (arc - arc_from).rem_euclid(total),
            Side::Right => (arc_from - arc).rem_euclid(total),
        };
        if off > d {
            // The true endpoint sits a hair outside this edge; clamp to the
            // nearer end.
            off = if off >= total - d { 0.0 } else { d };
        }
        return Some(RunLoc {
            edge: ei,
            t: (off / d).clamp(0.0, 1.0),
        });
    }
    None
}

/// Walk interval occupied by the arc `[a0, a1]` in this development.
fn locate_run(dev: &PlanarDevelopment, a0: f64, a1: f64, total: f64) -> Option<(RunLoc, RunLoc)> {
    let span = (a1 - a0).rem_euclid(total.max(f64::MIN_POSITIVE));
    let nudge = (1e-7 * total).min(0.25 * span.max(1e-300));
    let probe_start = (a0 + nudge) % total;
    let probe_end = (a1 - nudge).rem_euclid(total);
    match dev.side {
        Side::Left => {
            let r0 = locate_arc(dev, a0, probe_start, total)?;
            let r1 = locate_arc(dev, a1, probe_end, total)?;
            Some((r0, r1))
        }
        Side::Right => {
            let r0 = locate_arc(dev, a1, probe_end, total)?;
            let r1 = locate_arc(dev, a0, probe_start, total)?;
            Some((r0, r1))
        }
    }
}

fn supports(dev: &PlanarDevelopment, run: &(RunLoc, RunLoc), tol: f64) -> bool {
    let p0 = run_pos(dev, &run.0);
    let p1 = run_pos(dev, &run.1);
    let chord = p1 - p0;
    if chord.norm() <= tol {
        return false;
    }
    dev.boundary.iter().all(|v| chord.cross(v.pos - p0) >= -tol)
}

/// Enumerate maximal open sub-arcs of Q between consecutive marked points
/// (bent corners, the loop point, projections) in arc order from x. The
/// first candidate whose extension supports both developments *and* joins
/// them into a certified simple polygon is returned.
pub fn select_supporting_segment(
    q: &QuasigeodesicLoop,
    dev1: &PlanarDevelopment,
    dev2: &PlanarDevelopment,
    support_tol: f64,
) -> Result<(SupportingSegment, SupportReport), UnfoldError> {
    let total = q.total_len;
    let mut marks: Vec<f64> = vec![0.0]; // x sits at arc 0
    for (i, c) in q.corners.iter().enumerate() {
        let bent = (c.left - PI).abs() > 1e-9 || (c.right - PI).abs() > 1e-9;
        if bent || i == q.loop_point {
            marks.push(q.arc[i]);
        }
    }
    for dev in [dev1, dev2] {
        for vi in &dev.vert_info {
            if !vi.projection_of.is_empty() {
                if let Some(a) = vi.q_arc {
                    marks.push(a);
                }
            }
        }
    }
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let merge_tol = 1e-9 * total.max(1.0);
    marks.dedup_by(|a, b| (*a - *b).abs() <= merge_tol);
    if let (Some(&first), Some(&last)) = (marks.first(), marks.last()) {
        if (total - last + first).abs() <= merge_tol {
            marks.pop();
        }
    }

    let nm = marks.len();
    let mut reports = Vec::with_capacity(nm);
    let mut chosen: Option<(SupportingSegment, usize)> = None;
    for ci in 0..nm {
        let a0 = marks[ci];
        let a1 = if ci + 1 < nm { marks[ci + 1] } else { total };
        let mut status = CandidateStatus::RejectedSupport;
        if a1 - a0 > merge_tol {
            if let (Some(run1), Some(run2)) = (
                locate_run(dev1, a0, a1, total),
                locate_run(dev2, a0, a1, total),
            ) {
                if supports(dev1, &run1, support_tol) && supports(dev2, &run2, support_tol) {
                    let s = SupportingSegment {
                        arc_from: a0,
                        arc_to: a1 % total,
                        dev1_run: run1,
                        dev2_run: run2,
                    };
                    // The join must certify too: an unbent junction (e.g. the
                    // loop point of a pure geodesic) leaves both halves
                    // collinear beyond it — a genuine self-contact for that
                    // candidate.
                    match join_halves(dev1, dev2, &s, support_tol) {
                        Ok(_) => {
                            status = CandidateStatus::Accepted;
                            if chosen.is_none() {
                                chosen = Some((s, ci));
                            }
                        }
                        Err(UnfoldError::OverlapDetected(_)) => {
                            status = CandidateStatus::RejectedJoin;
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        reports.push(CandidateReport {
            arc_from: a0,
            arc_to: a1 % total,
            status,
        });
    }
    match chosen {
        Some((s, idx)) => Ok((
            s,
            SupportReport {
                candidates: reports,
                accepted_index: idx,
            },
        )),
        None => Err(UnfoldError::NoSupportingSegment(format!(
            "none of {nm} candidate arcs supports both developments and joins simply"
        ))),
    }
}

/// Marker kinds on the final unfolding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkerKind {
    LoopPoint,
    VertexImage,
    Projection,
    QCorner,
}

#[derive(Clone, Debug, Serialize)]
pub struct Marker {
    pub kind: MarkerKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex: Option<usize>,
    pub position: Vec2,
}

#[derive(Clone, Debug)]
pub struct Unfolding {
    pub polygon: Vec<Vec2>,
    pub markers: Vec<Marker>,
    pub s: SupportingSegment,
    pub s_from: Vec2,
    pub s_to: Vec2,
    pub dev1: PlanarDevelopment,
    pub dev2: PlanarDevelopment,
    pub area: f64,
    pub certificate: Certificate,
    /// Interior polygon angles at images of x, summed.
    pub x_image_angle_sum: f64,
}

/// One station of a merged boundary: a development vertex (with its info)
/// or a synthetic point where s ends inside a Q-arc edge.
#[derive(Clone, Debug)]
struct Station {
    pos: Vec2,
    vidx: Option<usize>,
}

/// Boundary of `dev` kept after removing the s run: stations from the run's
/// walk-end forward around to the run's walk-start, endpoints included.
fn kept_boundary(dev: &PlanarDevelopment, run: &(RunLoc, RunLoc), tol: f64) -> Vec<Station> {
    let n = dev.boundary.len();
    let (r0, r1) = run;
    let mut out: Vec<Station> = Vec::new();
    let push = |st: Station, out: &mut Vec<Station>| {
        if let Some(last) = out.last() {
            if last.pos.dist(st.pos) <= tol {
                // Prefer the station that carries vertex identity.
                if last.vidx.is_none() && st.vidx.is_some() {
                    *out.last_mut().unwrap() = st;
                }
                return;
            }
        }
        out.push(st);
    };
    // Start: the point where s ends (walk-later endpoint).
    let start_pos = run_pos(dev, r1);
    let start_vidx = if r1.t >= 1.0 - 1e-12 {
        Some((r1.edge + 1) % n)
    } else if r1.t <= 1e-12 {
        Some(r1.edge)
    } else {
        None
    };
    push(
        Station {
            pos: start_pos,
            vidx: start_vidx,
        },
        &mut out,
    );
    // All polygon vertices strictly between the runs.
    let mut i = (r1.edge + 1) % n;
    loop {
        push(
            Station {
                pos: dev.boundary[i].pos,
                vidx: Some(i),
            },
            &mut out,
        );
        if i == r0.edge {
            break;
        }
        i = (i + 1) % n;
    }
    // End: the point where s starts.
    let end_pos = run_pos(dev, r0);
    let end_vidx = if r0.t <= 1e-12 {
        Some(r0.edge)
    } else if r0.t >= 1.0 - 1e-12 {
        Some((r0.edge + 1) % n)
    } else {
        None
    };
    push(
        Station {
            pos: end_pos,
            vidx: end_vidx,
        },
        &mut out,
    );
    out
}

/// Rigidly place the two developments on opposite sides of the line through
/// the supporting segment and merge their boundaries into one polygon.
/// `dev1` ends up with s on the x-axis and its interior above; `dev2` below.
pub fn join_halves(
    dev1: &PlanarDevelopment,
    dev2: &PlanarDevelopment,
    s: &SupportingSegment,
    support_tol: f64,
) -> Result<Unfolding, UnfoldError> {
    let p0 = run_pos(dev1, &s.dev1_run.0);
    let p1 = run_pos(dev1, &s.dev1_run.1);
    let len = p0.dist(p1);
    if len <= support_tol {
        return Err(UnfoldError::Internal(
            "degenerate supporting segment".into(),
        ));
    }
    let iso1 = Iso2::mapping_segment(p0, p1, Vec2::ZERO, Vec2::new(len, 0.0));
    let d1 = dev1.transformed(&iso1);

    // dev2 walks the arc in reverse; mapping its run onto the segment
    // reversed puts its interior below the line.
    let q0 = run_pos(dev2, &s.dev2_run.0);
    let q1 = run_pos(dev2, &s.dev2_run.1);
    let iso2 = Iso2::mapping_segment(q0, q1, Vec2::new(len, 0.0), Vec2::ZERO);
    let d2 = dev2.transformed(&iso2);

    for v in &d1.boundary {
        if v.pos.y < -support_tol {
            return Err(UnfoldError::OverlapDetected(format!(
                "upper development dips {:.3e} below the supporting line",
                -v.pos.y
            )));
        }
    }
    for v in &d2.boundary {
        if v.pos.y > support_tol {
            return Err(UnfoldError::OverlapDetected(format!(
                "lower development rises {:.3e} above the supporting line",
                v.pos.y
            )));
        }
    }

    let station_tol = 1e-12 * (1.0 + len);
    let kept1 = kept_boundary(&d1, &s.dev1_run, station_tol);
    let kept2 = kept_boundary(&d2, &s.dev2_run, station_tol);
    if kept1.len() < 2 || kept2.len() < 2 {
        return Err(UnfoldError::Internal("degenerate kept boundary".into()));
    }

    // Merge: kept1 runs (len,0) -> ... -> (0,0); kept2 runs (0,0) -> ... ->
    // (len,0). Junction points come from kept1; kept2's endpoints fold their
    // angle contributions into them.
    let mut poly: Vec<Vec2> = Vec::new();
    let mut slots: Vec<(Option<(usize, bool)>, Vec2)> = Vec::new(); // ((vidx, from_dev1), pos)
    for st in &kept1 {
        poly.push(st.pos);
        slots.push((st.vidx.map(|v| (v, true)), st.pos));
    }
    for st in &kept2[1..kept2.len() - 1] {
        poly.push(st.pos);
        slots.push((st.vidx.map(|v| (v, false)), st.pos));
    }

    let certificate = certify_simple_polygon(&poly).map_err(|w| {
        UnfoldError::OverlapDetected(format!(
            "polygon edges {} and {}: {}",
            w.edge_a, w.edge_b, w.kind
        ))
    })?;

    let area1 = polygon_area(&d1.polygon());
    let area2 = polygon_area(&d2.polygon());
    let area = polygon_area(&poly);
    if ((area - (area1 + area2)) / (area1 + area2)).abs() > 1e-8 {
        return Err(UnfoldError::Internal(format!(
            "joined area {area} differs from {area1} + {area2}"
        )));
    }

    // Markers and x-image angle bookkeeping: interior angles of polygon
    // vertices that are images of x, with the junction angles folded in from
    // the dropped kept2 endpoints.
    let mut markers = Vec::new();
    let mut x_sum = 0.0;
    let fold = |st: &Station, dev: &PlanarDevelopment| -> f64 {
        match st.vidx {
            Some(v) if dev.vert_info[v].is_x => dev.boundary[v].interior_angle,
            _ => 0.0,
        }
    };
    let junction_end_extra = fold(&kept2[0], &d2); // coincides with kept1's last? no: kept2[0] pairs with kept1 last
    let junction_start_extra = fold(&kept2[kept2.len() - 1], &d2);
    let last_k = kept1.len() - 1;
    for (k, (slot, pos)) in slots.iter().enumerate() {
        let Some((vidx, from_dev1)) = slot else {
            continue;
        };
        let dev = if *from_dev1 { &d1 } else { &d2 };
        let vi = &dev.vert_info[*vidx];
        let mut angle = dev.boundary[*vidx].interior_angle;
        // kept1[0] sits at (len,0) where kept2 ends; kept1[last] at (0,0)
        // where kept2 begins.
        if k == 0 {
            angle += junction_start_extra;
        }
        if k == last_k {
            angle += junction_end_extra;
        }
        if vi.is_x {
            x_sum += angle;
            markers.push(Marker {
                kind: MarkerKind::LoopPoint,
                vertex: None,
                position: *pos,
            });
        }
        if let Some((orig, _)) = vi.cut_vertex {
            markers.push(Marker {
                kind: MarkerKind::VertexImage,
                vertex: Some(orig),
                position: *pos,
            });
        }
        for &orig in &vi.projection_of {
            markers.push(Marker {
                kind: MarkerKind::Projection,
                vertex: Some(orig),
                position: *pos,
            });
        }
        if vi.q_bent && !vi.is_x {
            markers.push(Marker {
                kind: MarkerKind::QCorner,
                vertex: None,
                position: *pos,
            });
        }
    }
    // Junctions synthetic in dev1 but marked in dev2 keep dev2's markers.
    for (st2, k1) in [(&kept2[kept2.len() - 1], 0usize), (&kept2[0], last_k)] {
        if slots[k1].0.is_some() {
            continue;
        }
        let Some(v2) = st2.vidx else { continue };
        let vi = &d2.vert_info[v2];
        let pos = poly[k1];
        if vi.is_x {
            x_sum += d2.boundary[v2].interior_angle;
            markers.push(Marker {
                kind: MarkerKind::LoopPoint,
                vertex: None,
                position: pos,
            });
        }
        for &orig in &vi.projection_of {
            markers.push(Marker {
                kind: MarkerKind::Projection,
                vertex: Some(orig),
                position: pos,
            });
        }
    }

    Ok(Unfolding {
        polygon: poly,
        markers,
        s: s.clone(),
        s_from: Vec2::ZERO,
        s_to: Vec2::new(len, 0.0),
        dev1: d1,
        dev2: d2,
        area,
        certificate,
        x_image_angle_sum: x_sum,
    })
}

/// Convexity check for a with-triangles development of the
/// convex half: every boundary turn nonnegative and total turn 2π.
pub fn check_convex_development(dev: &PlanarDevelopment) -> Result<(), UnfoldError> {
    let poly = dev.polygon();
    let n = poly.len();
    let mut total_turn = 0.0;
    for i in 0..n {
        let a = poly[(i + n - 1) % n];
        let b = poly[i];
        let c = poly[(i + 1) % n];
        let turn = (c - b).angle() - (b - a).angle();
        let turn = (turn + PI).rem_euclid(TAU) - PI;
        if turn < -1e-7 {
            return Err(UnfoldError::OverlapDetected(format!(
                "reflex boundary angle at vertex {i} of the convex half (turn {turn:.3e})"
            )));
        }
        total_turn += turn;
    }
    if (total_turn - TAU).abs() > 1e-7 {
        return Err(UnfoldError::Internal(format!(
            "boundary turn {total_turn} differs from 2π"
        )));
    }
    Ok(())
}

/// Boundary-angle identity at slit ends: the interior angle at the single
/// image of each cut vertex equals 2π − ω(v).
pub fn check_slit_angles(dev: &PlanarDevelopment) -> Result<(), UnfoldError> {
    if dev.with_triangles {
        return Err(UnfoldError::Internal(
            "slit angles are defined on the bare development".into(),
        ));
    }
    for (i, vi) in dev.vert_info.iter().enumerate() {
        if let Some((orig, omega)) = vi.cut_vertex {
            let angle = dev.boundary[i].interior_angle;
            if (angle - (TAU - omega)).abs() > 1e-8 {
                return Err(UnfoldError::Internal(format!(
                    "image of vertex {orig} has boundary angle {angle}, expected {}",
                    TAU - omega
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::cut_all;
    use crate::fixtures;
    use crate::loops::{loop_from_vertices, split_halves};
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_certifies() {
        let sq = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(certify_simple_polygon(&sq).is_ok());
    }

    #[test]
    fn bowtie_yields_witness() {
        let bow = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        let w = certify_simple_polygon(&bow).unwrap_err();
        assert_eq!((w.edge_a, w.edge_b), (0, 2));
    }

    #[test]
    fn degenerate_polygons_yield_witness() {
        assert!(certify_simple_polygon(&[Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)]).is_err());
        let dup = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(certify_simple_polygon(&dup).is_err());
        let spike = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!(certify_simple_polygon(&spike).is_err());
    }

    fn latin_cross_devs() -> (PlanarDevelopment, PlanarDevelopment, QuasigeodesicLoop) {
        let p = fixtures::unit_cube();
        let q = loop_from_vertices(&p, &[0, 1, 2, 3]).unwrap();
        let (l, r) = split_halves(&p, &q).unwrap();
        let order_left_first =
            |a: Half, b: Half| if a.side == Side::Left { (a, b) } else { (b, a) };
        let (left, right) = order_left_first(l, r);
        let cuts_l = cut_all(&left, &q).unwrap();
        let disk_l = cut_half(&left, &cuts_l).unwrap();
        let dev_l = develop_half(&disk_l, false).unwrap();
        let cuts_r = cut_all(&right, &q).unwrap();
        let disk_r = cut_half(&right, &cuts_r).unwrap();
        let dev_r = develop_half(&disk_r, false).unwrap();
        (dev_l, dev_r, q)
    }

    #[test]
    fn latin_cross_halves_develop_simply() {
        let (a, b, _q) = latin_cross_devs();
        let (dev_big, dev_small) = if a.area > b.area { (&a, &b) } else { (&b, &a) };
        assert_relative_eq!(dev_big.area, 5.0, epsilon = 1e-9);
        assert_relative_eq!(dev_small.area, 1.0, epsilon = 1e-9);
        assert!(certify_simple_polygon(&dev_big.polygon()).is_ok());
        assert!(certify_simple_polygon(&dev_small.polygon()).is_ok());
        check_slit_angles(dev_big).unwrap();
        let slit_ends = dev_big
            .vert_info
            .iter()
            .filter(|vi| vi.cut_vertex.is_some())
            .count();
        assert_eq!(slit_ends, 4);
    }

    #[test]
    fn latin_cross_joins_to_area_six() {
        let (dev1, dev2, q) = latin_cross_devs();
        let tol = 2e-9;
        let (s, _report) = select_supporting_segment(&q, &dev1, &dev2, tol).unwrap();
        let unf = join_halves(&dev1, &dev2, &s, tol).unwrap();
        assert_relative_eq!(unf.area, 6.0, epsilon = 1e-8);
        assert_eq!(unf.polygon.len(), 14, "Latin cross outline");
        for i in 0..unf.polygon.len() {
            let a = unf.polygon[i];
            let b = unf.polygon[(i + 1) % unf.polygon.len()];
            assert_relative_eq!(a.dist(b), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn with_triangles_development_of_two_pi_half_is_convex() {
        let p = fixtures::unit_cube();
        let q = loop_from_vertices(&p, &[1, 3, 4]).unwrap();
        let (l, r) = split_halves(&p, &q).unwrap();
        let (small, big) = if l.interior.len() == 1 {
            (l, r)
        } else {
            (r, l)
        };
        let cuts = cut_all(&big, &q).unwrap();
        let disk = cut_half(&big, &cuts).unwrap();
        let dev = develop_half(&disk, true).unwrap();
        check_convex_development(&dev).unwrap();
        assert!(certify_simple_polygon(&dev.polygon()).is_ok());
        assert_eq!(dev.triangle_specs.iter().filter(|t| t.inserted).count(), 4);
        for spec in &dev.triangle_specs {
            assert_relative_eq!(spec.base_angle, PI / 4.0, epsilon = 1e-12);
        }
        let bare = develop_half(&disk, false).unwrap();
        assert!(certify_simple_polygon(&bare.polygon()).is_ok());
        check_slit_angles(&bare).unwrap();

        let cuts_s = cut_all(&small, &q).unwrap();
        let disk_s = cut_half(&small, &cuts_s).unwrap();
        let dev_s = develop_half(&disk_s, true).unwrap();
        check_convex_development(&dev_s).unwrap();
    }
}
