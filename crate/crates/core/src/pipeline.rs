//! End-to-end driver: loop resolution, splitting, shortest-path cuts, lemma
//! verification, development, joining, certification, and the serialized
//! artifacts (JSON reports and the unfolding schema).

use crate::cuts::{cut_all, verify_cut_lemmas, CutError, LemmaReport, VertexCut};
use crate::geodesics::VertexPolicy;
use crate::geom::{Vec2, PI, TAU};
use crate::loops::{
    construct_loop, loop_from_vertices, split_halves, validate_loop, Half, LoopError,
    LoopValidation, QuasigeodesicLoop, Side,
};
use crate::mesh::{MeshError, Polyhedron, SurfacePoint, TangentDirection};
use crate::unfolding::{
    check_convex_development, check_slit_angles, cut_half, develop_half, join_halves,
    select_supporting_segment, PlanarDevelopment, SupportReport, UnfoldError, Unfolding,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("loop failed validation ({} corner(s) violate the angle conditions, simple: {})",
        .0.corners.iter().filter(|c| !c.ok).count(), .0.simple)]
    LoopInvalid(LoopValidation),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error("cut lemmas violated on the {0:?} half: {1:?}")]
    LemmaViolation(Side, LemmaReport),
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
    #[error("final area {got} differs from surface area {expect}")]
    AreaMismatch { got: f64, expect: f64 },
}

/// How to obtain the loop.
#[derive(Clone, Debug)]
pub enum LoopSpec {
    Seed {
        point: SurfacePoint,
        direction: TangentDirection,
        max_length: Option<f64>,
    },
    Vertices(Vec<usize>),
}

#[derive(Clone, Copy, Debug)]
pub struct UnfoldOptions {
    pub policy: VertexPolicy,
    pub support_tol_abs: Option<f64>,
}

impl Default for UnfoldOptions {
    fn default() -> Self {
        UnfoldOptions {
            policy: VertexPolicy::Bisector,
            support_tol_abs: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Stats {
    pub n: usize,
    pub q: usize,
    pub m: usize,
    /// Kept at zero in serialized artifacts so identical runs are
    /// byte-identical; wall time is reported separately.
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HalfSummary {
    pub side: Side,
    pub interior_vertices: Vec<usize>,
    pub enclosed_curvature: f64,
    pub turn: f64,
    pub gauss_bonnet_defect: f64,
    pub beta_toward: f64,
    pub convexity_checked: bool,
    pub x_image_count: usize,
    pub x_angle_sum: f64,
}

/// Everything the pipeline produced, for reporting and export.
pub struct UnfoldRun {
    pub q: QuasigeodesicLoop,
    pub validation: LoopValidation,
    pub left: Half,
    pub right: Half,
    pub cuts_left: Vec<VertexCut>,
    pub cuts_right: Vec<VertexCut>,
    pub lemmas_left: LemmaReport,
    pub lemmas_right: LemmaReport,
    pub dev_left: PlanarDevelopment,
    pub dev_right: PlanarDevelopment,
    pub half_summaries: [HalfSummary; 2],
    pub support: SupportReport,
    pub unfolding: Unfolding,
    pub stats: Stats,
    pub wall_ms: f64,
}

/// Build the loop described by `spec`.
pub fn resolve_loop(
    p: &Polyhedron,
    spec: &LoopSpec,
    policy: VertexPolicy,
) -> Result<QuasigeodesicLoop, LoopError> {
    match spec {
        LoopSpec::Seed {
            point,
            direction,
            max_length,
        } => {
            let max = max_length.unwrap_or(50.0 * p.eps().diag);
            construct_loop(p, point, direction, policy, max)
        }
        LoopSpec::Vertices(ids) => loop_from_vertices(p, ids),
    }
}

/// Run the full star-unfolding pipeline.
pub fn run_unfold(
    p: &Polyhedron,
    spec: &LoopSpec,
    opts: &UnfoldOptions,
) -> Result<UnfoldRun, PipelineError> {
    let t0 = std::time::Instant::now();
    let mut q = resolve_loop(p, spec, opts.policy)?;
    let mut validation = validate_loop(p, &q);
    if !validation.passes {
        return Err(PipelineError::LoopInvalid(validation));
    }

    // A subdivision sliver means the loop grazes a vertex; re-snap once and
    // retry before giving up.
    let (left, right) = match split_halves(p, &q) {
        Ok(halves) => halves,
        Err(LoopError::SubdivisionFailure(_)) => {
            q = crate::loops::resnap_loop(p, &q, 1e5)?;
            validation = validate_loop(p, &q);
            if !validation.passes {
                return Err(PipelineError::LoopInvalid(validation));
            }
            split_halves(p, &q)?
        }
        Err(e) => return Err(e.into()),
    };
    let cuts_left = cut_all(&left, &q)?;
    let cuts_right = cut_all(&right, &q)?;
    let lemmas_left = verify_cut_lemmas(&left, &q, &cuts_left);
    if !lemmas_left.passes {
        return Err(PipelineError::LemmaViolation(Side::Left, lemmas_left));
    }
    let lemmas_right = verify_cut_lemmas(&right, &q, &cuts_right);
    if !lemmas_right.passes {
        return Err(PipelineError::LemmaViolation(Side::Right, lemmas_right));
    }

    let disk_left = cut_half(&left, &cuts_left)?;
    let disk_right = cut_half(&right, &cuts_right)?;
    let dev_left = develop_half(&disk_left, false)?;
    let dev_right = develop_half(&disk_right, false)?;
    check_slit_angles(&dev_left)?;
    check_slit_angles(&dev_right)?;

    // Flattening verification layer: with curvature triangles inserted, the
    // development of each half with β ≤ π toward it must be convex.
    let x = &q.corners[q.loop_point];
    let eps_angle = p.eps().angle;
    let mut summaries = Vec::with_capacity(2);
    for (half, disk, dev, beta_toward) in [
        (&left, &disk_left, &dev_left, x.left),
        (&right, &disk_right, &dev_right, x.right),
    ] {
        let convex_expected = beta_toward <= PI + eps_angle;
        if convex_expected {
            let dev_tri = develop_half(disk, true)?;
            check_convex_development(&dev_tri)?;
        }
        summaries.push(HalfSummary {
            side: half.side,
            interior_vertices: half.interior.iter().map(|&(_, v, _)| v).collect(),
            enclosed_curvature: half.enclosed_curvature,
            turn: half.turn,
            gauss_bonnet_defect: half.turn + half.enclosed_curvature - TAU,
            beta_toward,
            convexity_checked: convex_expected,
            x_image_count: dev.x_image_count(),
            x_angle_sum: dev.x_angle_sum(),
        });
    }

    let support_tol = opts
        .support_tol_abs
        .unwrap_or_else(|| 1e-9 * p.eps().diag.max(1.0));
    let (s, support) = select_supporting_segment(&q, &dev_left, &dev_right, support_tol)?;
    let unfolding = join_halves(&dev_left, &dev_right, &s, support_tol)?;

    let surface_area = p.mesh.total_area();
    if ((unfolding.area - surface_area) / surface_area).abs() > 1e-8 {
        return Err(PipelineError::AreaMismatch {
            got: unfolding.area,
            expect: surface_area,
        });
    }

    let qn = q.crossed_faces(p);
    let stats = Stats {
        n: p.n(),
        q: qn,
        m: p.n() + qn,
        runtime_ms: 0,
    };
    Ok(UnfoldRun {
        q,
        validation,
        left,
        right,
        cuts_left,
        cuts_right,
        lemmas_left,
        lemmas_right,
        dev_left,
        dev_right,
        half_summaries: [summaries.remove(0), summaries.remove(0)],
        support,
        unfolding,
        stats,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
    })
}

// --- serialization ---

#[derive(Serialize)]
struct LocusJson {
    locus_kind: &'static str,
    indices: Vec<usize>,
    parameters: Vec<f64>,
}

fn locus_json(sp: &SurfacePoint) -> LocusJson {
    match *sp {
        SurfacePoint::Vertex(v) => LocusJson {
            locus_kind: "vertex",
            indices: vec![v],
            parameters: vec![],
        },
        SurfacePoint::Edge { he, t } => LocusJson {
            locus_kind: "edge",
            indices: vec![he],
            parameters: vec![t],
        },
        SurfacePoint::Face { face, bary } => LocusJson {
            locus_kind: "face",
            indices: vec![face],
            parameters: bary.to_vec(),
        },
    }
}

#[derive(Serialize)]
struct LoopCornerJson {
    #[serde(flatten)]
    locus: LocusJson,
    l: f64,
    r: f64,
}

#[derive(Serialize)]
struct LoopJson<'a> {
    corners: Vec<LoopCornerJson>,
    loop_point: usize,
    total_length: f64,
    turn_left: f64,
    turn_right: f64,
    meta: &'a crate::loops::LoopMeta,
}

/// Loop serialization: corner records plus loop-point index and construction
/// metadata.
pub fn loop_to_json(q: &QuasigeodesicLoop) -> serde_json::Value {
    let corners = q
        .corners
        .iter()
        .map(|c| LoopCornerJson {
            locus: locus_json(&c.point),
            l: c.left,
            r: c.right,
        })
        .collect();
    serde_json::to_value(LoopJson {
        corners,
        loop_point: q.loop_point,
        total_length: q.total_len,
        turn_left: q.turn_left,
        turn_right: q.turn_right,
        meta: &q.meta,
    })
    .expect("loop serializes")
}

#[derive(Serialize)]
struct CutJson {
    vertex: usize,
    projection: LocusJson,
    length: f64,
    alpha: [f64; 2],
    tie_count: usize,
    path: Vec<crate::geom::Vec3>,
}

/// Cut serialization: one record per vertex cut.
pub fn cuts_to_json(half: &Half, cuts: &[VertexCut]) -> serde_json::Value {
    let records: Vec<CutJson> = cuts
        .iter()
        .map(|c| CutJson {
            vertex: c.vertex,
            projection: locus_json(&c.projection),
            length: c.length,
            alpha: [c.alpha.0, c.alpha.1],
            tie_count: c.tie_count,
            path: c.points.iter().map(|sp| half.mesh.position(sp)).collect(),
        })
        .collect();
    serde_json::to_value(records).expect("cuts serialize")
}

#[derive(Serialize)]
struct PlacementJson {
    face_id: usize,
    placement: [[f64; 3]; 2],
}

#[derive(Serialize)]
struct HalfFacesJson {
    faces: Vec<PlacementJson>,
}

#[derive(Serialize)]
struct SegmentEndpointsJson {
    from: Vec2,
    to: Vec2,
}

#[derive(Serialize)]
struct UnfoldingJson<'a> {
    polygon: &'a [Vec2],
    s: SegmentEndpointsJson,
    markers: &'a [crate::unfolding::Marker],
    halves: [HalfFacesJson; 2],
    stats: Stats,
}

fn placements_json(dev: &PlanarDevelopment) -> HalfFacesJson {
    let faces = dev
        .placements
        .iter()
        .zip(dev.face_parent.iter())
        .map(|(iso, &face_id)| PlacementJson {
            face_id,
            placement: [[iso.c, -iso.s, iso.t.x], [iso.s, iso.c, iso.t.y]],
        })
        .collect();
    HalfFacesJson { faces }
}

/// The unfolding artifact: polygon, supporting segment, markers, per-face
/// placements of both halves, and combinatorial stats.
pub fn unfolding_to_json(run: &UnfoldRun) -> serde_json::Value {
    let u = &run.unfolding;
    serde_json::to_value(UnfoldingJson {
        polygon: &u.polygon,
        s: SegmentEndpointsJson {
            from: u.s_from,
            to: u.s_to,
        },
        markers: &u.markers,
        halves: [placements_json(&u.dev1), placements_json(&u.dev2)],
        stats: run.stats,
    })
    .expect("unfolding serializes")
}

#[derive(Serialize)]
struct ReportJson<'a> {
    validation: &'a LoopValidation,
    halves: &'a [HalfSummary; 2],
    lemmas: [&'a LemmaReport; 2],
    support: &'a SupportReport,
    certificate_edges: usize,
    area: f64,
    x_image_angle_sum: f64,
    beta: f64,
}

/// Machine-readable run report (everything the human summary prints).
pub fn report_to_json(run: &UnfoldRun) -> serde_json::Value {
    serde_json::to_value(ReportJson {
        validation: &run.validation,
        halves: &run.half_summaries,
        lemmas: [&run.lemmas_left, &run.lemmas_right],
        support: &run.support,
        certificate_edges: run.unfolding.certificate.edges,
        area: run.unfolding.area,
        x_image_angle_sum: run.unfolding.x_image_angle_sum,
        beta: run.q.beta(),
    })
    .expect("report serializes")
}
