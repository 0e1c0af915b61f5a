//! Property suites for the structural invariants: canonicalization,
//! convexity validation, trace reversal, development straightness, and
//! Gauss-Bonnet bookkeeping on random polytopes.

use proptest::prelude::*;
use qstar_core::fixtures;
use qstar_core::geodesics::{develop_path, trace_geodesic, StopCondition, VertexPolicy};
use qstar_core::geom::{Vec2, TAU};
use qstar_core::loops::{construct_loop, split_halves, validate_loop, LoopError};
use qstar_core::mesh::{MeshError, Polyhedron, SurfacePoint, TangentDirection, Tolerances};

fn hull_strategy() -> impl Strategy<Value = Polyhedron> {
    (0u64..64, 8usize..24).prop_map(|(seed, n)| fixtures::random_hull(seed, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonicalization_is_idempotent(
        seed in 0u64..32,
        face_pick in 0usize..64,
        b1 in 0.0f64..1.0,
        b2 in 0.0f64..1.0,
    ) {
        let p = fixtures::random_hull(seed, 12);
        let face = face_pick % p.mesh.faces.len();
        let (b1, b2) = if b1 + b2 > 1.0 { (1.0 - b1, 1.0 - b2) } else { (b1, b2) };
        let sp = SurfacePoint::Face { face, bary: [1.0 - b1 - b2, b1, b2] };
        let once = p.mesh.canonicalize(&sp);
        let twice = p.mesh.canonicalize(&once);
        prop_assert_eq!(format!("{once:?}"), format!("{twice:?}"));
        // Canonicalization never moves the point materially.
        let d = p.mesh.position(&sp).dist(p.mesh.position(&once));
        prop_assert!(d <= 4.0 * p.eps().point.max(1e-15) + 1e-12);
    }

    #[test]
    fn random_hulls_validate_and_close_curvature(p in hull_strategy()) {
        prop_assert!((p.total_curvature() - 2.0 * TAU).abs() < 1e-9);
        for he in 0..p.mesh.n_halfedges() {
            let t = p.mesh.twin_of(he).unwrap();
            prop_assert_eq!(p.mesh.twin_of(t), Some(he));
            prop_assert_eq!(p.mesh.next(p.mesh.next(p.mesh.next(he))), he);
        }
    }

    #[test]
    fn reflected_vertex_is_rejected(seed in 0u64..32) {
        let p = fixtures::random_hull(seed, 10);
        let mut verts = p.mesh.verts.clone();
        // Reflect vertex 0 through the centroid plane of its neighbors.
        let fan = p.mesh.fan(0);
        let mut centroid = qstar_core::geom::Vec3::ZERO;
        for &he in &fan.hes {
            centroid = centroid + verts[p.mesh.head(he)];
        }
        let centroid = centroid * (1.0 / fan.hes.len() as f64);
        verts[0] = centroid + (centroid - verts[0]);
        let polys: Vec<Vec<usize>> = p.mesh.faces.iter().map(|f| f.to_vec()).collect();
        let r = Polyhedron::from_polygons(verts, polys, Tolerances::default());
        let rejected = matches!(r, Err(MeshError::NotConvex { .. }));
        prop_assert!(rejected);
    }

    #[test]
    fn traces_reverse_and_develop_straight(
        seed in 0u64..24,
        face_pick in 0usize..64,
        angle in 0.0f64..TAU,
        length in 0.3f64..3.0,
    ) {
        let p = fixtures::random_hull(seed, 14);
        let face = face_pick % p.mesh.faces.len();
        let frame = &p.mesh.frames[face];
        let c = (frame.p[0] + frame.p[1] + frame.p[2]) / 3.0;
        let sp = p.mesh.point_from_face_pos(face, c);
        prop_assume!(!sp.is_vertex());
        let td = TangentDirection::new(sp, face, Vec2::new(angle.cos(), angle.sin()));
        let fwd = trace_geodesic(&p.mesh, &td, StopCondition::MaxLength(length), VertexPolicy::Bisector);
        let fwd = match fwd { Ok(f) => f, Err(_) => return Ok(()) };
        prop_assume!(fwd.passages.is_empty());

        // Reversal reproduces the corner sequence.
        let last = fwd.segs.last().unwrap();
        let back = TangentDirection::new(*fwd.end(), last.face, -last.dir());
        let rev = trace_geodesic(&p.mesh, &back, StopCondition::MaxLength(fwd.length), VertexPolicy::Bisector).unwrap();
        prop_assert_eq!(rev.points.len(), fwd.points.len());
        for (a, b) in rev.points.iter().zip(fwd.points.iter().rev()) {
            prop_assert!(p.mesh.position(a).dist(p.mesh.position(b)) < 1e-9);
        }

        // The developed strip renders the path as one straight segment.
        let pts = develop_path(&p.mesh, &fwd).unwrap();
        let a = *pts.first().unwrap();
        let b = *pts.last().unwrap();
        let chord = (b - a).normalized();
        for qpt in &pts {
            prop_assert!((*qpt - a).cross(chord).abs() < 1e-9 * fwd.length.max(1.0));
        }
    }

    #[test]
    fn loops_satisfy_gauss_bonnet(seed in 0u64..24, angle in 0.0f64..TAU) {
        let p = fixtures::random_hull(seed, 12);
        let face = (seed as usize) % p.mesh.faces.len();
        let frame = &p.mesh.frames[face];
        let c = (frame.p[0] + frame.p[1] + frame.p[2]) / 3.0;
        let sp = p.mesh.point_from_face_pos(face, c);
        prop_assume!(!sp.is_vertex());
        let td = TangentDirection::new(sp, face, Vec2::new(angle.cos(), angle.sin()));
        let q = match construct_loop(&p, &sp, &td, VertexPolicy::Bisector, 80.0) {
            Ok(q) => q,
            Err(LoopError::NoIntersection { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        prop_assert!(validate_loop(&p, &q).passes);
        let (l, r) = match split_halves(&p, &q) {
            Ok(h) => h,
            Err(LoopError::SubdivisionFailure(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        prop_assert!((l.turn + l.enclosed_curvature - TAU).abs() <= 1e-8);
        prop_assert!((r.turn + r.enclosed_curvature - TAU).abs() <= 1e-8);
        let total = l.enclosed_curvature + r.enclosed_curvature
            + q.corners.iter().filter_map(|c| match c.point {
                SurfacePoint::Vertex(v) => Some(p.curvature[v]),
                _ => None,
            }).sum::<f64>();
        prop_assert!((total - 2.0 * TAU).abs() <= 1e-8, "total curvature {}", total);
    }
}
