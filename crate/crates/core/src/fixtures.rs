//! Canonical test polyhedra and the deterministic random-polytope generator
//! used by the property suites.

use crate::geom::Vec3;
use crate::hull::convex_hull_facets;
use crate::mesh::{Polyhedron, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unit cube with quad faces. Vertices 0–3 ring the bottom face (z = 0)
/// counterclockwise from the origin; vertices 4–7 sit directly above them.
pub const CUBE_OFF: &str = "\
OFF
8 6 12
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 3 2 1
4 4 5 6 7
4 0 1 5 4
4 1 2 6 5
4 2 3 7 6
4 3 0 4 7
";

/// Regular tetrahedron on alternating cube corners (edge length 2√2).
pub const TETRA_OBJ: &str = "\
# regular tetrahedron
v 1 1 1
v 1 -1 -1
v -1 1 -1
v -1 -1 1
f 1 2 3
f 1 3 4
f 1 4 2
f 2 4 3
";

/// Tetrahedron with three mutually perpendicular unit edges at vertex 0.
/// ω(v0) = π/2; the other three vertices each carry ω = 7π/6.
pub const RIGHT_TETRA_OFF: &str = "\
OFF
4 4 6
0 0 0
1 0 0
0 1 0
0 0 1
3 0 2 1
3 0 1 3
3 0 3 2
3 1 2 3
";

pub fn unit_cube_data() -> (Vec<Vec3>, Vec<Vec<usize>>) {
    let verts = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(1.0, 1.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(1.0, 0.0, 1.0),
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(0.0, 1.0, 1.0),
    ];
    let polys = vec![
        vec![0, 3, 2, 1],
        vec![4, 5, 6, 7],
        vec![0, 1, 5, 4],
        vec![1, 2, 6, 5],
        vec![2, 3, 7, 6],
        vec![3, 0, 4, 7],
    ];
    (verts, polys)
}

pub fn unit_cube() -> Polyhedron {
    let (v, f) = unit_cube_data();
    Polyhedron::from_polygons(v, f, Tolerances::default()).expect("cube fixture")
}

pub fn regular_tetrahedron() -> Polyhedron {
    crate::io::load_polyhedron(TETRA_OBJ, crate::io::MeshFormat::Obj, Tolerances::default())
        .expect("tetrahedron fixture")
}

pub fn right_angle_tetrahedron() -> Polyhedron {
    crate::io::load_polyhedron(
        RIGHT_TETRA_OFF,
        crate::io::MeshFormat::Off,
        Tolerances::default(),
    )
    .expect("right-angle tetrahedron fixture")
}

/// Regular dodecahedron with pentagonal faces, circumradius √3.
pub fn dodecahedron() -> Polyhedron {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let inv = 1.0 / phi;
    let mut verts = Vec::new();
    for &x in &[-1.0, 1.0] {
        for &y in &[-1.0, 1.0] {
            for &z in &[-1.0, 1.0] {
                verts.push(Vec3::new(x, y, z));
            }
        }
    }
    for &a in &[-1.0, 1.0] {
        for &b in &[-1.0, 1.0] {
            verts.push(Vec3::new(0.0, a * inv, b * phi));
            verts.push(Vec3::new(a * inv, b * phi, 0.0));
            verts.push(Vec3::new(a * phi, 0.0, b * inv));
        }
    }
    // Face normals for this vertex layout: cyclic permutations of (±1, 0, ±φ).
    let mut dirs = Vec::new();
    for &a in &[-1.0, 1.0] {
        for &b in &[-1.0, 1.0] {
            dirs.push(Vec3::new(a, 0.0, b * phi));
            dirs.push(Vec3::new(0.0, a * phi, b));
            dirs.push(Vec3::new(a * phi, b, 0.0));
        }
    }
    let mut polys = Vec::new();
    for d in dirs {
        let d = d.normalized();
        let mut scored: Vec<(f64, usize)> = verts
            .iter()
            .enumerate()
            .map(|(i, v)| (v.dot(d), i))
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        assert!(
            scored[0].0 - scored[4].0 < 1e-9,
            "pentagon vertices must tie"
        );
        assert!(scored[4].0 - scored[5].0 > 1e-3, "pentagon must separate");
        let mut ring: Vec<usize> = scored[..5].iter().map(|&(_, i)| i).collect();
        // Order the pentagon counterclockwise as seen from outside.
        let u1 = (verts[ring[0]] - d * verts[ring[0]].dot(d)).normalized();
        let u2 = d.cross(u1);
        ring.sort_by(|&i, &j| {
            let ai = verts[i].dot(u2).atan2(verts[i].dot(u1));
            let aj = verts[j].dot(u2).atan2(verts[j].dot(u1));
            ai.partial_cmp(&aj).unwrap()
        });
        polys.push(ring);
    }
    Polyhedron::from_polygons(verts, polys, Tolerances::default()).expect("dodecahedron fixture")
}

/// Seed (triangle, barycentric, direction angle) whose traced loop on the
/// unit cube closes with a 3/5 interior-vertex split: the loop point sees
/// 3π/2 to one side and π/2 to the other, and the halves enclose curvature
/// 3π/2 and 5π/2.
pub const CUBE_THREE_FIVE_SEED: (usize, [f64; 3], f64) = (0, [0.4, 0.3, 0.3], 0.013);

/// Seed on the right-angle tetrahedron whose traced loop encircles exactly
/// one of the 7π/6-curvature vertices, so the loop point sees 330° toward
/// the big half.
pub const RIGHT_TETRA_CORNER_SEED: (usize, [f64; 3], f64) = (0, [0.4, 0.3, 0.3], 0.007);

/// Resolve a stored seed into a surface point and tangent direction.
pub fn seed_tangent(
    p: &Polyhedron,
    seed: (usize, [f64; 3], f64),
) -> (crate::mesh::SurfacePoint, crate::mesh::TangentDirection) {
    let (face, bary, angle) = seed;
    let sp = p
        .mesh
        .canonicalize(&crate::mesh::SurfacePoint::Face { face, bary });
    let dir = crate::geom::Vec2::new(angle.cos(), angle.sin());
    (sp, crate::mesh::TangentDirection::new(sp, face, dir))
}

/// Deterministic random convex polytope with exactly `n` vertices sampled on
/// the unit sphere. Instances with near-flat vertices, short edges, or tiny
/// faces are resampled so downstream tolerances stay comfortable.
pub fn random_hull(seed: u64, n: usize) -> Polyhedron {
    assert!(n >= 4, "need at least 4 vertices");
    for attempt in 0..64u64 {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9e3779b97f4a7c15)));
        let mut pts = Vec::with_capacity(n);
        while pts.len() < n {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let r = v.norm();
            if !(0.2..=1.0).contains(&r) {
                continue;
            }
            pts.push(v * (1.0 / r));
        }
        let Ok(facets) = convex_hull_facets(&pts) else {
            continue;
        };
        let polys: Vec<Vec<usize>> = facets.iter().map(|f| f.to_vec()).collect();
        let Ok(p) = Polyhedron::from_polygons(pts, polys, Tolerances::default()) else {
            continue;
        };
        if p.curvature.iter().any(|&w| w < 0.03) {
            continue;
        }
        let m = &p.mesh;
        let min_edge = (0..m.n_halfedges())
            .map(|h| m.edge_len(h))
            .fold(f64::INFINITY, f64::min);
        let min_area = (0..m.faces.len())
            .map(|f| m.face_area(f))
            .fold(f64::INFINITY, f64::min);
        if min_edge < 5e-3 || min_area < 1e-5 {
            continue;
        }
        return p;
    }
    panic!("no acceptable random hull for seed {seed}, n={n}");
}
