use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use qstar_core::cuts::{cut_all, Oracle};
use qstar_core::fixtures;
use qstar_core::geom::{Vec2, Vec3};
use qstar_core::loops::split_halves;
use qstar_core::mesh::TangentDirection;
use qstar_core::pipeline::{resolve_loop, run_unfold, LoopSpec, UnfoldOptions};
use std::hint::black_box;

fn latin_cross(c: &mut Criterion) {
    let p = fixtures::unit_cube();
    let spec = LoopSpec::Vertices(vec![0, 1, 2, 3]);
    c.bench_function("unfold_latin_cross", |b| {
        b.iter(|| run_unfold(black_box(&p), &spec, &UnfoldOptions::default()).unwrap())
    });
}

fn traced_loop_random_hull(c: &mut Criterion) {
    let p = fixtures::random_hull(5, 24);
    let f = 0;
    let frame = &p.mesh.frames[f];
    let centroid = (frame.p[0] + frame.p[1] + frame.p[2]) / 3.0;
    let sp = p.mesh.point_from_face_pos(f, centroid);
    let td = TangentDirection::new(sp, f, Vec2::new(0.8, 0.6));
    let spec = LoopSpec::Seed {
        point: sp,
        direction: td,
        max_length: None,
    };
    c.bench_function("unfold_random_hull_24", |b| {
        b.iter(|| run_unfold(black_box(&p), &spec, &UnfoldOptions::default()).unwrap())
    });
}

fn shortest_paths_girth(c: &mut Criterion) {
    let p = fixtures::unit_cube();
    let (face, sp) = p.locate(2, Vec3::new(0.4, 0.0, 0.5)).unwrap();
    let dir = p.mesh.frames[face]
        .project_dir(Vec3::new(1.0, 0.0, 0.0))
        .normalized();
    let td = TangentDirection::new(sp, face, dir);
    let spec = LoopSpec::Seed {
        point: sp,
        direction: td,
        max_length: Some(50.0),
    };
    let q = resolve_loop(&p, &spec, qstar_core::geodesics::VertexPolicy::Bisector).unwrap();
    let (l, _r) = split_halves(&p, &q).unwrap();
    c.bench_function("exact_cuts_girth_half", |b| {
        b.iter_batched(
            || (),
            |_| cut_all(black_box(&l), &q).unwrap(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("oracle_k16_cube", |b| {
        b.iter(|| {
            let oracle = Oracle::new(black_box(&p), &q, 16);
            (0..p.n()).map(|v| oracle.distance(v)).sum::<f64>()
        })
    });
}

criterion_group!(
    benches,
    latin_cross,
    traced_loop_random_hull,
    shortest_paths_girth
);
criterion_main!(benches);
