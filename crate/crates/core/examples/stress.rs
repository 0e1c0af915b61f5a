//! Randomized robustness sweep: unfold many random convex polytopes from
//! random seeds and report any pipeline failure.
//!
//! Knobs via environment: STRESS_COUNT (default 500), STRESS_MIN_N (8),
//! STRESS_MAX_N (40).

use qstar_core::fixtures;
use qstar_core::geodesics::VertexPolicy;
use qstar_core::geom::{Vec2, TAU};
use qstar_core::mesh::TangentDirection;
use qstar_core::pipeline::{run_unfold, LoopSpec, PipelineError, UnfoldOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn env_usize(name: &str, default: usize) -> usize {
    std::env::var(name)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

fn main() {
    let count = env_usize("STRESS_COUNT", 500) as u64;
    let min_n = env_usize("STRESS_MIN_N", 8);
    let max_n = env_usize("STRESS_MAX_N", 40).max(min_n);
    let t0 = std::time::Instant::now();
    let mut ok = 0;
    let mut noloop = 0;
    let mut failures: Vec<(u64, String)> = Vec::new();
    for seed in 0..count {
        let n = min_n + (seed as usize * 11) % (max_n - min_n + 1);
        let p = fixtures::random_hull(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(77777));
        let f = rng.gen_range(0..p.mesh.faces.len());
        let frame = &p.mesh.frames[f];
        let c = (frame.p[0] + frame.p[1] + frame.p[2]) / 3.0;
        let sp = p.mesh.point_from_face_pos(f, c);
        if sp.is_vertex() {
            continue;
        }
        let ang: f64 = rng.gen_range(0.0..TAU);
        let td = TangentDirection::new(sp, f, Vec2::new(ang.cos(), ang.sin()));
        let policy = if seed % 3 == 0 {
            VertexPolicy::LeftmostAdmissible
        } else {
            VertexPolicy::Bisector
        };
        let spec = LoopSpec::Seed {
            point: sp,
            direction: td,
            max_length: None,
        };
        match run_unfold(
            &p,
            &spec,
            &UnfoldOptions {
                policy,
                ..Default::default()
            },
        ) {
            Ok(run) => {
                let surface = p.mesh.total_area();
                let rel = ((run.unfolding.area - surface) / surface).abs();
                if rel > 1e-6 {
                    failures.push((seed, format!("area off by {rel:.2e}")));
                } else {
                    ok += 1;
                }
            }
            Err(PipelineError::Loop(qstar_core::loops::LoopError::NoIntersection { .. })) => {
                noloop += 1;
            }
            Err(e) => failures.push((seed, e.to_string())),
        }
    }
    println!("ok={ok} no-loop={noloop} failures={}", failures.len());
    for (s, e) in failures.iter().take(25) {
        println!("  seed {s}: {e}");
    }
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
    if !failures.is_empty() {
        std::process::exit(1);
    }
}
