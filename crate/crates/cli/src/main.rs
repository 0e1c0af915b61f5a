//! `qstar`: validate convex polyhedra, trace quasigeodesic loops, compare
//! exact shortest paths against the Dijkstra oracle, and produce star
//! unfoldings as JSON and SVG.
//!
//! Exit codes: 0 success, 1 validation failure, 2 pipeline invariant
//! violation (witness written), 3 I/O error.

use clap::{Args, Parser, Subcommand};
use qstar_core::cuts::{cut_all, Oracle};
use qstar_core::geodesics::VertexPolicy;
use qstar_core::geom::{Vec2, TAU};
use qstar_core::io::{load_polyhedron, MeshFormat};
use qstar_core::loops::{split_halves, LoopError};
use qstar_core::mesh::{Polyhedron, SurfacePoint, TangentDirection, Tolerances};
use qstar_core::pipeline::{
    cuts_to_json, loop_to_json, report_to_json, resolve_loop, run_unfold, unfolding_to_json,
    LoopSpec, PipelineError, UnfoldOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qstar",
    about = "Star unfoldings of convex polyhedra via quasigeodesic loops"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a mesh: manifoldness, convexity, curvature bookkeeping.
    Validate(CommonArgs),
    /// Construct a quasigeodesic loop and report it without unfolding.
    Trace(TraceArgs),
    /// Run the full unfolding pipeline and emit JSON/SVG artifacts.
    Unfold(UnfoldArgs),
    /// Compare exact shortest-path lengths against the Steiner-graph oracle.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Input mesh path (OFF or OBJ).
    #[arg(long)]
    input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<String>,
    /// Write the machine-readable result here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Angle tolerance override (radians).
    #[arg(long)]
    tol_angle: Option<f64>,
    /// Point-snapping tolerance override (relative to the bounding-box diagonal).
    #[arg(long)]
    tol_point: Option<f64>,
}

#[derive(Args)]
struct SeedArgs {
    /// Seed triangle index, or omit for the largest face.
    #[arg(long)]
    face: Option<usize>,
    /// Barycentric coordinates "a,b,c" of the seed point.
    #[arg(long)]
    bary: Option<String>,
    /// Direction angle in the seed face's frame (radians); omit for RNG.
    #[arg(long)]
    dir: Option<f64>,
    /// RNG seed for the automatic direction.
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Vertex continuation policy: bisector | leftmost.
    #[arg(long, default_value = "bisector")]
    policy: String,
    /// Trace budget per branch (length units); default 50x diagonal.
    #[arg(long)]
    max_length: Option<f64>,
    /// Build the loop through these vertices instead of tracing.
    #[arg(long, value_delimiter = ',')]
    loop_vertices: Option<Vec<usize>>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    seed: SeedArgs,
}

#[derive(Args)]
struct UnfoldArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Write an SVG rendering here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    seed: SeedArgs,
    /// Subdivision count for the Steiner graph.
    #[arg(long, default_value_t = 64)]
    oracle_k: usize,
}

enum CmdError {
    Validation(String),
    Pipeline(String),
    Io(String),
}

impl CmdError {
    fn exit(&self) -> ExitCode {
        match self {
            CmdError::Validation(_) => ExitCode::from(1),
            CmdError::Pipeline(_) => ExitCode::from(2),
            CmdError::Io(_) => ExitCode::from(3),
        }
    }
    fn message(&self) -> &str {
        match self {
            CmdError::Validation(m) | CmdError::Pipeline(m) | CmdError::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QSTAR_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Trace(args) => cmd_trace(&args),
        Command::Unfold(args) => cmd_unfold(&args),
        Command::Oracle(args) => cmd_oracle(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit()
        }
    }
}

fn tolerances(common: &CommonArgs) -> Tolerances {
    let mut tol = Tolerances::default();
    if let Some(a) = common.tol_angle {
        tol.angle = a;
    }
    if let Some(p) = common.tol_point {
        tol.point_rel = p;
    }
    tol
}

fn load(common: &CommonArgs) -> Result<Polyhedron, CmdError> {
    let format = match &common.format {
        Some(f) => match f.to_ascii_lowercase().as_str() {
            "off" => MeshFormat::Off,
            "obj" => MeshFormat::Obj,
            other => return Err(CmdError::Io(format!("unknown format `{other}`"))),
        },
        None => MeshFormat::from_path(&common.input.to_string_lossy())
            .ok_or_else(|| CmdError::Io("cannot infer format from extension".into()))?,
    };
    let data = std::fs::read_to_string(&common.input)
        .map_err(|e| CmdError::Io(format!("{}: {e}", common.input.display())))?;
    load_polyhedron(&data, format, tolerances(common))
        .map_err(|e| CmdError::Validation(e.to_string()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CmdError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CmdError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CmdError::Io(format!("{}: {e}", path.display())))
}

fn sibling_path(json: &Path, suffix: &str) -> PathBuf {
    let mut os = json.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}

fn report_path(json: &Path) -> PathBuf {
    sibling_path(json, ".report.json")
}

fn policy_of(seed: &SeedArgs) -> Result<VertexPolicy, CmdError> {
    match seed.policy.as_str() {
        "bisector" => Ok(VertexPolicy::Bisector),
        "leftmost" => Ok(VertexPolicy::LeftmostAdmissible),
        other => Err(CmdError::Io(format!("unknown policy `{other}`"))),
    }
}

fn resolve_spec(p: &Polyhedron, seed: &SeedArgs) -> Result<LoopSpec, CmdError> {
    if let Some(ids) = &seed.loop_vertices {
        return Ok(LoopSpec::Vertices(ids.clone()));
    }
    let face = match seed.face {
        Some(f) => {
            if f >= p.mesh.faces.len() {
                return Err(CmdError::Validation(format!(
                    "face {f} out of range ({} faces)",
                    p.mesh.faces.len()
                )));
            }
            f
        }
        None => (0..p.mesh.faces.len())
            .max_by(|&a, &b| {
                p.mesh
                    .face_area(a)
                    .partial_cmp(&p.mesh.face_area(b))
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .expect("nonempty mesh"),
    };
    let bary = match &seed.bary {
        Some(text) => {
            let parts: Vec<f64> = text
                .split(',')
                .map(|t| t.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|e| CmdError::Io(format!("bad --bary: {e}")))?;
            if parts.len() != 3 || parts.iter().any(|&b| b <= 0.0) {
                return Err(CmdError::Validation(
                    "--bary wants three positive coordinates".into(),
                ));
            }
            let s: f64 = parts.iter().sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(CmdError::Validation("--bary must sum to 1".into()));
            }
            [parts[0] / s, parts[1] / s, parts[2] / s]
        }
        None => [1.0 / 3.0; 3],
    };
    let angle = match seed.dir {
        Some(a) => a,
        None => ChaCha8Rng::seed_from_u64(seed.rng_seed).gen_range(0.0..TAU),
    };
    let sp = p.mesh.canonicalize(&SurfacePoint::Face { face, bary });
    if sp.is_vertex() {
        return Err(CmdError::Validation("seed point snaps to a vertex".into()));
    }
    let td = TangentDirection::new(sp, face, Vec2::new(angle.cos(), angle.sin()));
    Ok(LoopSpec::Seed {
        point: sp,
        direction: td,
        max_length: seed.max_length,
    })
}

fn cmd_validate(args: &CommonArgs) -> Result<(), CmdError> {
    let p = load(args)?;
    println!("vertices: {}", p.n());
    println!(
        "triangles: {} (from {} input faces)",
        p.mesh.faces.len(),
        p.input_polys.len()
    );
    println!("surface area: {:.12}", p.mesh.total_area());
    println!("vertex curvature table (radians):");
    for v in 0..p.n() {
        println!("  v{v:<4} ω = {:.12}", p.curvature[v]);
    }
    let total = p.total_curvature();
    println!("total curvature: {total:.12} (4π = {:.12})", 2.0 * TAU);
    if let Some(path) = &args.json {
        let value = serde_json::json!({
            "vertices": p.n(),
            "triangles": p.mesh.faces.len(),
            "input_faces": p.input_polys.len(),
            "surface_area": p.mesh.total_area(),
            "curvature": p.curvature,
            "total_curvature": total,
        });
        write_json(path, &value)?;
    }
    Ok(())
}

fn cmd_trace(args: &TraceArgs) -> Result<(), CmdError> {
    let p = load(&args.common)?;
    let spec = resolve_spec(&p, &args.seed)?;
    let policy = policy_of(&args.seed)?;
    match resolve_loop(&p, &spec, policy) {
        Ok(q) => {
            let val = qstar_core::loops::validate_loop(&p, &q);
            for c in &val.corners {
                log::debug!(
                    "corner {}: {:?} L = {:.9} R = {:.9} ok = {}",
                    c.index,
                    c.locus,
                    c.left,
                    c.right,
                    c.ok
                );
            }
            println!(
                "loop: {} corners, length {:.9}, loop point #{}",
                q.corners.len(),
                q.total_len,
                q.loop_point
            );
            println!(
                "angles at x: L = {:.9}, R = {:.9} (β = {:.9})",
                q.corners[q.loop_point].left,
                q.corners[q.loop_point].right,
                q.beta()
            );
            println!("turn: left {:.9}, right {:.9}", q.turn_left, q.turn_right);
            println!(
                "quasigeodesic validation: {}",
                if val.passes { "pass" } else { "FAIL" }
            );
            if let Some(path) = &args.common.json {
                write_json(path, &loop_to_json(&q))?;
            }
            if !val.passes {
                return Err(CmdError::Pipeline("loop fails validation".into()));
            }
            Ok(())
        }
        Err(LoopError::NoIntersection { searched }) => {
            println!(
                "no self-intersection within length budget {searched:.3}; \
                 no quasigeodesic loop from this seed"
            );
            if let Some(path) = &args.common.json {
                let value = serde_json::json!({ "no_intersection": true, "searched": searched });
                write_json(path, &value)?;
            }
            Ok(())
        }
        Err(e) => Err(CmdError::Validation(e.to_string())),
    }
}

fn cmd_unfold(args: &UnfoldArgs) -> Result<(), CmdError> {
    let p = load(&args.common)?;
    let spec = resolve_spec(&p, &args.seed)?;
    let policy = policy_of(&args.seed)?;
    let opts = UnfoldOptions {
        policy,
        ..Default::default()
    };
    let run = match run_unfold(&p, &spec, &opts) {
        Ok(run) => run,
        Err(
            e @ (PipelineError::Mesh(_) | PipelineError::Loop(_) | PipelineError::LoopInvalid(_)),
        ) => {
            return Err(CmdError::Validation(e.to_string()));
        }
        Err(e) => {
            // Pipeline invariant violation: write a witness artifact.
            let witness = serde_json::json!({ "error": e.to_string() });
            let path = args
                .common
                .json
                .clone()
                .unwrap_or_else(|| PathBuf::from("witness.json"));
            write_json(&path, &witness)?;
            eprintln!("witness written to {}", path.display());
            return Err(CmdError::Pipeline(e.to_string()));
        }
    };

    println!(
        "stats: n = {}, q = {}, m = {}  (runtime {:.1} ms)",
        run.stats.n, run.stats.q, run.stats.m, run.wall_ms
    );
    println!(
        "loop: {} corners, length {:.9}, β = {:.9}",
        run.q.corners.len(),
        run.q.total_len,
        run.q.beta()
    );
    for h in &run.half_summaries {
        println!(
            "{:?} half: {} interior vertices, ω_Q = {:.9}, τ_Q = {:.9}, Gauss-Bonnet defect {:.2e}{}",
            h.side,
            h.interior_vertices.len(),
            h.enclosed_curvature,
            h.turn,
            h.gauss_bonnet_defect,
            if h.convexity_checked { ", convex flattening verified" } else { "" }
        );
    }
    for (side, report) in [("left", &run.lemmas_left), ("right", &run.lemmas_right)] {
        println!(
            "{side} cuts: {} paths, arrival angles ok, pairwise disjoint: {}",
            report.alpha.len(),
            report.intersecting_pairs.is_empty()
        );
    }
    for (i, cand) in run.support.candidates.iter().enumerate() {
        log::debug!(
            "candidate {i}: arc [{:.9}, {:.9}] {:?}",
            cand.arc_from,
            cand.arc_to,
            cand.status
        );
    }
    log::info!(
        "loop meta: {} (branch lengths {:.4}/{:.4})",
        run.q.meta.event,
        run.q.meta.branch_lengths[0],
        run.q.meta.branch_lengths[1]
    );
    println!(
        "supporting segment: arc [{:.9}, {:.9}] ({} candidates, #{} accepted first)",
        run.unfolding.s.arc_from,
        run.unfolding.s.arc_to,
        run.support.candidates.len(),
        run.support.accepted_index
    );
    println!(
        "certified simple polygon: {} edges, area {:.12}",
        run.unfolding.certificate.edges, run.unfolding.area
    );

    if let Some(path) = &args.common.json {
        write_json(path, &unfolding_to_json(&run))?;
        write_json(&report_path(path), &report_to_json(&run))?;
        let cuts = serde_json::json!({
            "left": cuts_to_json(&run.left, &run.cuts_left),
            "right": cuts_to_json(&run.right, &run.cuts_right),
        });
        write_json(&sibling_path(path, ".cuts.json"), &cuts)?;
    }
    if let Some(path) = &args.svg {
        std::fs::write(path, qstar_core::svg::render(&run.unfolding))
            .map_err(|e| CmdError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<(), CmdError> {
    let p = load(&args.common)?;
    let spec = resolve_spec(&p, &args.seed)?;
    let policy = policy_of(&args.seed)?;
    let q = resolve_loop(&p, &spec, policy).map_err(|e| CmdError::Validation(e.to_string()))?;
    let (l, r) = split_halves(&p, &q).map_err(|e| CmdError::Pipeline(e.to_string()))?;
    let k = args.oracle_k.max(1);
    let oracle = Oracle::new(&p, &q, k);

    let mut rows = Vec::new();
    let mut ok = true;
    println!("vertex   exact ℓ           oracle(k={k})      gap");
    for half in [&l, &r] {
        let cuts = cut_all(half, &q).map_err(|e| CmdError::Pipeline(e.to_string()))?;
        for c in &cuts {
            let ub = oracle.distance(c.vertex);
            let gap = ub - c.length;
            let rel = gap / c.length;
            println!(
                "v{:<6} {:<17.12} {:<17.12} {:+.3e} ({:+.2}%)",
                c.vertex,
                c.length,
                ub,
                gap,
                rel * 100.0
            );
            if gap < -1e-9 || (k >= 64 && rel > 0.01) {
                ok = false;
            }
            rows.push(serde_json::json!({
                "vertex": c.vertex,
                "exact": c.length,
                "oracle": ub,
                "gap": gap,
            }));
        }
        if let Some(path) = &args.common.json {
            write_json(path, &serde_json::json!({ "k": k, "rows": rows }))?;
        }
    }
    if ok {
        Ok(())
    } else {
        Err(CmdError::Pipeline("oracle bound violated".into()))
    }
}
