//! End-to-end tests of the qstar binary: exit codes, artifacts, and
//! reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn qstar(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qstar"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_cube(dir: &Path) -> String {
    let path = dir.join("cube.off");
    std::fs::write(&path, qstar_core::fixtures::CUBE_OFF).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_cube_reports_total_curvature() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_cube(dir.path());
    let out = qstar(&["validate", "--input", &cube], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("total curvature: 12.566370614359"),
        "{stdout}"
    );
}

#[test]
fn validate_rejects_non_manifold() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.off");
    std::fs::write(
        &path,
        "OFF\n4 2 5\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n",
    )
    .unwrap();
    let out = qstar(&["validate", "--input", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qstar(&["validate", "--input", "nope.off"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn validate_random_hull() {
    let dir = tempfile::tempdir().unwrap();
    let hull = qstar_core::fixtures::random_hull(11, 30);
    let path = dir.path().join("hull.off");
    std::fs::write(&path, qstar_core::io::write_off(&hull)).unwrap();
    let out = qstar(&["validate", "--input", path.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("total curvature: 12.566370614359"),
        "{stdout}"
    );
}

#[test]
fn unfold_latin_cross_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_cube(dir.path());
    let run = |json: &str, svg: &str| {
        let out = qstar(
            &[
                "unfold",
                "--input",
                &cube,
                "--loop-vertices",
                "0,1,2,3",
                "--json",
                json,
                "--svg",
                svg,
            ],
            dir.path(),
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8_lossy(&out.stdout).into_owned()
    };
    let stdout = run("a.json", "a.svg");
    assert!(stdout.contains("n = 8"), "{stdout}");
    assert!(stdout.contains("certified simple polygon"), "{stdout}");
    run("b.json", "b.svg");

    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b, "unfolding JSON is byte-identical across runs");
    let ra = std::fs::read(dir.path().join("a.json.report.json")).unwrap();
    let rb = std::fs::read(dir.path().join("b.json.report.json")).unwrap();
    assert_eq!(ra, rb);

    let parsed: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(parsed["stats"]["n"], 8);
    assert_eq!(parsed["polygon"].as_array().unwrap().len(), 14);
    let svg = std::fs::read_to_string(dir.path().join("a.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let cuts = std::fs::read(dir.path().join("a.json.cuts.json")).unwrap();
    let cuts: serde_json::Value = serde_json::from_slice(&cuts).unwrap();
    let n_cuts = cuts["left"].as_array().unwrap().len() + cuts["right"].as_array().unwrap().len();
    assert_eq!(n_cuts, 4);
}

#[test]
fn trace_girth_closes() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_cube(dir.path());
    // Largest-face auto seed sits on a cube face; give an explicit axis
    // direction so the girth band closes.
    let out = qstar(
        &[
            "trace",
            "--input",
            &cube,
            "--face",
            "2",
            "--dir",
            "1.5707963267948966",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("length 4.0000"), "{stdout}");
    assert!(stdout.contains("validation: pass"), "{stdout}");
}

#[test]
fn trace_regular_tetrahedron_reports_no_intersection() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tetra.obj");
    std::fs::write(&path, qstar_core::fixtures::TETRA_OBJ).unwrap();
    let out = qstar(
        &[
            "trace",
            "--input",
            path.to_str().unwrap(),
            "--dir",
            "0.378",
            "--max-length",
            "30",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("no self-intersection"), "{stdout}");
}

#[test]
fn oracle_table_passes_at_k64() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_cube(dir.path());
    let out = qstar(
        &[
            "oracle",
            "--input",
            &cube,
            "--loop-vertices",
            "0,1,2,3",
            "--oracle-k",
            "64",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("v4"), "{stdout}");
}

#[test]
fn unfold_exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let cube = write_cube(dir.path());
    // An invalid explicit loop (corner angles exceed π on one side).
    let out = qstar(
        &["unfold", "--input", &cube, "--loop-vertices", "0,1,5"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
