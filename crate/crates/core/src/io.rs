//! OFF and OBJ readers for convex polyhedra.
//!
//! OFF: a literal `OFF` line, a `V F E` counts line, `V` coordinate lines,
//! then `F` lines of `k i0 … i(k−1)`. OBJ: `v x y z` and `f i j k …`
//! (1-based; `i/j/k` attribute syntax is accepted and truncated to the
//! vertex index). `#` comments and blank lines are ignored in both.

use crate::geom::Vec3;
use crate::mesh::{MeshError, Polyhedron, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &str) -> Option<MeshFormat> {
        let lower = path.to_ascii_lowercase();
        if lower.ends_with(".off") {
            Some(MeshFormat::Off)
        } else if lower.ends_with(".obj") {
            Some(MeshFormat::Obj)
        } else {
            None
        }
    }
}

pub fn load_polyhedron(
    data: &str,
    format: MeshFormat,
    tol: Tolerances,
) -> Result<Polyhedron, MeshError> {
    let (verts, polys) = match format {
        MeshFormat::Off => parse_off(data)?,
        MeshFormat::Obj => parse_obj(data)?,
    };
    Polyhedron::from_polygons(verts, polys, tol)
}

fn content_lines(data: &str) -> impl Iterator<Item = (usize, &str)> {
    data.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn parse_off(data: &str) -> Result<(Vec<Vec3>, Vec<Vec<usize>>), MeshError> {
    let mut lines = content_lines(data);
    let (ln, header) = lines
        .next()
        .ok_or_else(|| MeshError::Parse("empty OFF stream".into()))?;
    if header != "OFF" {
        return Err(MeshError::Parse(format!(
            "line {ln}: expected literal OFF header"
        )));
    }
    let (ln, counts) = lines
        .next()
        .ok_or_else(|| MeshError::Parse("missing counts line".into()))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| MeshError::Parse(format!("line {ln}: bad count `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    if counts.len() < 2 {
        return Err(MeshError::Parse(format!(
            "line {ln}: expected V F E counts"
        )));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| MeshError::Parse("unexpected end of vertex list".into()))?;
        let xyz: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| MeshError::Parse(format!("line {ln}: bad coordinate `{t}`")))
            })
            .collect::<Result<_, _>>()?;
        if xyz.len() != 3 {
            return Err(MeshError::Parse(format!(
                "line {ln}: expected 3 coordinates"
            )));
        }
        verts.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
    }

    let mut polys = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| MeshError::Parse("unexpected end of face list".into()))?;
        let idx: Vec<usize> = line
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| MeshError::Parse(format!("line {ln}: bad index `{t}`")))
            })
            .collect::<Result<_, _>>()?;
        if idx.is_empty() || idx.len() != idx[0] + 1 {
            return Err(MeshError::Parse(format!(
                "line {ln}: face count prefix mismatch"
            )));
        }
        polys.push(idx[1..].to_vec());
    }
    Ok((verts, polys))
}

fn parse_obj(data: &str) -> Result<(Vec<Vec3>, Vec<Vec<usize>>), MeshError> {
    let mut verts = Vec::new();
    let mut polys = Vec::new();
    for (ln, line) in content_lines(data) {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let xyz: Vec<f64> = tok
                    .take(3)
                    .map(|t| {
                        t.parse().map_err(|_| {
                            MeshError::Parse(format!("line {ln}: bad coordinate `{t}`"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                if xyz.len() != 3 {
                    return Err(MeshError::Parse(format!(
                        "line {ln}: expected 3 coordinates"
                    )));
                }
                verts.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for t in tok {
                    let head = t.split('/').next().unwrap_or(t);
                    let i: i64 = head.parse().map_err(|_| {
                        MeshError::Parse(format!("line {ln}: bad face index `{t}`"))
                    })?;
                    if i < 1 {
                        return Err(MeshError::Parse(format!(
                            "line {ln}: only positive 1-based indices are supported"
                        )));
                    }
                    poly.push((i - 1) as usize);
                }
                if poly.len() < 3 {
                    return Err(MeshError::Parse(format!(
                        "line {ln}: face with <3 vertices"
                    )));
                }
                polys.push(poly);
            }
            // Normals, texcoords, groups, materials: irrelevant here.
            Some(_) => {}
            None => {}
        }
    }
    if verts.is_empty() || polys.is_empty() {
        return Err(MeshError::Parse("OBJ stream holds no v/f data".into()));
    }
    Ok((verts, polys))
}

/// Serialize a polyhedron back to OFF (original input polygons).
pub fn write_off(p: &Polyhedron) -> String {
    use std::fmt::Write;
    let mut out = String::from("OFF\n");
    let ne: usize = p.input_polys.iter().map(|f| f.len()).sum::<usize>() / 2;
    let _ = writeln!(out, "{} {} {}", p.mesh.verts.len(), p.input_polys.len(), ne);
    for v in &p.mesh.verts {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for poly in &p.input_polys {
        let _ = write!(out, "{}", poly.len());
        for &i in poly {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn off_round_trip() {
        let p = fixtures::random_hull(3, 12);
        let s = write_off(&p);
        let p2 = load_polyhedron(&s, MeshFormat::Off, Tolerances::default()).unwrap();
        assert_eq!(p2.n(), p.n());
        assert_eq!(p2.mesh.faces.len(), p.mesh.faces.len());
    }

    #[test]
    fn cube_off_loads() {
        let p =
            load_polyhedron(fixtures::CUBE_OFF, MeshFormat::Off, Tolerances::default()).unwrap();
        assert_eq!(p.n(), 8);
        assert_eq!(p.mesh.faces.len(), 12);
        assert_eq!(p.input_polys.len(), 6);
    }

    #[test]
    fn tetrahedron_obj_loads() {
        let p =
            load_polyhedron(fixtures::TETRA_OBJ, MeshFormat::Obj, Tolerances::default()).unwrap();
        assert_eq!(p.n(), 4);
        assert_eq!(p.mesh.faces.len(), 4);
    }

    #[test]
    fn malformed_off_fails() {
        let r = load_polyhedron("OFF\n3 1\n0 0 0\n", MeshFormat::Off, Tolerances::default());
        assert!(matches!(r, Err(MeshError::Parse(_))));
        let r = load_polyhedron("nope", MeshFormat::Off, Tolerances::default());
        assert!(matches!(r, Err(MeshError::Parse(_))));
    }

    #[test]
    fn non_manifold_fails() {
        // Two triangles sharing an edge with the same winding on it.
        let src = "OFF\n4 2 5\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n";
        let r = load_polyhedron(src, MeshFormat::Off, Tolerances::default());
        assert!(matches!(r, Err(MeshError::NotManifold(_))));
    }
}
