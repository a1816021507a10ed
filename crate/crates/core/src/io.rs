//! OFF meshes, legacy VTK exports and CSV convergence histories.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::driver::AdaptiveRecord;
use crate::error::{Error, Result};
use crate::estimator::IndicatorField;
use crate::geometry::Point3;
use crate::mesh::Triangulation;

/// Column order of the CSV history.
pub const CSV_HEADER: &str =
    "level,number_of_elements,number_of_dofs,capacity,estimator,iterations,capacity_error,cond";

/// Reads an ASCII OFF file.
///
/// Face order is kept as written, so the first edge of every face is its
/// reference edge. Closedness and orientation are checked face by face and
/// reported with the line of the offending face.
pub fn load_off(path: &Path) -> Result<Triangulation> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_off(&text, path)
}

pub fn save_off(mesh: &Triangulation, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(out, "{} {} {}", mesh.num_vertices(), mesh.num_triangles(), mesh.num_edges());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-empty line with comments stripped, with its 1-based number.
    fn next_content(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let body = line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }
}

fn parse_off(text: &str, path: &Path) -> Result<Triangulation> {
    let err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };

    let (header_line, header) = lines
        .next_content()
        .ok_or_else(|| err(1, "empty file, expected \"OFF\" header".into()))?;
    if header[0] != "OFF" {
        return Err(err(header_line, format!("expected \"OFF\" header, found \"{}\"", header[0])));
    }
    let (counts_line, counts) = if header.len() > 1 {
        (header_line, header[1..].to_vec())
    } else {
        lines
            .next_content()
            .ok_or_else(|| err(header_line + 1, "missing counts line".into()))?
    };
    if counts.len() < 2 {
        return Err(err(counts_line, "counts line needs vertex and face counts".into()));
    }
    let count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| err(counts_line, format!("invalid count \"{s}\"")))
    };
    let nv = count(counts[0])?;
    let nf = count(counts[1])?;

    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let (line, tokens) = lines
            .next_content()
            .ok_or_else(|| err(counts_line, format!("file ends before vertex {i}")))?;
        if tokens.len() < 3 {
            return Err(err(line, format!("vertex {i} needs 3 coordinates")));
        }
        let mut c = [0.0; 3];
        for k in 0..3 {
            c[k] = tokens[k]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(line, format!("vertex {i}: invalid coordinate \"{}\"", tokens[k])))?;
        }
        vertices.push(Point3::new(c[0], c[1], c[2]));
    }

    let mut triangles = Vec::with_capacity(nf);
    let mut face_lines = Vec::with_capacity(nf);
    for f in 0..nf {
        let (line, tokens) = lines
            .next_content()
            .ok_or_else(|| err(counts_line, format!("file ends before face {f}")))?;
        let arity: usize = tokens[0]
            .parse()
            .map_err(|_| err(line, format!("face {f}: invalid vertex count \"{}\"", tokens[0])))?;
        if arity != 3 {
            return Err(err(
                line,
                format!("face {f} has {arity} vertices, only triangular faces are supported"),
            ));
        }
        if tokens.len() < 4 {
            return Err(err(line, format!("face {f} lists fewer than 3 vertex indices")));
        }
        let mut tri = [0usize; 3];
        for k in 0..3 {
            tri[k] = tokens[k + 1]
                .parse()
                .ok()
                .filter(|&v: &usize| v < nv)
                .ok_or_else(|| err(line, format!("face {f}: invalid vertex index \"{}\"", tokens[k + 1])))?;
        }
        triangles.push(tri);
        face_lines.push(line);
    }

    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for (f, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let e = (tri[k], tri[(k + 1) % 3]);
            if let Some(other) = directed.insert(e, f) {
                return Err(err(
                    face_lines[f],
                    format!(
                        "face {f}: edge ({}, {}) has the same direction as in face {other} \
                         (inconsistent orientation or non-manifold edge)",
                        e.0, e.1
                    ),
                ));
            }
        }
    }
    for (f, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if !directed.contains_key(&(b, a)) {
                return Err(err(
                    face_lines[f],
                    format!("face {f}: edge ({a}, {b}) has no neighbour (open surface)"),
                ));
            }
        }
    }
    Triangulation::new(vertices, triangles).map_err(|e| match e {
        Error::DegenerateTriangle { index, area } => err(
            face_lines[index],
            format!("face {index} is degenerate (area {area:e})"),
        ),
        other => other,
    })
}

/// Writes a legacy ASCII VTK unstructured grid with the indicator values as
/// the cell scalar `eta_sq`.
pub fn export_vtk(mesh: &Triangulation, field: &IndicatorField, path: &Path) -> Result<()> {
    let n = mesh.num_triangles();
    if field.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: field.len(),
        });
    }
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nestimator distribution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh.num_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    let _ = writeln!(out, "CELLS {} {}", n, 4 * n);
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {n}");
    for _ in 0..n {
        out.push_str("5\n");
    }
    let _ = writeln!(out, "CELL_DATA {n}");
    out.push_str("SCALARS eta_sq double 1\nLOOKUP_TABLE default\n");
    for v in field.values() {
        let _ = writeln!(out, "{v:e}");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Renders the history as CSV, one row per level, floats with 12 significant
/// digits and blank cells for absent values.
pub fn csv_history(records: &[AdaptiveRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.level,
            r.num_elements,
            r.num_dofs,
            sig12(r.capacity),
            sig12(r.estimator_sq),
            r.iterations,
            r.err.map(sig12).unwrap_or_default(),
            r.cond.map(sig12).unwrap_or_default(),
        );
    }
    out
}

pub fn write_csv(records: &[AdaptiveRecord], path: &Path) -> Result<()> {
    fs::write(path, csv_history(records)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_geometry, refine_nvb, GeometryKind};

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    const TETRA: &str = "0 0 0\n1 0 0\n0 1 0\n0 0 1\n";

    #[test]
    fn round_trip_refined_cube() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = refine_nvb(&generate_geometry(GeometryKind::Cube).unwrap(), &[0, 5]);
        let p = dir.path().join("m.off");
        save_off(&mesh, &p).unwrap();
        let back = load_off(&p).unwrap();
        assert_eq!(back.triangles(), mesh.triangles());
        for (a, b) in back.vertices().iter().zip(mesh.vertices()) {
            assert!((a - b).amax() <= 1e-15);
        }
    }

    #[test]
    fn quad_face_names_face_index() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("OFF\n4 2 0\n{TETRA}3 0 2 1\n4 0 1 3 2\n");
        let e = load_off(&write(&dir, "q.off", &body)).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("face 1"), "{msg}");
        assert!(msg.contains("line 8"), "{msg}");
    }

    #[test]
    fn open_and_misoriented_surfaces_fail_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let open = format!("OFF\n4 3 0\n{TETRA}3 0 2 1\n3 0 1 3\n3 1 2 3\n");
        let e = load_off(&write(&dir, "o.off", &open)).unwrap_err().to_string();
        assert!(e.contains("open surface") && e.contains("line "), "{e}");

        let flipped = format!("OFF\n4 4 0\n{TETRA}3 0 2 1\n3 0 3 1\n3 1 2 3\n3 0 3 2\n");
        let e = load_off(&write(&dir, "f.off", &flipped)).unwrap_err().to_string();
        assert!(e.contains("orientation") && e.contains("line 8"), "{e}");
    }

    #[test]
    fn two_tetrahedra_load() {
        let dir = tempfile::tempdir().unwrap();
        let body = "OFF\n# two components\n8 8 12\n\
                    0 0 0\n1 0 0\n0 1 0\n0 0 1\n\
                    3 0 0\n4 0 0\n3 1 0\n3 0 1\n\
                    3 0 2 1\n3 0 1 3\n3 1 2 3\n3 0 3 2\n\
                    3 4 6 5\n3 4 5 7\n3 5 6 7\n3 4 7 6\n";
        let m = load_off(&write(&dir, "two.off", body)).unwrap();
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.vertex_components().1, 2);
    }

    #[test]
    fn missing_file_mentions_path() {
        let e = load_off(Path::new("/nonexistent/missing.off")).unwrap_err();
        assert!(e.to_string().contains("missing.off"));
    }

    #[test]
    fn vtk_counts_and_zero_field() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = generate_geometry(GeometryKind::Cube).unwrap();
        let p = dir.path().join("c.vtk");
        export_vtk(&mesh, &IndicatorField::new(vec![0.0; 12]), &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("CELLS 12 48"));
        assert!(text.contains("CELL_DATA 12"));
        assert!(text.contains("SCALARS eta_sq double 1"));
        let scalars: Vec<f64> = text
            .split("LOOKUP_TABLE default\n")
            .nth(1)
            .unwrap()
            .split_whitespace()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(scalars, vec![0.0; 12]);
        assert!(export_vtk(&mesh, &IndicatorField::new(vec![0.0; 3]), &p).is_err());
    }

    #[test]
    fn csv_blank_cells_and_digits() {
        let rec = AdaptiveRecord {
            level: 0,
            num_elements: 12,
            num_dofs: 8,
            capacity: 0.649302123156789,
            estimator_sq: 3.4e-2,
            iterations: 4,
            cond: None,
            cond_plain: None,
            err: Some(1.1e-2),
            increment_sq: None,
        };
        let csv = csv_history(&[rec]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!(row[3], "6.49302123157e-1");
        assert_eq!(row[7], "");
        assert!(row[6].starts_with("1.1"));
    }
}
