//! Initial meshes for the benchmark geometries.

use std::collections::HashMap;

use super::Triangulation;
use crate::error::{Error, Result};
use crate::geometry::{area_normal, Point3};

/// Extruded star prism centred at the origin with axis `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarParams {
    /// Number of star tips.
    pub points: usize,
    pub outer_radius: f64,
    pub inner_radius: f64,
    /// Half of the prism height.
    pub half_thickness: f64,
}

impl Default for StarParams {
    /// A three-pointed star, which gives a 24-triangle initial mesh.
    fn default() -> Self {
        Self {
            points: 3,
            outer_radius: 1.0,
            inner_radius: 0.4,
            half_thickness: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryKind {
    /// The unit cube `(0,1)^3`, 12 triangles.
    Cube,
    /// `[-1,1]^3 \ [0,1]^3`, 48 triangles.
    Fichera,
    Star(StarParams),
}

pub fn generate_geometry(kind: GeometryKind) -> Result<Triangulation> {
    match kind {
        GeometryKind::Cube => Ok(cube()),
        GeometryKind::Fichera => Ok(fichera()),
        GeometryKind::Star(p) => star(p),
    }
}

/// Collects axis-aligned unit squares and splits each along the diagonal
/// through its lexicographically smallest corner.
#[derive(Default)]
struct SquareSurface {
    index: HashMap<[i64; 3], usize>,
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
}

impl SquareSurface {
    fn vertex(&mut self, p: [i64; 3]) -> usize {
        let vertices = &mut self.vertices;
        *self.index.entry(p).or_insert_with(|| {
            vertices.push(Point3::new(p[0] as f64, p[1] as f64, p[2] as f64));
            vertices.len() - 1
        })
    }

    /// Unit square on the plane `x[axis] = level` whose lower corner in the
    /// two remaining axes is `(u, v)`, with outward normal `sign * e_axis`.
    fn square(&mut self, axis: usize, level: i64, u: i64, v: i64, sign: f64) {
        let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
        let corner = |du: i64, dv: i64| {
            let mut p = [0i64; 3];
            p[axis] = level;
            p[a1] = u + du;
            p[a2] = v + dv;
            p
        };
        let p00 = self.vertex(corner(0, 0));
        let p10 = self.vertex(corner(1, 0));
        let p11 = self.vertex(corner(1, 1));
        let p01 = self.vertex(corner(0, 1));
        let mut normal = Point3::zeros();
        normal[axis] = sign;
        for tri in [[p00, p10, p11], [p00, p11, p01]] {
            let [a, b, c] = tri.map(|i| self.vertices[i]);
            if area_normal(&a, &b, &c).dot(&normal) > 0.0 {
                self.triangles.push(tri);
            } else {
                self.triangles.push([tri[0], tri[2], tri[1]]);
            }
        }
    }

    fn finish(self) -> Triangulation {
        Triangulation::with_initial_reference_edges(self.vertices, self.triangles)
            .expect("square surfaces are closed and conforming")
    }
}

/// Vertex `i` sits at `(i & 1, (i >> 1) & 1, (i >> 2) & 1)`. The face
/// diagonals are fixed explicitly; the level-0 solution depends on them.
fn cube() -> Triangulation {
    let vertices = (0..8)
        .map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let triangles = vec![
        [0, 2, 1],
        [2, 3, 1],
        [4, 5, 7],
        [4, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 7],
        [2, 7, 3],
        [0, 4, 6],
        [0, 6, 2],
        [1, 3, 7],
        [1, 7, 5],
    ];
    Triangulation::with_initial_reference_edges(vertices, triangles)
        .expect("cube connectivity is closed and oriented")
}

fn fichera() -> Triangulation {
    let mut s = SquareSurface::default();
    for axis in 0..3 {
        for (level, sign) in [(-1, -1.0), (1, 1.0)] {
            for u in [-1, 0] {
                for v in [-1, 0] {
                    // The removed octant cuts the quarter (u, v) = (0, 0) out of the
                    // three faces at +1.
                    if level == 1 && u == 0 && v == 0 {
                        continue;
                    }
                    s.square(axis, level, u, v, sign);
                }
            }
        }
        // Re-entrant faces bounding the removed octant.
        s.square(axis, 0, 0, 0, 1.0);
    }
    s.finish()
}

fn star(p: StarParams) -> Result<Triangulation> {
    if p.points < 3 {
        return Err(Error::InvalidGeometry(format!(
            "star needs at least 3 points, got {}",
            p.points
        )));
    }
    if !(p.inner_radius > 0.0 && p.inner_radius < p.outer_radius) {
        return Err(Error::InvalidGeometry(format!(
            "star radii must satisfy 0 < r < R, got r = {}, R = {}",
            p.inner_radius, p.outer_radius
        )));
    }
    if !(p.half_thickness > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "star half-thickness must be positive, got {}",
            p.half_thickness
        )));
    }
    let n = 2 * p.points;
    let ring: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let phi = std::f64::consts::PI * i as f64 / p.points as f64;
            let r = if i % 2 == 0 {
                p.outer_radius
            } else {
                p.inner_radius
            };
            (r * phi.cos(), r * phi.sin())
        })
        .collect();
    let t = p.half_thickness;
    let mut vertices = Vec::with_capacity(2 * n + 2);
    vertices.extend(ring.iter().map(|&(x, y)| Point3::new(x, y, t)));
    vertices.extend(ring.iter().map(|&(x, y)| Point3::new(x, y, -t)));
    let top_centre = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, t));
    let bottom_centre = vertices.len();
    vertices.push(Point3::new(0.0, 0.0, -t));

    let mut triangles = Vec::with_capacity(4 * n);
    for i in 0..n {
        let j = (i + 1) % n;
        let (top_i, top_j, bot_i, bot_j) = (i, j, n + i, n + j);
        triangles.push([top_centre, top_i, top_j]);
        triangles.push([bottom_centre, bot_j, bot_i]);
        // The ring runs counter-clockwise, so (bot_i, bot_j, top_j) faces outwards.
        triangles.push([bot_i, bot_j, top_j]);
        triangles.push([bot_i, top_j, top_i]);
    }
    Triangulation::with_initial_reference_edges(vertices, triangles)
}
