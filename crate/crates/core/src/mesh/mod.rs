//! Closed conforming surface triangulations and the meshes derived from them.

mod derived;
mod nvb;
mod shapes;

use std::collections::HashMap;

pub use derived::{build_bary, build_dual, BaryMesh, DualMesh};
pub use nvb::{refine_nvb, refine_nvb_with_parents};
pub use shapes::{generate_geometry, GeometryKind, StarParams};

use crate::error::{Error, Result};
use crate::geometry::{self, Point3};

/// A conforming triangulation of a closed polyhedral surface.
///
/// Triangles are stored as ordered vertex triples with outward orientation.
/// The edge between the first two vertices is the reference edge used by
/// newest-vertex bisection, so the stored order carries refinement state.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    generation: usize,
}

/// Per-triangle size and shape measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleMetrics {
    pub diam: f64,
    pub area: f64,
    pub min_angle: f64,
}

impl Triangulation {
    /// Builds a triangulation and checks that it is closed, conforming,
    /// consistently oriented and free of degenerate triangles.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Self {
            vertices,
            triangles,
            generation: 0,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Like [`Triangulation::new`], but first rotates every triangle so that
    /// its longest edge becomes the reference edge. Ties go to the edge whose
    /// opposite vertex has the smallest index.
    pub fn with_initial_reference_edges(
        vertices: Vec<Point3>,
        mut triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        for t in &mut triangles {
            *t = rotate_longest_first(&vertices, *t);
        }
        Self::new(vertices, triangles)
    }

    /// Builds a triangulation without any topological audit. Intended for
    /// open test fixtures such as a single triangle.
    pub fn new_unchecked(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Self {
        Self {
            vertices,
            triangles,
            generation: 0,
        }
    }

    pub(crate) fn with_generation(mut self, generation: usize) -> Self {
        self.generation = generation;
        self
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Number of refinement steps since the initial mesh.
    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Corner points of triangle `t` in stored order.
    pub fn corners(&self, t: usize) -> [Point3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        geometry::triangle_area(&a, &b, &c)
    }

    pub fn diam(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        geometry::triangle_diameter(&a, &b, &c)
    }

    /// Outward unit normal of triangle `t`.
    pub fn normal(&self, t: usize) -> Point3 {
        let [a, b, c] = self.corners(t);
        geometry::area_normal(&a, &b, &c).normalize()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    /// Diameter, area and smallest interior angle of every triangle.
    pub fn metrics(&self) -> Vec<TriangleMetrics> {
        (0..self.num_triangles())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                let angles = geometry::triangle_angles(&a, &b, &c);
                TriangleMetrics {
                    diam: geometry::triangle_diameter(&a, &b, &c),
                    area: geometry::triangle_area(&a, &b, &c),
                    min_angle: angles.iter().copied().fold(f64::INFINITY, f64::min),
                }
            })
            .collect()
    }

    /// Undirected edges `(min, max)` with the triangles using them.
    pub fn edge_map(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        edges
    }

    pub fn num_edges(&self) -> usize {
        self.edge_map().len()
    }

    /// Component label per vertex, numbered by first appearance; vertices
    /// not used by any triangle get their own label.
    pub fn vertex_components(&self) -> (Vec<usize>, usize) {
        let n = self.num_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for tri in &self.triangles {
            for k in 1..3 {
                let (ra, rb) = (find(&mut parent, tri[0]), find(&mut parent, tri[k]));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut roots = HashMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            let next = roots.len();
            label[v] = *roots.entry(r).or_insert(next);
        }
        (label, roots.len())
    }

    /// Checks every triangulation invariant.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a vertex out of range"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} repeats a vertex"
                )));
            }
            let area = self.area(t);
            let scale = self.diam(t);
            if !(area > 1e-14 * scale * scale) {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
        }

        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                if let Some(other) = directed.insert(e, t) {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({}, {}) is traversed in the same direction by triangles {other} and {t} \
                         (inconsistent orientation or non-manifold edge)",
                        e.0, e.1
                    )));
                }
            }
        }
        for (&(a, b), &t) in &directed {
            if !directed.contains_key(&(b, a)) {
                return Err(Error::InvalidMesh(format!(
                    "edge ({a}, {b}) of triangle {t} has no neighbour (open surface)"
                )));
            }
        }
        Ok(())
    }
}

fn rotate_longest_first(vertices: &[Point3], tri: [usize; 3]) -> [usize; 3] {
    let len = |k: usize| (vertices[tri[(k + 1) % 3]] - vertices[tri[k]]).norm();
    let mut best = 0;
    for k in 1..3 {
        let (lk, lb) = (len(k), len(best));
        let tie = (lk - lb).abs() <= 1e-12 * lk.max(lb);
        if (!tie && lk > lb) || (tie && tri[(k + 2) % 3] < tri[(best + 2) % 3]) {
            best = k;
        }
    }
    [tri[best], tri[(best + 1) % 3], tri[(best + 2) % 3]]
}
