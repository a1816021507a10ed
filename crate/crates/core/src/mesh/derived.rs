//! Barycentric refinement and dual mesh.

use std::collections::HashMap;

use super::Triangulation;
use crate::geometry::{self, Point3};

/// Barycentric refinement: each primal triangle split into six by joining
/// its centroid to its vertices and edge midpoints.
///
/// Vertex numbering: primal vertices first, then edge midpoints, then
/// centroids. The children of primal triangle `t` are `6t..6t+6`; children
/// `6t + 2k` and `6t + 2k + 1` belong to the dual cell of local vertex `k`,
/// and store that vertex first.
#[derive(Debug, Clone)]
pub struct BaryMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    parent_primal: Vec<usize>,
    owner_vertex: Vec<usize>,
    areas: Vec<f64>,
}

impl BaryMesh {
    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn parent_primal(&self) -> &[usize] {
        &self.parent_primal
    }

    /// Primal vertex (equivalently dual cell) owning each bary triangle.
    pub fn owner_vertex(&self) -> &[usize] {
        &self.owner_vertex
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn corners(&self, i: usize) -> [Point3; 3] {
        self.triangles[i].map(|v| self.vertices[v])
    }

    /// Local position (0, 1, 2) of the owner vertex within the primal parent.
    pub fn owner_local(&self, i: usize) -> usize {
        (i % 6) / 2
    }
}

/// Dual mesh: one polygonal cell per primal vertex, stored as the list of
/// bary triangles it is made of.
#[derive(Debug, Clone)]
pub struct DualMesh {
    cells: Vec<Vec<usize>>,
    areas: Vec<f64>,
}

impl DualMesh {
    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

pub fn build_bary(mesh: &Triangulation) -> BaryMesh {
    let nv = mesh.num_vertices();
    let tris = mesh.triangles();
    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in tris {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            midpoint.entry(key).or_insert_with(|| {
                vertices.push(0.5 * (vertices[a] + vertices[b]));
                vertices.len() - 1
            });
        }
    }
    debug_assert!(vertices.len() >= nv);
    let first_centroid = vertices.len();
    for t in 0..tris.len() {
        let [a, b, c] = mesh.corners(t);
        vertices.push(geometry::centroid(&a, &b, &c));
    }

    let n = 6 * tris.len();
    let mut triangles = Vec::with_capacity(n);
    let mut parent_primal = Vec::with_capacity(n);
    let mut owner_vertex = Vec::with_capacity(n);
    for (t, tri) in tris.iter().enumerate() {
        let c = first_centroid + t;
        let mid = |a: usize, b: usize| midpoint[&(a.min(b), a.max(b))];
        for k in 0..3 {
            let v = tri[k];
            let next = tri[(k + 1) % 3];
            let prev = tri[(k + 2) % 3];
            triangles.push([v, mid(v, next), c]);
            triangles.push([v, c, mid(prev, v)]);
            parent_primal.extend([t, t]);
            owner_vertex.extend([v, v]);
        }
    }
    let areas = triangles
        .iter()
        .map(|tri| {
            let [a, b, c] = tri.map(|v| vertices[v]);
            geometry::triangle_area(&a, &b, &c)
        })
        .collect();
    BaryMesh {
        vertices,
        triangles,
        parent_primal,
        owner_vertex,
        areas,
    }
}

pub fn build_dual(mesh: &Triangulation, bary: &BaryMesh) -> DualMesh {
    let mut cells = vec![Vec::new(); mesh.num_vertices()];
    let mut areas = vec![0.0; mesh.num_vertices()];
    for (i, &owner) in bary.owner_vertex().iter().enumerate() {
        cells[owner].push(i);
        areas[owner] += bary.areas()[i];
    }
    DualMesh { cells, areas }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_geometry, refine_nvb, GeometryKind};

    fn cube() -> Triangulation {
        generate_geometry(GeometryKind::Cube).unwrap()
    }

    #[test]
    fn cube_bary_has_72_children() {
        let m = cube();
        let b = build_bary(&m);
        assert_eq!(b.len(), 72);
        let total: f64 = b.areas().iter().sum();
        assert!((total - 6.0).abs() < 1e-12 * 6.0);
    }

    #[test]
    fn children_partition_parent_with_consistent_orientation() {
        let m = refine_nvb(&cube(), &[0, 5]);
        let b = build_bary(&m);
        for t in 0..m.num_triangles() {
            let sum: f64 = (6 * t..6 * t + 6).map(|i| b.areas()[i]).sum();
            assert!((sum - m.area(t)).abs() <= 1e-12 * m.area(t));
            let n = m.normal(t);
            for i in 6 * t..6 * t + 6 {
                let [p, q, r] = b.corners(i);
                assert!(geometry::area_normal(&p, &q, &r).dot(&n) > 0.0);
                assert_eq!(b.parent_primal()[i], t);
                assert!(m.triangles()[t].contains(&b.owner_vertex()[i]));
                assert_eq!(b.triangles()[i][0], b.owner_vertex()[i]);
            }
        }
    }

    #[test]
    fn single_triangle_fixture() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let m = Triangulation::new_unchecked(v, vec![[0, 1, 2]]);
        let b = build_bary(&m);
        assert_eq!(b.len(), 6);
        for i in 0..6 {
            let owners = b.triangles()[i].iter().filter(|&&v| v < 3).count();
            assert_eq!(owners, 1);
            assert!((b.areas()[i] - 0.5 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cube_dual_cells() {
        let m = cube();
        let b = build_bary(&m);
        let d = build_dual(&m, &b);
        assert_eq!(d.len(), 8);
        let total: f64 = d.areas().iter().sum();
        assert!((total - 6.0).abs() < 1e-12 * 6.0);
        for (v, cell) in d.cells().iter().enumerate() {
            let incident = m.triangles().iter().filter(|t| t.contains(&v)).count();
            assert_eq!(cell.len(), 2 * incident);
            // The vertex is a corner of every member.
            assert!(cell.iter().all(|&i| b.triangles()[i].contains(&v)));
            assert!(d.areas()[v] > 0.0);
        }
        let corner4 = (0..8)
            .find(|&v| m.triangles().iter().filter(|t| t.contains(&v)).count() == 4)
            .unwrap();
        assert_eq!(d.cells()[corner4].len(), 8);
    }

    #[test]
    fn dual_areas_partition_refined_surface() {
        let mut m = cube();
        for round in 0..4 {
            m = refine_nvb(&m, &[round, 2 * round + 1]);
        }
        let b = build_bary(&m);
        let d = build_dual(&m, &b);
        let total: f64 = d.areas().iter().sum();
        assert!((total - m.surface_area()).abs() <= 1e-12 * m.surface_area());
    }
}
