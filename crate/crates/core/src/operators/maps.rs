use super::SparseMap;
use crate::geometry::{self, Point3};
use crate::mesh::{BaryMesh, DualMesh, Triangulation};
use crate::quadrature::triangle_gauss_rule;

/// `P[i, j] = 1` iff bary triangle `i` lies in dual cell `j`.
pub fn dual_projection(bary: &BaryMesh, num_cells: usize) -> SparseMap {
    let trip = bary
        .owner_vertex()
        .iter()
        .enumerate()
        .map(|(i, &j)| (i, j, 1.0))
        .collect();
    SparseMap::from_triplets(bary.len(), num_cells, trip)
}

/// `R[i, k] = 1` iff bary triangle `i` lies in primal triangle `k`.
pub fn primal_projection(bary: &BaryMesh, num_triangles: usize) -> SparseMap {
    let trip = bary
        .parent_primal()
        .iter()
        .enumerate()
        .map(|(i, &k)| (i, k, 1.0))
        .collect();
    SparseMap::from_triplets(bary.len(), num_triangles, trip)
}

/// `E[3k + t, k] = 1`: constants as sums of the three local nodal functions.
pub fn p1_embedding(mesh: &Triangulation) -> SparseMap {
    let n = mesh.num_triangles();
    let trip = (0..3 * n).map(|r| (r, r / 3, 1.0)).collect();
    SparseMap::from_triplets(3 * n, n, trip)
}

/// Surface curl `ν × ∇φ` of the three local hat functions of every primal
/// triangle.
pub(crate) fn surface_curls(mesh: &Triangulation) -> Vec<[Point3; 3]> {
    (0..mesh.num_triangles())
        .map(|t| {
            let [a, b, c] = mesh.corners(t);
            let n = mesh.normal(t);
            geometry::barycentric_gradients(&a, &b, &c).map(|g| n.cross(&g))
        })
        .collect()
}

/// Cartesian components of the surface curls of the hat functions on each
/// bary triangle: `Q[m][i, j] = (ν × ∇φ_j)_m` on bary triangle `i`.
pub fn curl_maps(mesh: &Triangulation, bary: &BaryMesh) -> [SparseMap; 3] {
    let curls = surface_curls(mesh);
    let mut trip: [Vec<(usize, usize, f64)>; 3] = Default::default();
    for i in 0..bary.len() {
        let t = bary.parent_primal()[i];
        for (k, &v) in mesh.triangles()[t].iter().enumerate() {
            for (m, tm) in trip.iter_mut().enumerate() {
                tm.push((i, v, curls[t][k][m]));
            }
        }
    }
    trip.map(|t| SparseMap::from_triplets(bary.len(), mesh.num_vertices(), t))
}

/// `M[j, i] = ∫ φ_j` over dual cell `i`, exact per bary triangle.
pub fn mass_matrix(mesh: &Triangulation, bary: &BaryMesh, dual: &DualMesh) -> SparseMap {
    // Mean hat values on the bary children [v, mid(v, w), c] and
    // [v, c, mid(u, v)]: 11/18 for v, 5/18 for the edge partner, 1/9 for the
    // third vertex.
    const OWN: f64 = 11.0 / 18.0;
    const EDGE: f64 = 5.0 / 18.0;
    const FAR: f64 = 2.0 / 18.0;
    let mut trip = Vec::with_capacity(3 * bary.len());
    for i in 0..bary.len() {
        let tri = mesh.triangles()[bary.parent_primal()[i]];
        let k = bary.owner_local(i);
        let owner = tri[k];
        let next = tri[(k + 1) % 3];
        let prev = tri[(k + 2) % 3];
        let area = bary.areas()[i];
        let (partner, third) = if i % 2 == 0 { (next, prev) } else { (prev, next) };
        trip.push((owner, owner, area * OWN));
        trip.push((partner, owner, area * EDGE));
        trip.push((third, owner, area * FAR));
    }
    SparseMap::from_triplets(mesh.num_vertices(), dual.len(), trip)
}

/// `a[j] = ∫ φ_j`, one third of the area of the triangles around vertex `j`.
pub fn stabilization_vector(mesh: &Triangulation) -> Vec<f64> {
    let mut a = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let third = mesh.area(t) / 3.0;
        for &v in tri {
            a[v] += third;
        }
    }
    a
}

/// Boundary data for the right-hand side.
pub enum BoundaryData<'a> {
    Constant(f64),
    Function(&'a (dyn Fn(&Point3) -> f64 + Sync)),
}

/// Moments `⟨f, χ_i⟩` against the dual cells; exact for constants and a
/// degree-4 rule per bary triangle otherwise.
pub fn rhs_moments(f: &BoundaryData, bary: &BaryMesh, dual: &DualMesh) -> Vec<f64> {
    match f {
        BoundaryData::Constant(c) => dual.areas().iter().map(|a| c * a).collect(),
        BoundaryData::Function(f) => {
            let rule = triangle_gauss_rule(4).expect("degree 4 is supported");
            let mut out = vec![0.0; dual.len()];
            for i in 0..bary.len() {
                let [a, b, c] = bary.corners(i);
                let mut s = 0.0;
                for q in 0..rule.len() {
                    let l = rule.barycentric(q);
                    s += rule.weights[q] * f(&(a * l[0] + b * l[1] + c * l[2]));
                }
                out[bary.owner_vertex()[i]] += bary.areas()[i] * s;
            }
            out
        }
    }
}
