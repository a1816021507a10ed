use rayon::prelude::*;

use super::DenseSymMatrix;
use crate::error::{Error, Result};
use crate::geometry::{self, Point3};
use crate::mesh::{BaryMesh, Triangulation};
use crate::quadrature::{classify_pair, separation_ratio, PairClass, PairQuadrature, TriangleRule};
use crate::INV_FOUR_PI;

/// Rows of primal pairs processed between two sequential accumulation passes.
const CHUNK: usize = 32;

fn check_nondegenerate(vertices: &[Point3], triangles: &[[usize; 3]]) -> Result<()> {
    for (index, tri) in triangles.iter().enumerate() {
        let [a, b, c] = tri.map(|v| vertices[v]);
        let area = geometry::triangle_area(&a, &b, &c);
        let d = geometry::triangle_diameter(&a, &b, &c);
        if !(area > 1e-14 * d * d) {
            return Err(Error::DegenerateTriangle { index, area });
        }
    }
    Ok(())
}

/// Copies the upper triangle onto the lower one.
fn mirror_upper(m: &mut DenseSymMatrix) {
    let n = m.dim();
    for i in 0..n {
        for j in i + 1..n {
            let v = m.get(i, j);
            m.set(j, i, v);
        }
    }
}

/// `V[i, j] = ⟨V χ_j, χ_i⟩` for the indicator functions of `triangles`.
pub fn assemble_single_layer(
    vertices: &[Point3],
    triangles: &[[usize; 3]],
    order: usize,
) -> Result<DenseSymMatrix> {
    assemble_single_layer_with(vertices, triangles, &*PairQuadrature::cached(order)?)
}

/// [`assemble_single_layer`] with explicit pair rules.
pub fn assemble_single_layer_with(
    vertices: &[Point3],
    triangles: &[[usize; 3]],
    quad: &PairQuadrature,
) -> Result<DenseSymMatrix> {
    check_nondegenerate(vertices, triangles)?;
    let n = triangles.len();
    let corners: Vec<[Point3; 3]> = triangles.iter().map(|t| t.map(|v| vertices[v])).collect();
    let mut m = DenseSymMatrix::zeros(n);
    m.as_mut_slice()
        .par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(i, row)| {
            for j in i..n {
                let class = classify_pair(triangles[i], triangles[j]);
                row[j] = quad.p0(&corners[i], &corners[j], &class);
            }
        });
    mirror_upper(&mut m);
    Ok(m)
}

/// Galerkin matrices on the nodal basis of discontinuous P1: the block of
/// rows `3k..3k+3` belongs to the barycentric coordinates of triangle `k`.
pub fn assemble_p1_disc(mesh: &Triangulation, order: usize) -> Result<DenseSymMatrix> {
    assemble_p1_disc_with(mesh, &*PairQuadrature::cached(order)?)
}

/// [`assemble_p1_disc`] with explicit pair rules.
pub fn assemble_p1_disc_with(mesh: &Triangulation, quad: &PairQuadrature) -> Result<DenseSymMatrix> {
    check_nondegenerate(mesh.vertices(), mesh.triangles())?;
    let n = mesh.num_triangles();
    let tris = mesh.triangles();
    let corners: Vec<[Point3; 3]> = (0..n).map(|t| mesh.corners(t)).collect();
    let mut m = DenseSymMatrix::zeros(3 * n);
    m.as_mut_slice()
        .par_chunks_mut(9 * n.max(1))
        .enumerate()
        .for_each(|(t, rows)| {
            for s in t..n {
                let class = classify_pair(tris[t], tris[s]);
                let mut block = [[0.0; 3]; 3];
                quad.for_each_sample(&corners[t], &corners[s], &class, |la, lb, w| {
                    for i in 0..3 {
                        for j in 0..3 {
                            block[i][j] += la[i] * lb[j] * w;
                        }
                    }
                });
                if s == t {
                    for i in 0..3 {
                        for j in i + 1..3 {
                            let v = 0.5 * (block[i][j] + block[j][i]);
                            block[i][j] = v;
                            block[j][i] = v;
                        }
                    }
                }
                for (i, bi) in block.iter().enumerate() {
                    for (j, v) in bi.iter().enumerate() {
                        rows[i * 3 * n + 3 * s + j] = *v;
                    }
                }
            }
        });
    mirror_upper(&mut m);
    Ok(m)
}

/// Single-layer matrices on the dual cells and on the primal triangles,
/// both obtained from the bary-level Galerkin entries without storing them.
#[derive(Debug, Clone)]
pub struct ProjectedOperators {
    /// `Pᵀ V^bary P`, indexed by primal vertex.
    pub vdual: DenseSymMatrix,
    /// `Rᵀ V^bary R`, indexed by primal triangle.
    pub vp0: DenseSymMatrix,
}

#[derive(Clone, Copy)]
struct WeightedPoint {
    p: [f64; 3],
    w: f64,
}

/// Physical quadrature points of every bary child for one triangle rule,
/// child-major, weights multiplied by the child area.
fn child_points(bary: &BaryMesh, rule: &TriangleRule) -> Vec<WeightedPoint> {
    let mut out = Vec::with_capacity(bary.len() * rule.len());
    for i in 0..bary.len() {
        let [a, b, c] = bary.corners(i);
        let area = bary.areas()[i];
        for q in 0..rule.len() {
            let l = rule.barycentric(q);
            let x = a * l[0] + b * l[1] + c * l[2];
            out.push(WeightedPoint {
                p: [x[0], x[1], x[2]],
                w: area * rule.weights[q],
            });
        }
    }
    out
}

#[inline]
fn kernel_sum(xs: &[WeightedPoint], ys: &[WeightedPoint]) -> f64 {
    let mut s = 0.0;
    for x in xs {
        let mut inner = 0.0;
        for y in ys {
            let d0 = x.p[0] - y.p[0];
            let d1 = x.p[1] - y.p[1];
            let d2 = x.p[2] - y.p[2];
            inner += y.w / (d0 * d0 + d1 * d1 + d2 * d2).sqrt();
        }
        s += x.w * inner;
    }
    INV_FOUR_PI * s
}

struct Bounds {
    centroid: Point3,
    radius: f64,
    diam: f64,
}

impl Bounds {
    fn of(t: &[Point3; 3]) -> Self {
        Self {
            centroid: geometry::centroid(&t[0], &t[1], &t[2]),
            radius: geometry::bounding_radius(&t[0], &t[1], &t[2]),
            diam: geometry::triangle_diameter(&t[0], &t[1], &t[2]),
        }
    }

    /// Same value as [`separation_ratio`].
    fn ratio(&self, other: &Bounds) -> f64 {
        let gap = (self.centroid - other.centroid).norm() - self.radius - other.radius;
        gap.max(0.0) / self.diam.max(other.diam)
    }
}

struct ProjectedAssembler<'a> {
    mesh: &'a Triangulation,
    bary: &'a BaryMesh,
    quad: &'a PairQuadrature,
    far: Vec<WeightedPoint>,
    near: Vec<WeightedPoint>,
    far_len: usize,
    near_len: usize,
    primal: Vec<Bounds>,
    children: Vec<Bounds>,
    child_corners: Vec<[Point3; 3]>,
}

impl ProjectedAssembler<'_> {
    fn far_child(&self, i: usize) -> &[WeightedPoint] {
        &self.far[i * self.far_len..(i + 1) * self.far_len]
    }

    fn near_child(&self, i: usize) -> &[WeightedPoint] {
        &self.near[i * self.near_len..(i + 1) * self.near_len]
    }

    /// Points of the two children of primal `t` owned by local vertex `k`.
    fn far_group(&self, t: usize, k: usize) -> &[WeightedPoint] {
        let first = 6 * t + 2 * k;
        &self.far[first * self.far_len..(first + 2) * self.far_len]
    }

    fn child_entry(&self, c: usize, d: usize, touching: bool) -> f64 {
        let class = if touching {
            classify_pair(self.bary.triangles()[c], self.bary.triangles()[d])
        } else {
            PairClass::Disjoint
        };
        match class {
            PairClass::Disjoint => {
                if self.children[c].ratio(&self.children[d]) > 4.0 {
                    kernel_sum(self.far_child(c), self.far_child(d))
                } else {
                    kernel_sum(self.near_child(c), self.near_child(d))
                }
            }
            _ => self
                .quad
                .p0(&self.child_corners[c], &self.child_corners[d], &class),
        }
    }

    /// Integrals over (dual cell part in `t`) x (dual cell part in `s`),
    /// indexed by the local owner vertices.
    fn owner_block(&self, t: usize, s: usize) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        let touching = t == s
            || classify_pair(self.mesh.triangles()[t], self.mesh.triangles()[s]).shared() > 0;
        if !touching && self.primal[t].ratio(&self.primal[s]) > 4.0 {
            // Every child pair is then far as well.
            for (k, row) in out.iter_mut().enumerate() {
                for (l, v) in row.iter_mut().enumerate() {
                    *v = kernel_sum(self.far_group(t, k), self.far_group(s, l));
                }
            }
            return out;
        }
        let mut child = [[0.0; 6]; 6];
        for a in 0..6 {
            let b0 = if t == s { a } else { 0 };
            for b in b0..6 {
                child[a][b] = self.child_entry(6 * t + a, 6 * s + b, touching);
                if t == s {
                    child[b][a] = child[a][b];
                }
            }
        }
        for (k, row) in out.iter_mut().enumerate() {
            for (l, v) in row.iter_mut().enumerate() {
                *v = child[2 * k][2 * l]
                    + child[2 * k][2 * l + 1]
                    + child[2 * k + 1][2 * l]
                    + child[2 * k + 1][2 * l + 1];
            }
        }
        if t == s {
            for k in 0..3 {
                for l in k + 1..3 {
                    out[l][k] = out[k][l];
                }
            }
        }
        out
    }
}

/// Assembles `V^dual` and `V^{P0}` from the bary-level entries chosen exactly
/// as [`assemble_single_layer`] on the bary mesh would, without forming the
/// `6N x 6N` matrix. Work is split over rows of primal pairs in fixed chunks,
/// and accumulation happens in a fixed order, so the result does not depend on
/// the number of threads.
pub fn assemble_projected(
    mesh: &Triangulation,
    bary: &BaryMesh,
    order: usize,
) -> Result<ProjectedOperators> {
    assemble_projected_with(mesh, bary, &*PairQuadrature::cached(order)?)
}

/// [`assemble_projected`] with explicit pair rules.
pub fn assemble_projected_with(
    mesh: &Triangulation,
    bary: &BaryMesh,
    quad: &PairQuadrature,
) -> Result<ProjectedOperators> {
    check_nondegenerate(bary.vertices(), bary.triangles())?;
    let n = mesh.num_triangles();
    let child_corners: Vec<[Point3; 3]> = (0..bary.len()).map(|i| bary.corners(i)).collect();
    let asm = ProjectedAssembler {
        mesh,
        bary,
        quad,
        far: child_points(bary, quad.far_rule()),
        near: child_points(bary, quad.near_rule()),
        far_len: quad.far_rule().len(),
        near_len: quad.near_rule().len(),
        primal: (0..n).map(|t| Bounds::of(&mesh.corners(t))).collect(),
        children: child_corners.iter().map(Bounds::of).collect(),
        child_corners,
    };
    debug_assert!({
        let (a, b) = (mesh.corners(0), mesh.corners(n - 1));
        (asm.primal[0].ratio(&asm.primal[n - 1]) - separation_ratio(&a, &b)).abs() < 1e-12
    });

    let mut vdual = DenseSymMatrix::zeros(mesh.num_vertices());
    let mut vp0 = DenseSymMatrix::zeros(n);
    let tris = mesh.triangles();
    for start in (0..n).step_by(CHUNK) {
        let end = (start + CHUNK).min(n);
        let blocks: Vec<Vec<[[f64; 3]; 3]>> = (start..end)
            .into_par_iter()
            .map(|t| (t..n).map(|s| asm.owner_block(t, s)).collect())
            .collect();
        for (t, row) in (start..end).zip(blocks) {
            for (s, block) in (t..n).zip(row) {
                let total: f64 = block.iter().flatten().sum();
                vp0.set(t, s, total);
                vp0.set(s, t, total);
                for k in 0..3 {
                    for l in 0..3 {
                        let (a, b) = (tris[t][k], tris[s][l]);
                        vdual.add(a, b, block[k][l]);
                        if s != t {
                            vdual.add(b, a, block[k][l]);
                        }
                    }
                }
            }
        }
    }
    Ok(ProjectedOperators { vdual, vp0 })
}
