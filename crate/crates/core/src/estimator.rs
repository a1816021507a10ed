//! Element-wise a posteriori error indicators and Dörfler marking.

use crate::error::{Error, Result};
use crate::geometry;
use crate::mesh::{BaryMesh, Triangulation};
use crate::operators::{Density, DenseSymMatrix, SparseMap, Space};

/// Squared indicators, one per primal triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    values: Vec<f64>,
    total: f64,
}

impl IndicatorField {
    pub fn new(values: Vec<f64>) -> Self {
        let total = values.iter().sum();
        Self { values, total }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sum of the squared indicators.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `η(T)² = diam(T) ‖Φ - IΦ‖²_{L²(T)}`, where `IΦ` is the hat-function
/// interpolant taking the value of the dual cell around each vertex.
pub fn zz_indicators(phi: &Density, mesh: &Triangulation, bary: &BaryMesh) -> Result<IndicatorField> {
    let x = phi.expect(Space::DualP0)?;
    if x.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_vertices(),
            got: x.len(),
        });
    }
    Ok(IndicatorField::new(zz_values(x, mesh, bary)))
}

pub(crate) fn zz_values(x: &[f64], mesh: &Triangulation, bary: &BaryMesh) -> Vec<f64> {
    let mut out = vec![0.0; mesh.num_triangles()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = tri.map(|v| x[v]);
        let centre = (a + b + c) / 3.0;
        let mut sum = 0.0;
        for k in 0..3 {
            let own = [a, b, c][k];
            let next = [a, b, c][(k + 1) % 3];
            let prev = [a, b, c][(k + 2) % 3];
            // IΦ - Φ at the corners of the two children owned by vertex k.
            for (j, corners) in [
                [0.0, 0.5 * (next - own), centre - own],
                [0.0, centre - own, 0.5 * (prev - own)],
            ]
            .iter()
            .enumerate()
            {
                let [g0, g1, g2] = *corners;
                // Edge-midpoint rule, exact for quadratics.
                let m = [0.5 * (g0 + g1), 0.5 * (g1 + g2), 0.5 * (g2 + g0)];
                let area = bary.areas()[6 * t + 2 * k + j];
                sum += area / 3.0 * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
            }
        }
        out[t] = mesh.diam(t) * sum;
    }
    out
}

/// `μ(T)² = diam(T) ‖∇ p_T‖²_{L²(T)}` with `p_T` the local L²-projection of
/// the residual `f - VΦ` onto affine functions, from the residual moments
/// `r = f_p1 - V_p1 E x`.
pub fn residual_indicators(
    phi: &Density,
    mesh: &Triangulation,
    v_p1: &DenseSymMatrix,
    e: &SparseMap,
    f_p1: &[f64],
) -> Result<IndicatorField> {
    let x = phi.expect(Space::PrimalP0)?;
    let n = mesh.num_triangles();
    if x.len() != n || v_p1.dim() != 3 * n || f_p1.len() != 3 * n || e.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: 3 * n,
            got: v_p1.dim(),
        });
    }
    let vx = v_p1.matvec(&e.apply(x));
    let mut out = vec![0.0; n];
    for (t, slot) in out.iter_mut().enumerate() {
        let [a, b, c] = mesh.corners(t);
        let area = mesh.area(t);
        if !(area > 0.0) {
            return Err(Error::SingularLocalMass(t));
        }
        let r = [0, 1, 2].map(|k| f_p1[3 * t + k] - vx[3 * t + k]);
        // Local mass matrix area/12 (1 + δ_ij) has inverse (3/area)(4δ_ij - 1).
        let sum = r[0] + r[1] + r[2];
        let coeff = r.map(|ri| 3.0 / area * (4.0 * ri - sum));
        let grads = geometry::barycentric_gradients(&a, &b, &c);
        let g = grads[0] * coeff[0] + grads[1] * coeff[1] + grads[2] * coeff[2];
        *slot = mesh.diam(t) * area * g.norm_squared();
    }
    Ok(IndicatorField::new(out))
}

/// Smallest set whose squared indicators reach `θ` times the total, taking
/// the largest indicators first (ties by ascending index). Returned sorted.
pub fn dorfler_mark(indicators: &IndicatorField, theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidConfig(format!("theta must lie in (0, 1], got {theta}")));
    }
    let v = indicators.values();
    let total = indicators.total();
    if total <= 0.0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..v.len()).filter(|&i| v[i] > 0.0).collect();
    order.sort_by(|&i, &j| v[j].total_cmp(&v[i]).then(i.cmp(&j)));
    let goal = theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for i in order {
        marked.push(i);
        acc += v[i];
        if acc >= goal {
            break;
        }
    }
    marked.sort_unstable();
    Ok(marked)
}
