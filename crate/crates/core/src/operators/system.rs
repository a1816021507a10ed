use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};

use super::maps::surface_curls;
use super::{
    assemble_projected_with, dot, mass_matrix, rhs_moments, stabilization_vector, BoundaryData,
    DenseSymMatrix, SparseMap,
};
use crate::error::{Error, Result};
use crate::mesh::{BaryMesh, DualMesh, Triangulation};
use crate::quadrature::PairQuadrature;

/// Everything needed to solve the dual-space capacity problem on one level
/// and to apply its operator preconditioner.
pub struct CapacitySystem {
    vdual: DenseSymMatrix,
    dreg: DenseSymMatrix,
    mass: SparseMap,
    lu: Lu<usize, f64>,
    stab: Vec<f64>,
    rhs: Vec<f64>,
    cell_areas: Vec<f64>,
}

impl std::fmt::Debug for CapacitySystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CapacitySystem")
            .field("dim", &self.dim())
            .finish_non_exhaustive()
    }
}

/// `Σ_m C_mᵀ V^{P0} C_m + a aᵀ`, where `C_m` holds the curls of the hat
/// functions, constant on each primal triangle.
fn regularized_hypersingular(mesh: &Triangulation, vp0: &DenseSymMatrix, a: &[f64]) -> DenseSymMatrix {
    let curls = surface_curls(mesh);
    let tris = mesh.triangles();
    let mut d = DenseSymMatrix::zeros(mesh.num_vertices());
    for (t, tt) in tris.iter().enumerate() {
        for (s, ts) in tris.iter().enumerate() {
            let v = vp0.get(t, s);
            for k in 0..3 {
                for l in 0..3 {
                    d.add(tt[k], ts[l], v * curls[t][k].dot(&curls[s][l]));
                }
            }
        }
    }
    let n = a.len();
    let data = d.as_mut_slice();
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] += a[i] * a[j];
        }
    }
    // Entry (i, j) and (j, i) accumulate the same products in different
    // order; average out the rounding.
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (data[i * n + j] + data[j * n + i]);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    d
}

fn factorize(mass: &SparseMap) -> Result<Lu<usize, f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = mass
        .triplets()
        .iter()
        .map(|&(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(mass.rows(), mass.cols(), &trip)
        .map_err(|e| Error::SingularMassMatrix(format!("{e:?}")))?;
    m.sp_lu()
        .map_err(|e| Error::SingularMassMatrix(format!("{e:?}")))
}

fn lu_solve(lu: &Lu<usize, f64>, b: &[f64], transpose: bool) -> Vec<f64> {
    let mut x = faer::Mat::from_fn(b.len(), 1, |i, _| b[i]);
    if transpose {
        lu.solve_transpose_in_place(x.as_mut());
    } else {
        lu.solve_in_place(x.as_mut());
    }
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

/// Assembles the system for boundary data `f` (the capacity problem uses
/// `f = 1`).
pub fn build_capacity_system(
    mesh: &Triangulation,
    bary: &BaryMesh,
    dual: &DualMesh,
    order: usize,
    f: &BoundaryData,
) -> Result<CapacitySystem> {
    build_capacity_system_with(mesh, bary, dual, &*PairQuadrature::cached(order)?, f)
}

/// [`build_capacity_system`] with explicit pair rules.
pub fn build_capacity_system_with(
    mesh: &Triangulation,
    bary: &BaryMesh,
    dual: &DualMesh,
    quad: &PairQuadrature,
    f: &BoundaryData,
) -> Result<CapacitySystem> {
    let ops = assemble_projected_with(mesh, bary, quad)?;
    let stab = stabilization_vector(mesh);
    let dreg = regularized_hypersingular(mesh, &ops.vp0, &stab);
    drop(ops.vp0);
    let mass = mass_matrix(mesh, bary, dual);
    let lu = factorize(&mass)?;

    // Round-trip check: a factorization that silently hit a zero pivot
    // cannot reproduce a known solution.
    let probe: Vec<f64> = (0..mass.cols()).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    let back = lu_solve(&lu, &mass.apply(&probe), false);
    let err = probe
        .iter()
        .zip(&back)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if !(err < 1e-8) {
        return Err(Error::SingularMassMatrix(format!(
            "factorization round-trip error {err:e}"
        )));
    }

    Ok(CapacitySystem {
        vdual: ops.vdual,
        dreg,
        mass,
        lu,
        stab,
        rhs: rhs_moments(f, bary, dual),
        cell_areas: dual.areas().to_vec(),
    })
}

impl CapacitySystem {
    /// Number of dual cells (equal to the number of primal vertices).
    pub fn dim(&self) -> usize {
        self.vdual.dim()
    }

    pub fn vdual(&self) -> &DenseSymMatrix {
        &self.vdual
    }

    pub fn dreg(&self) -> &DenseSymMatrix {
        &self.dreg
    }

    pub fn mass(&self) -> &SparseMap {
        &self.mass
    }

    pub fn stabilization(&self) -> &[f64] {
        &self.stab
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn cell_areas(&self) -> &[f64] {
        &self.cell_areas
    }

    pub fn apply_vdual(&self, x: &[f64]) -> Vec<f64> {
        self.vdual.matvec(x)
    }

    pub fn apply_dreg(&self, x: &[f64]) -> Vec<f64> {
        self.dreg.matvec(x)
    }

    /// `M⁻¹ b`: dual-P0 coefficients from moments against the hat functions.
    pub fn mass_solve(&self, b: &[f64]) -> Vec<f64> {
        lu_solve(&self.lu, b, false)
    }

    /// `M⁻ᵀ b`.
    pub fn mass_solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        lu_solve(&self.lu, b, true)
    }

    /// Dual-P0 coefficients `M⁻¹ D_reg x̃` represented by a preconditioned
    /// iterate.
    pub fn recover(&self, xt: &[f64]) -> Vec<f64> {
        self.mass_solve(&self.apply_dreg(xt))
    }

    /// `M⁻ᵀ V^dual M⁻¹ D_reg x̃`.
    pub fn apply_preconditioned(&self, xt: &[f64]) -> Vec<f64> {
        self.mass_solve_transpose(&self.apply_vdual(&self.recover(xt)))
    }

    /// Right-hand side `M⁻ᵀ f` of the preconditioned system.
    pub fn preconditioned_rhs(&self) -> Vec<f64> {
        self.mass_solve_transpose(&self.rhs)
    }

    /// `⟨V ψ, ψ⟩` for dual-P0 coefficients.
    pub fn energy_sq(&self, x: &[f64]) -> f64 {
        dot(&self.apply_vdual(x), x)
    }
}

/// Rejects dense storage beyond `cap` rows.
pub fn check_dense_cap(rows: usize, cap: usize) -> Result<()> {
    if rows > cap {
        return Err(Error::CapExceeded { rows, cap });
    }
    Ok(())
}
