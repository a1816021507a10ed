//! Galerkin matrices for the single-layer operator, sparse transfer maps
//! between the discrete spaces, and the preconditioned capacity system.

mod assembly;
mod maps;
mod system;

pub use assembly::{
    assemble_p1_disc, assemble_p1_disc_with, assemble_projected, assemble_projected_with,
    assemble_single_layer, assemble_single_layer_with, ProjectedOperators,
};
pub use maps::{
    curl_maps, dual_projection, mass_matrix, p1_embedding, primal_projection, rhs_moments,
    stabilization_vector, BoundaryData,
};
pub use system::{build_capacity_system, build_capacity_system_with, check_dense_cap, CapacitySystem};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Discrete function spaces on one mesh level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Piecewise constants on the dual cells, one per primal vertex.
    DualP0,
    /// Piecewise constants on the primal triangles.
    PrimalP0,
    /// Piecewise constants on the barycentric refinement.
    BaryP0,
    /// Continuous piecewise affine hat functions on the primal mesh.
    S1,
    /// Discontinuous piecewise affine functions, three nodal values per
    /// primal triangle.
    P1Disc,
}

/// Coefficient vector tagged with its space.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub space: Space,
    pub coeffs: Vec<f64>,
}

impl Density {
    pub fn new(space: Space, coeffs: Vec<f64>) -> Self {
        Self { space, coeffs }
    }

    pub fn zeros(space: Space, n: usize) -> Self {
        Self::new(space, vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn expect(&self, space: Space) -> Result<&[f64]> {
        if self.space != space {
            return Err(Error::SpaceMismatch {
                expected: space,
                got: self.space,
            });
        }
        Ok(&self.coeffs)
    }
}

/// Dense symmetric matrix stored in full, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseSymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from row-major values; the caller guarantees symmetry.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "matvec dimension");
        self.data
            .par_chunks(self.n.max(1))
            .map(|row| dot(row, x))
            .collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(&self.matvec(x), x)
    }

    /// Largest |A[i,j] - A[j,i]| relative to the largest entry.
    pub fn symmetry_error(&self) -> f64 {
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut err = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                err = err.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        if scale > 0.0 {
            err / scale
        } else {
            err
        }
    }

    /// `Aᵀ self A` for a sparse `A`.
    pub fn congruence(&self, a: &SparseMap) -> DenseSymMatrix {
        assert_eq!(a.rows(), self.n, "congruence dimension");
        let m = a.cols();
        // self * A, column by column of A grouped per row of A.
        let mut sa = vec![0.0; self.n * m];
        for &(r, c, v) in a.triplets() {
            for i in 0..self.n {
                sa[i * m + c] += self.get(i, r) * v;
            }
        }
        let mut out = DenseSymMatrix::zeros(m);
        for &(r, c, v) in a.triplets() {
            for j in 0..m {
                out.add(c, j, v * sa[r * m + j]);
            }
        }
        out
    }

    pub fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sparse matrix in triplet form with unique (row, col) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMap {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl SparseMap {
    /// Sums duplicate entries and orders triplets by (row, col).
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Self {
            rows,
            cols,
            triplets: merged,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "sparse apply dimension");
        let mut y = vec![0.0; self.rows];
        for &(r, c, v) in &self.triplets {
            y[r] += v * x[c];
        }
        y
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "sparse transpose apply dimension");
        let mut y = vec![0.0; self.cols];
        for &(r, c, v) in &self.triplets {
            y[c] += v * x[r];
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for &(r, c, v) in &self.triplets {
            d[r][c] = v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_merges_duplicates() {
        let s = SparseMap::from_triplets(2, 2, vec![(1, 0, 1.0), (0, 1, 2.0), (1, 0, 0.5)]);
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.apply(&[1.0, 1.0]), vec![2.0, 1.5]);
        assert_eq!(s.apply_transpose(&[1.0, 1.0]), vec![1.5, 2.0]);
    }

    #[test]
    fn congruence_matches_dense_product() {
        let a = DenseSymMatrix::from_row_major(3, vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]).unwrap();
        let p = SparseMap::from_triplets(3, 2, vec![(0, 0, 1.0), (1, 0, 1.0), (2, 1, 2.0)]);
        let c = a.congruence(&p);
        // [1 1 0; 0 0 2] A [1 0; 1 0; 0 2]
        assert_eq!(c.as_slice(), &[7.0, 2.0, 2.0, 16.0]);
    }

    #[test]
    fn density_space_check() {
        let d = Density::zeros(Space::DualP0, 3);
        assert!(d.expect(Space::DualP0).is_ok());
        assert!(matches!(d.expect(Space::S1), Err(Error::SpaceMismatch { .. })));
    }
}
