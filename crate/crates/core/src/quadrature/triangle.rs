use super::gauss::{gauss_jacobi, gauss_legendre};
use crate::error::{Error, Result};

/// Quadrature rule on the reference triangle `(0,0), (1,0), (0,1)`.
///
/// Points are the barycentric pairs `(λ1, λ2)`; the physical point is
/// `(1 - λ1 - λ2) p0 + λ1 p1 + λ2 p2`. Weights are positive and sum to one,
/// so an integral over a triangle is `area * Σ w f`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Full barycentric coordinates of point `k`.
    pub fn barycentric(&self, k: usize) -> [f64; 3] {
        let [l1, l2] = self.points[k];
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Rule exact for bivariate polynomials of total degree `degree`.
///
/// Degree 1 is the centroid rule, degree 2 the interior three-point rule,
/// and higher degrees use the collapsed (Stroud conical) product of a
/// Gauss–Jacobi and a Gauss–Legendre rule with `n²` points,
/// `n = ceil((degree + 1) / 2)`.
pub fn triangle_gauss_rule(degree: usize) -> Result<TriangleRule> {
    match degree {
        1 => Ok(TriangleRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![1.0],
            degree,
        }),
        2 => Ok(TriangleRule {
            points: vec![
                [1.0 / 6.0, 1.0 / 6.0],
                [2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0],
            ],
            weights: vec![1.0 / 3.0; 3],
            degree,
        }),
        3..=20 => {
            let n = (degree + 2) / 2;
            let (s, ws) = gauss_jacobi(n, 1.0, 0.0);
            let (t, wt) = gauss_legendre(n);
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for (si, wsi) in s.iter().zip(&ws) {
                for (tj, wtj) in t.iter().zip(&wt) {
                    points.push([*si, (1.0 - si) * tj]);
                    // ws sums to 1/2, the reference area.
                    weights.push(2.0 * wsi * wtj);
                }
            }
            Ok(TriangleRule {
                points,
                weights,
                degree,
            })
        }
        _ => Err(Error::UnsupportedDegree(degree)),
    }
}
