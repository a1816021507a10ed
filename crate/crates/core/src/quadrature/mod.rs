//! Quadrature on triangles and on pairs of triangles for the single-layer
//! kernel `1 / (4π |x - y|)`.
//!
//! Singular pairs (shared vertex, shared edge, identical) use the
//! relative-coordinate decompositions of Sauter and Schwab, which map the
//! four-dimensional domain onto `[0,1]^4` pieces on which the transformed
//! integrand is analytic. Disjoint pairs use tensor products of triangle
//! rules whose degree depends on the distance-to-size ratio.

mod gauss;
mod pair;
mod singular;
mod triangle;

pub use gauss::{gauss_jacobi, gauss_legendre};
pub use pair::{
    classify_pair, far_field_degree, pair_integral, separation_ratio, PairClass, PairQuadrature,
    PairRule, PairSample,
};
pub use triangle::{triangle_gauss_rule, TriangleRule};
