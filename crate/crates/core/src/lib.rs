//! Adaptive lowest-order Galerkin boundary elements for the electrostatic
//! capacity of closed polyhedral surfaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: closed surface triangulations, newest-vertex bisection, and the
//!   barycentric / dual meshes derived from a primal triangulation.
//! * [`quadrature`]: triangle rules and regularised quadrature for the
//!   weakly singular single-layer kernel on triangle pairs.
//! * [`operators`]: dense single-layer assembly, the sparse projections
//!   between discrete spaces, and the operator-preconditioned capacity system.
//! * [`solver`]: GMRES with an estimator-driven stopping rule, direct solves,
//!   energy norms and condition numbers.
//! * [`estimator`]: ZZ-type and weighted-residual indicators, Dörfler marking.
//! * [`driver`]: the two adaptive loops and convergence-rate fits.
//! * [`io`] and [`cli`]: OFF, VTK and CSV files and the command-line front end.

pub mod cli;
pub mod driver;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod operators;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{BaryMesh, DualMesh, Triangulation};

/// Normalisation of the Laplace fundamental solution, `1 / (4π)`.
pub const INV_FOUR_PI: f64 = 0.25 * std::f64::consts::FRAC_1_PI;
