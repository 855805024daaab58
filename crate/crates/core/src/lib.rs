//! Spectral library for prescribed curvature problems of conformally
//! covariant operators on round spheres, in the zonal (rotationally
//! symmetric) reduction.
//!
//! The pipeline: Gauss-Jacobi quadrature and an orthonormal zonal-harmonic
//! basis ([`zonal`]), the operator as a diagonal spectral multiplier
//! ([`gjms`]), closed-form concentration profiles with sharp-constant and
//! interaction diagnostics ([`bubble`]), a subcritical continuation solver
//! with concentration detection ([`solver`]), a conformal-vector-field
//! admissibility probe ([`obstruction`]), and a config/report layer for the
//! `qcurv` CLI ([`config`], [`scenario`], [`report`]).

pub mod bubble;
pub mod config;
pub mod error;
pub mod gjms;
pub mod obstruction;
pub mod quadrature;
pub mod radial;
pub mod report;
pub mod scenario;
pub mod solver;
pub mod sphere;
pub mod zonal;

pub use error::{QcurvError, Result};
pub use solver::SymmetryGroup;
pub use sphere::SphereContext;
pub use zonal::{build_grid, ZonalField, ZonalGrid};
