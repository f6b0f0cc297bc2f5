//! Numerical core for the one-dimensional viscous Saint-Venant vacuum free
//! boundary problem in Lagrangian coordinates.
//!
//! The fluid occupies a moving interval whose depth vanishes on the
//! boundary. In Lagrangian coordinates the problem becomes a degenerate
//! parabolic system on the fixed interval (0,1),
//!
//! ```text
//! rho0 U_t + (rho0^2 / eta_x^2)_x - (rho0 U_x / eta_x^2)_x = 0,
//! eta_t = U,    (U, eta)|_{t=0} = (u0, id),
//! ```
//!
//! with no boundary conditions: both the evolution weight and the diffusion
//! coefficient vanish at the endpoints, and the Neumann behavior U_x = 0 on
//! the boundary is emergent. The crate provides
//!
//! - a conservative finite-volume, Picard-iterated implicit solver for the
//!   system ([`solver`]),
//! - admissible initial-data families with exact derivatives and
//!   compatibility checks ([`initial`]),
//! - diagnostics for every conserved or dissipated structural quantity:
//!   mass, momentum, energy, Bresch-Desjardins entropy, the effective
//!   velocity and its damped transport law ([`diagnostics`]),
//! - reconstruction of the Eulerian moving-domain solution ([`eulerian`]),
//! - an independent spectral Galerkin oracle for the frozen-coefficient
//!   linearized problem ([`galerkin`]),
//! - manufactured-solution forcing for convergence studies ([`mms`]),
//! - a numerical exerciser for the weighted functional inequalities the
//!   analysis rests on ([`bench`]).

pub mod bench;
pub mod diagnostics;
pub mod eulerian;
pub mod galerkin;
pub mod grid;
pub mod initial;
pub mod jet;
pub mod mms;
pub mod solver;
pub mod tridiag;

pub use grid::{derivative, distance, make_grid, Grid, WeightBase, WeightSpec};
pub use initial::{InitialData, VelocityKind};
pub use solver::{FluidState, SolverConfig, StepReport};
