//! Regularized two-phase solver: smoothed Heaviside, stencil assembly,
//! multigrid-preconditioned CG and the Picard/continuation drivers.

pub mod cg;
pub mod heaviside;
pub mod multigrid;
pub mod picard;
pub mod problem;
pub mod stencil;

pub use heaviside::smoothed_heaviside;
pub use picard::{continuation_solve, picard_solve, solve_schedule, weak_residual, Solution};
pub use problem::{two_plane_value, BoundaryData, TwoPhaseProblem};
pub use stencil::Stencil;

pub(crate) use picard::Coefficients;
