//! Grids, nodal fields, coefficient models and ball quadrature.

pub mod coeff;
pub mod dump;
pub mod grid;
pub mod quadrature;
pub mod scalar;

pub use coeff::{sample_coefficient, CoefficientKind, CoefficientModel, ModulusOfContinuity, SmoothProfile};
pub use grid::{Grid, Point};
pub use quadrature::{l2_ball_norm, Region, Weight};
pub use scalar::{gradient_field, ScalarField, VectorField};

/// `build_grid(dim, radius, cells_per_side)`.
pub fn build_grid(dim: usize, radius: f64, cells_per_side: usize) -> crate::Result<Grid> {
    Grid::new(dim, radius, cells_per_side)
}
