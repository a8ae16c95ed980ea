//! Matrix conductivities `a+- (x) P(x)` and the matrix ACF audit.

pub mod audit;
pub mod model;

pub use audit::{
    acf_matrix_audit, kappa_check, matrix_problem, metric_phi, min_stencil_eigenvalue, phase_matrices,
    MatrixAcfAudit,
};
pub use model::{MatrixKind, MatrixModel};
