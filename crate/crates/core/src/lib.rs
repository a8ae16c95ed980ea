//! Two-phase conductivity-jump solver `div(A(x,u) grad u) = 0` with
//! `A(x,s) = a_-(x) + (a_+(x) - a_-(x)) H(s)`, together with audits of the
//! free boundary `{u = 0}`: the Alt-Caffarelli-Friedman functional,
//! flux balance, the jump measure, blowups and flatness improvement.

pub mod acf;
pub mod blowup;
pub mod error;
pub mod field;
pub mod freeboundary;
pub mod matrixext;
pub mod par;
pub mod rng;
pub mod solver;
pub mod verdict;

pub use error::{Error, Result};
pub use field::{build_grid, Grid, Point, ScalarField};
pub use solver::{continuation_solve, picard_solve, Solution, TwoPhaseProblem};
pub use verdict::{AuditRecord, Verdict};
