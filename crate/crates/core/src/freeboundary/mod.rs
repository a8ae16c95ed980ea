//! Free-boundary diagnostics: level sets, the interface measure, flux
//! balance, nondegeneracy and the interior Lipschitz ratio.

pub mod bump;
pub mod classify;
pub mod flux;
pub mod levelset;
pub mod lipschitz;
pub mod mu;

pub use bump::{bump_family, BumpTest};
pub use classify::{classify_point, dyadic_radii, require_on_boundary, Classification, Degeneracy, DEFAULT_THRESHOLD_FRACTION};
pub use flux::{flux_balance, FluxBalance};
pub use levelset::{extract_level_set, perimeter_diagnostic, two_sided_fraction, LevelSetCurve};
pub use lipschitz::{l2_box_norm, lipschitz_audit, LipschitzReport};
pub use mu::{grad_norm, mu_audit, mu_pair, MuAudit, MU_TOL_CONSTANT};
