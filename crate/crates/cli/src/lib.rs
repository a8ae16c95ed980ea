//! Configuration, experiment orchestration and report emission for the
//! `twophase` command-line tool.
//!
//! # Configuration grammar
//!
//! A configuration is flat text with one `key = value` per line; `#` starts
//! a comment. Keys:
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `name` | required | experiment name, `[A-Za-z0-9_-]+` |
//! | `grid.dim`, `grid.radius`, `grid.cells` | `2`, `1`, `256` | box `[-R, R]^d` with `cells` per side |
//! | `problem.aplus`, `problem.aminus` | `constant:2`, `constant:1` | `constant:a`, `hoelder:a0,c,alpha[,x0..]`, `smooth:cosine\|linear,a0,c` |
//! | `problem.lambda` | `0.4` | ellipticity constant |
//! | `problem.boundary` | `twoplane:1,1,0` | `zero`, `saddle`, `affine:c0,g..`, `twoplane:beta,nu..` |
//! | `problem.matrix` | none | `identity`, `diag:d1,d2[,d3]`, `sym:..`, `perturbed:c,alpha,S..` |
//! | `problem.alt_minus` | none | constant matrix replacing `P` in the minus phase matrix of the matrix audit |
//! | `solver.schedule`, `solver.tol`, `solver.max_iters` | `0.2,0.1,0.05,0`, `1e-10`, `200` | continuation widths, Picard tolerance and cap |
//! | `audits` | empty | comma list of audit names, run in order |
//! | `center` | `gamma` | audit center: `gamma` (zero-set vertex nearest the origin) or coordinates |
//! | `acf.radii`, `acf.cbar`, `acf.tol_factor` | `0.1..0.5`, `40`, `1` | monotonicity audit |
//! | `mu.count`, `mu.radius`, `mu.seed`, `mu.tol_constant` | `16`, `0.25`, `20240229`, `0.05` | bump family |
//! | `flux.radius`, `flux.levels`, `flux.tol` | `0.4`, `6,5,4,3,2`, `0.05` | levels in units of `h max\|grad u\|` |
//! | `classify.r_max`, `classify.fraction`, `classify.expect` | `0.5`, `0.25`, `any` | dichotomy |
//! | `lipschitz.radius` | `0.5` | ball about the origin |
//! | `blowup.radius`, `blowup.tol` | `0.25`, `0.05` | rescaling radius and fit deficit tolerance |
//! | `cascade.r0`, `cascade.rbar`, `cascade.alpha`, `cascade.steps` | `0.5`, `0.25`, `0.5`, `4` | flatness cascade |
//! | `envelope.constant` | `1` | envelope constant |
//! | `output.formats` | `json,csv,text` | report formats |

pub mod audits;
pub mod config;
pub mod experiment;
pub mod report;

pub use audits::{AuditKind, Group, ALL_AUDITS};
pub use config::ExperimentConfig;
pub use experiment::{run_experiment, run_sweep, RunReport};
pub use report::{emit_report, parse_formats, write_artifacts, Format};

/// The shipped experiment battery as `(name, config text)`.
pub const SHIPPED: [(&str, &str); 5] = [
    ("twoplane-2d", include_str!("../../../configs/twoplane-2d.conf")),
    ("hoelder-2d", include_str!("../../../configs/hoelder-2d.conf")),
    ("matrix-2d", include_str!("../../../configs/matrix-2d.conf")),
    ("matrix-nonprop-2d", include_str!("../../../configs/matrix-nonprop-2d.conf")),
    ("saddle-2d", include_str!("../../../configs/saddle-2d.conf")),
];

pub fn shipped(name: &str) -> Option<ExperimentConfig> {
    SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| ExperimentConfig::parse(t).expect("shipped configs parse"))
}
