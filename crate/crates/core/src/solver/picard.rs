//! Fixed-point iteration for the regularized problem and continuation in
//! the smoothing width.

use super::cg::{pcg, CgStats};
use super::multigrid::Multigrid;
use super::problem::TwoPhaseProblem;
use super::stencil::{Assembly, Stencil};
use crate::error::{Error, Result};
use crate::field::{sample_coefficient, Grid, ScalarField};
use crate::matrixext::model::Mat3;
use crate::par;

const CG_REL_TOL: f64 = 1e-12;
const CG_MAX_ITERS: usize = 4000;
const INNER_FORCING: f64 = 1e-4;

/// Result of a Picard solve or of a continuation run.
#[derive(Debug, Clone)]
pub struct Solution {
    pub u: ScalarField,
    /// Smoothing width of the last stage (0 for the sharp stage).
    pub epsilon_final: f64,
    /// Picard iterations per stage.
    pub picard_iters: Vec<usize>,
    /// Weak-form residual of the final iterate.
    pub residual: f64,
    /// `max |u^(m+1) - u^m|` per iteration, per stage.
    pub history: Vec<Vec<f64>>,
    /// `||u_k - u_(k+1)||_L2` between consecutive stages.
    pub drifts: Vec<f64>,
    pub max_principle_ok: bool,
    /// Updates nonincreasing after the first three iterations in every stage.
    pub picard_monotone: bool,
    pub cg_iterations: usize,
}

/// Sampled coefficient data shared by all iterations of a solve.
pub(crate) struct Coefficients {
    pub grid: Grid,
    pub aplus: Vec<f64>,
    pub aminus: Vec<f64>,
    pub matrix: Option<Vec<Mat3>>,
    pub with_cross: bool,
}

impl Coefficients {
    pub fn sample(problem: &TwoPhaseProblem, grid: &Grid) -> Result<Coefficients> {
        let aplus = sample_coefficient(&problem.aplus, grid)?.into_values();
        let aminus = sample_coefficient(&problem.aminus, grid)?.into_values();
        let (matrix, with_cross) = match &problem.matrix {
            Some(m) => {
                m.validate_on(grid)?;
                let pm = par::map_range(grid.len(), |i| m.eval(&grid.coord(i)));
                (Some(pm), m.has_cross_terms(grid.dim()))
            }
            None => (None, false),
        };
        Ok(Coefficients {
            grid: *grid,
            aplus,
            aminus,
            matrix,
            with_cross,
        })
    }

    /// Samples without range checks (for diagnostics on arbitrary fields).
    pub fn sample_unchecked(problem: &TwoPhaseProblem, grid: &Grid) -> Coefficients {
        let aplus = par::map_range(grid.len(), |i| problem.aplus.eval(&grid.coord(i)));
        let aminus = par::map_range(grid.len(), |i| problem.aminus.eval(&grid.coord(i)));
        let matrix = problem
            .matrix
            .as_ref()
            .map(|m| par::map_range(grid.len(), |i| m.eval(&grid.coord(i))));
        Coefficients {
            grid: *grid,
            aplus,
            aminus,
            matrix,
            with_cross: problem
                .matrix
                .as_ref()
                .is_some_and(|m| m.has_cross_terms(grid.dim())),
        }
    }

    pub fn assembly(&self, eps: f64) -> Assembly<'_> {
        Assembly {
            grid: self.grid,
            aplus: &self.aplus,
            aminus: &self.aminus,
            matrix: self.matrix.as_deref(),
            with_cross: self.with_cross,
            eps,
        }
    }
}

/// Solves `K x = b` on the free nodes with multigrid-preconditioned CG.
/// `x` enters as the initial guess and must vanish on fixed nodes.
pub(crate) fn solve_box(st: &Stencil, b: &[f64], x: &mut [f64], abs_tol: f64) -> Result<CgStats> {
    let mg = Multigrid::new(st);
    let stats = pcg(
        |v: &[f64], out: &mut [f64]| st.apply(v, out),
        |r: &[f64], z: &mut [f64]| mg.apply(r, z),
        b,
        x,
        abs_tol,
        CG_MAX_ITERS,
    )?;
    if !stats.converged {
        log::warn!(
            "CG stopped at {} iterations with residual {:e} (target {:e})",
            stats.iterations,
            stats.residual,
            abs_tol
        );
    }
    Ok(stats)
}

fn norm2(v: &[f64]) -> f64 {
    par::dot(v, v).sqrt()
}

fn check_eps(eps: f64, grid: &Grid) -> Result<()> {
    let floor = 2.0 * grid.h();
    if eps == 0.0 || eps >= floor * (1.0 - 1e-12) {
        Ok(())
    } else {
        Err(Error::SmoothingBelowFloor { eps, floor })
    }
}

/// Harmonic extension of the boundary data: the Laplace solution with the
/// problem's Dirichlet values.
fn laplace_start(g: &ScalarField) -> Result<(Vec<f64>, f64)> {
    let grid = *g.grid();
    let st = Stencil::laplacian(grid);
    let mut bnd = g.values().to_vec();
    for (i, v) in bnd.iter_mut().enumerate() {
        if !grid.is_boundary(i) {
            *v = 0.0;
        }
    }
    let b: Vec<f64> = st.residual_of(&bnd).iter().map(|v| -v).collect();
    let bn = norm2(&b);
    let mut x = vec![0.0; grid.len()];
    solve_box(&st, &b, &mut x, CG_REL_TOL * bn.max(f64::MIN_POSITIVE))?;
    for (i, v) in x.iter_mut().enumerate() {
        if grid.is_boundary(i) {
            *v = bnd[i];
        }
    }
    Ok((x, bn))
}

struct Stage {
    u: Vec<f64>,
    iters: usize,
    history: Vec<f64>,
    cg_iterations: usize,
}

fn run_stage(
    coeffs: &Coefficients,
    eps: f64,
    tol: f64,
    max_iters: usize,
    phase_independent: bool,
    mut u: Vec<f64>,
) -> Result<Stage> {
    let asm = coeffs.assembly(eps);
    let mut history = Vec::new();
    let mut cg_iterations = 0;
    // reference scale for the linear tolerance: the boundary-driven load
    let mut abs_tol = None;
    for m in 1..=max_iters {
        let st = asm.stencil(&u);
        let tol_lin = *abs_tol.get_or_insert_with(|| {
            let bnd: Vec<f64> = (0..u.len())
                .map(|i| if st.free[i] { 0.0 } else { u[i] })
                .collect();
            CG_REL_TOL * norm2(&st.residual_of(&bnd)).max(f64::MIN_POSITIVE)
        });
        let rhs: Vec<f64> = st.residual_of(&u).iter().map(|v| -v).collect();
        let mut delta = vec![0.0; u.len()];
        // inexact inner solves while the outer update is still large
        let tol_m = if phase_independent {
            tol_lin
        } else {
            tol_lin.max(INNER_FORCING * norm2(&rhs))
        };
        let stats = solve_box(&st, &rhs, &mut delta, tol_m)?;
        cg_iterations += stats.iterations;
        par::axpy(1.0, &delta, &mut u);
        let upd = par::max_range(delta.len(), |i| delta[i].abs());
        history.push(upd);
        log::debug!("eps {eps:e} iteration {m}: update {upd:e}");
        if phase_independent || upd <= tol {
            return Ok(Stage {
                u,
                iters: m,
                history,
                cg_iterations,
            });
        }
    }
    Err(Error::PicardDiverged {
        iterations: max_iters,
        last_update: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

fn monotone_after_three(h: &[f64]) -> bool {
    h.windows(2)
        .skip(3)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-13)
}

fn l2_box(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let vol = grid.h().powi(grid.dim() as i32);
    (par::sum_range(a.len(), |i| (a[i] - b[i]).powi(2)) * vol).sqrt()
}

fn finish(
    problem: &TwoPhaseProblem,
    g: &ScalarField,
    u: Vec<f64>,
    eps: f64,
    stages: Vec<Stage>,
    drifts: Vec<f64>,
) -> Result<Solution> {
    let grid = *g.grid();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..grid.len() {
        if grid.is_boundary(i) {
            lo = lo.min(g.get(i));
            hi = hi.max(g.get(i));
        }
    }
    let slack = 1e-8 * (hi - lo).abs().max(1e-300);
    let max_principle_ok = u.iter().all(|&v| v >= lo - slack && v <= hi + slack);
    let field = ScalarField::new(grid, u)?;
    let residual = weak_residual(&field, problem, eps);
    Ok(Solution {
        u: field,
        epsilon_final: eps,
        picard_iters: stages.iter().map(|s| s.iters).collect(),
        residual,
        picard_monotone: stages.iter().all(|s| monotone_after_three(&s.history)),
        history: stages.iter().map(|s| s.history.clone()).collect(),
        cg_iterations: stages.iter().map(|s| s.cg_iterations).sum(),
        drifts,
        max_principle_ok,
    })
}

/// Picard iteration `u^(m+1) = solve div(A_eps(x, u^m) grad u) = 0` from
/// the harmonic extension of the boundary data.
///
/// `eps = 0` selects the sharp coefficient `A(x, u)` with `H(0) = 0`;
/// otherwise `eps >= 2h` is required.
pub fn picard_solve(
    problem: &TwoPhaseProblem,
    grid: &Grid,
    eps: f64,
    tol: f64,
    max_iters: usize,
) -> Result<Solution> {
    solve_schedule(problem, grid, &[eps], tol, max_iters)
}

/// Runs the Picard solve along a strictly decreasing schedule of smoothing
/// widths, warm-starting each stage from the previous one. A final `0`
/// entry requests the sharp stage.
pub fn continuation_solve(
    problem: &TwoPhaseProblem,
    grid: &Grid,
    schedule: &[f64],
    tol: f64,
) -> Result<Solution> {
    solve_schedule(problem, grid, schedule, tol, 200)
}

/// Continuation with an explicit Picard iteration cap per stage.
pub fn solve_schedule(
    problem: &TwoPhaseProblem,
    grid: &Grid,
    schedule: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<Solution> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty smoothing schedule".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be positive".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(format!(
            "schedule {schedule:?} is not strictly decreasing"
        )));
    }
    for &e in schedule {
        check_eps(e, grid)?;
    }
    let coeffs = Coefficients::sample(problem, grid)?;
    let g = problem.boundary_field(grid);
    let (mut u, _) = laplace_start(&g)?;
    let independent = problem.is_phase_independent();
    let mut stages = Vec::with_capacity(schedule.len());
    let mut drifts = Vec::new();
    for (k, &eps) in schedule.iter().enumerate() {
        let prev = u.clone();
        let stage = run_stage(&coeffs, eps, tol, max_iters, independent, u).map_err(|e| {
            Error::StageFailed {
                stage: k,
                source: Box::new(e),
            }
        })?;
        if k > 0 {
            drifts.push(l2_box(grid, &prev, &stage.u));
        }
        u = stage.u.clone();
        stages.push(stage);
    }
    if drifts.windows(2).any(|w| w[1] > w[0]) {
        log::info!(
            "stage drifts {drifts:?} are not monotone; the continuation limit may depend on the schedule"
        );
    }
    finish(problem, &g, u, *schedule.last().unwrap(), stages, drifts)
}

/// Largest weak-form residual over the interior hat functions,
/// `max_i |sum A_eps(x,u) grad u . grad phi_i|`, divided by
/// `||grad u||_L2 h^(n/2)`. Zero for constant fields.
pub fn weak_residual(u: &ScalarField, problem: &TwoPhaseProblem, eps: f64) -> f64 {
    let grid = *u.grid();
    let coeffs = Coefficients::sample_unchecked(problem, &grid);
    let st = coeffs.assembly(eps).stencil(u.values());
    let r = st.residual_of(u.values());
    let worst = par::max_range(r.len(), |i| r[i].abs());
    if worst == 0.0 {
        return 0.0;
    }
    let energy = Stencil::laplacian(grid).bilinear(u.values(), u.values());
    let denom = energy.sqrt() * grid.h().powf(grid.dim() as f64 / 2.0);
    if denom == 0.0 {
        0.0
    } else {
        worst / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::problem::BoundaryData;

    #[test]
    fn affine_data_reproduced() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let mut p = TwoPhaseProblem::two_plane(1.0, 1.0, 1.0, 0.5).unwrap();
        p.boundary = BoundaryData::Affine {
            c0: 0.0,
            grad: [1.0, 0.0, 0.0],
        };
        let s = picard_solve(&p, &g, 4.0 * g.h(), 1e-10, 50).unwrap();
        assert_eq!(s.picard_iters, vec![1]);
        let err = (0..g.len())
            .map(|i| (s.u.get(i) - g.coord(i)[0]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!(s.residual < 1e-8);
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let mut p = TwoPhaseProblem::two_plane(2.0, 1.0, 1.0, 0.4).unwrap();
        p.boundary = BoundaryData::Zero;
        let s = picard_solve(&p, &g, 0.25, 1e-10, 20).unwrap();
        assert_eq!(s.u.max_abs(), 0.0);
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn schedule_validation() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let p = TwoPhaseProblem::two_plane(2.0, 1.0, 1.0, 0.4).unwrap();
        assert!(continuation_solve(&p, &g, &[], 1e-8).is_err());
        assert!(continuation_solve(&p, &g, &[0.2, 0.3], 1e-8).is_err());
        assert!(matches!(
            picard_solve(&p, &g, 0.01, 1e-8, 10),
            Err(Error::SmoothingBelowFloor { .. })
        ));
    }

    #[test]
    fn sharp_stage_reproduces_two_plane() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let p = TwoPhaseProblem::two_plane(2.0, 1.0, 1.0, 0.4).unwrap();
        let s = continuation_solve(&p, &g, &[0.5, 0.25, 0.125, 0.0], 1e-11).unwrap();
        let err = (0..g.len())
            .map(|i| (s.u.get(i) - p.boundary_value(&g.coord(i))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
        assert!(s.max_principle_ok);
        assert_eq!(s.drifts.len(), 3);
    }
}
