use super::model::{sym_eigenvalues, sym_norm, Mat3, MatrixModel};
use crate::acf::{monotonicity_audit, region_energy, AcfOptions, MonotonicityAudit};
use crate::error::{Error, Result};
use crate::field::{CoefficientModel, Grid, Point, Region, ScalarField};
use crate::solver::{BoundaryData, Coefficients, TwoPhaseProblem};
use crate::verdict::Verdict;

/// Problem with conductivities `a+(x) P(x)` and `a-(x) P(x)`. All three
/// models must share the ellipticity constant.
pub fn matrix_problem(
    aplus: CoefficientModel,
    aminus: CoefficientModel,
    p: MatrixModel,
    boundary: BoundaryData,
) -> Result<TwoPhaseProblem> {
    let p = MatrixModel::new(p.kind, p.lambda)?;
    if aplus.lambda != aminus.lambda || aplus.lambda != p.lambda {
        return Err(Error::InvalidModel(format!(
            "ellipticity constants differ: {}, {}, {}",
            aplus.lambda, aminus.lambda, p.lambda
        )));
    }
    let mut problem = TwoPhaseProblem::new(aplus, aminus, boundary, p.lambda)?;
    problem.modulus = problem.modulus.combine(&p.modulus(3));
    problem.matrix = Some(p);
    Ok(problem)
}

fn scaled(m: &Mat3, s: f64) -> Mat3 {
    let mut out = *m;
    out.iter_mut().flatten().for_each(|v| *v *= s);
    out
}

/// `kappa = tr A+ / tr A-` when `||A+ - kappa A-|| <= 1e-10 ||A+||`.
pub fn kappa_check(aplus0: &Mat3, aminus0: &Mat3, dim: usize) -> Result<f64> {
    for m in [aplus0, aminus0] {
        for i in 0..dim {
            for j in 0..i {
                if (m[i][j] - m[j][i]).abs() > 1e-14 * (1.0 + m[i][j].abs()) {
                    return Err(Error::AsymmetricMatrix);
                }
            }
        }
        if sym_eigenvalues(m, dim).iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidArgument("matrix is not positive definite".into()));
        }
    }
    let tr = |m: &Mat3| (0..dim).map(|i| m[i][i]).sum::<f64>();
    let kappa = tr(aplus0) / tr(aminus0);
    let mut diff = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            diff[i][j] = aplus0[i][j] - kappa * aminus0[i][j];
        }
    }
    let residual = sym_norm(&diff, dim);
    if residual <= 1e-10 * sym_norm(aplus0, dim) {
        Ok(kappa)
    } else {
        Err(Error::ProportionalityFailure { residual })
    }
}

/// `(A+(z), A-(z))` of a problem (identity factor for scalar problems).
pub fn phase_matrices(problem: &TwoPhaseProblem, z: &Point) -> (Mat3, Mat3) {
    let p = problem
        .matrix
        .map(|m| m.eval(z))
        .unwrap_or(super::model::IDENTITY);
    (scaled(&p, problem.aplus_at(z)), scaled(&p, problem.aminus_at(z)))
}

#[derive(Debug, Clone)]
pub struct MatrixAcfAudit {
    pub kappa: Option<f64>,
    /// Scalar audit in the original coordinates (absent when NA).
    pub audit: Option<MonotonicityAudit>,
    /// `Phi` after the change of variables `x -> P(z)^(-1/2) x`, reported
    /// only.
    pub metric_phi: Option<Vec<f64>>,
    pub verdict: Verdict,
    pub note: String,
}

/// `P^(-1/2)` of a symmetric positive definite block (identity padding).
fn inv_sqrt(m: &Mat3, dim: usize) -> Mat3 {
    let a = nalgebra::DMatrix::from_fn(dim, dim, |i, j| m[i][j]);
    let e = a.symmetric_eigen();
    let d = nalgebra::DMatrix::from_diagonal(&e.eigenvalues.map(|v| 1.0 / v.sqrt()));
    let r = &e.eigenvectors * d * e.eigenvectors.transpose();
    let mut out = super::model::IDENTITY;
    for i in 0..dim {
        for j in 0..dim {
            out[i][j] = r[(i, j)];
        }
    }
    out
}

/// `Phi` with balls `|P(z)^(-1/2)(x - z)| < r`, quadratic form `P(z)` and
/// the weight in the transformed distance.
pub fn metric_phi(u: &ScalarField, p: &Mat3, z: &Point, radii: &[f64]) -> Result<Vec<f64>> {
    let dim = u.grid().dim();
    let q = inv_sqrt(p, dim);
    let det: f64 = sym_eigenvalues(&q, dim).iter().product();
    let (up, um) = (u.positive_part(), u.negative_part());
    radii
        .iter()
        .map(|&r| {
            let region = Region {
                center: *z,
                radius: r,
                metric: Some(q),
            };
            let ip = det * region_energy(&up, &region, Some(p))?;
            let im = det * region_energy(&um, &region, Some(p))?;
            Ok(ip * im / r.powi(4))
        })
        .collect()
}

/// Monotonicity audit of a matrix-problem solution with phase matrices
/// `phases = (A+(z), A-(z))` (see [`phase_matrices`]). NA when they are not
/// proportional. The metric diagnostic uses the problem's `P(z)`.
pub fn acf_matrix_audit(
    u: &ScalarField,
    problem: &TwoPhaseProblem,
    phases: &(Mat3, Mat3),
    z: &Point,
    radii: &[f64],
    opts: &AcfOptions,
) -> Result<MatrixAcfAudit> {
    let dim = u.grid().dim();
    let kappa = match kappa_check(&phases.0, &phases.1, dim) {
        Ok(k) => k,
        Err(e @ Error::ProportionalityFailure { .. }) => {
            return Ok(MatrixAcfAudit {
                kappa: None,
                audit: None,
                metric_phi: None,
                verdict: Verdict::Na,
                note: e.to_string(),
            });
        }
        Err(e) => return Err(e),
    };
    let audit = monotonicity_audit(u, &problem.modulus, z, radii, opts)?;
    let p = problem.matrix.map(|m| m.eval(z)).unwrap_or(super::model::IDENTITY);
    let metric = metric_phi(u, &p, z, radii)?;
    Ok(MatrixAcfAudit {
        kappa: Some(kappa),
        verdict: audit.verdict,
        audit: Some(audit),
        metric_phi: Some(metric),
        note: format!("kappa = {kappa:.6}; isotropic weight |x - z|^(2-n)"),
    })
}

/// Smallest eigenvalue of the assembled operator (free nodes only) at the
/// iterate `u`, by dense factorization. Intended for small grids.
pub fn min_stencil_eigenvalue(problem: &TwoPhaseProblem, grid: &Grid, u: &ScalarField, eps: f64) -> Result<f64> {
    let coeffs = Coefficients::sample(problem, grid)?;
    let st = coeffs.assembly(eps).stencil(u.values());
    let free: Vec<usize> = (0..grid.len()).filter(|&i| st.free()[i]).collect();
    if free.len() > 2500 {
        return Err(Error::InvalidArgument(format!(
            "{} unknowns is too many for a dense check",
            free.len()
        )));
    }
    let mut k = nalgebra::DMatrix::<f64>::zeros(free.len(), free.len());
    let mut e = vec![0.0; grid.len()];
    let mut col = vec![0.0; grid.len()];
    for (j, &pj) in free.iter().enumerate() {
        e[pj] = 1.0;
        st.apply(&e, &mut col);
        e[pj] = 0.0;
        for (i, &pi) in free.iter().enumerate() {
            k[(i, j)] = col[pi];
        }
    }
    let ev = k.symmetric_eigen().eigenvalues;
    Ok(ev.iter().copied().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixext::model::{MatrixKind, IDENTITY};
    use crate::solver::{continuation_solve, picard_solve};

    fn diag(a: f64, b: f64) -> Mat3 {
        [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, 1.0]]
    }

    #[test]
    fn kappa_cases() {
        assert!((kappa_check(&scaled(&IDENTITY, 2.0), &IDENTITY, 2).unwrap() - 2.0).abs() < 1e-15);
        let p = [[1.5, 0.2, 0.0], [0.2, 0.8, 0.0], [0.0, 0.0, 1.0]];
        let k = kappa_check(&scaled(&p, 1.7), &scaled(&p, 0.9), 2).unwrap();
        assert!((k - 1.7 / 0.9).abs() < 1e-12);
        assert!(matches!(
            kappa_check(&diag(2.0, 1.0), &diag(1.0, 2.0), 2),
            Err(Error::ProportionalityFailure { .. })
        ));
    }

    #[test]
    fn identity_matches_scalar_path() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let scalar = TwoPhaseProblem::two_plane(2.0, 1.0, 1.0, 0.4).unwrap();
        let m = matrix_problem(scalar.aplus, scalar.aminus, MatrixModel::identity(0.4), scalar.boundary.clone()).unwrap();
        let sched = [0.5, 0.25, 0.0];
        let a = continuation_solve(&scalar, &g, &sched, 1e-10).unwrap();
        let b = continuation_solve(&m, &g, &sched, 1e-10).unwrap();
        assert_eq!(a.u, b.u);
    }

    #[test]
    fn constant_matrix_keeps_affine_solution() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let one = CoefficientModel::constant(1.0, 0.4).unwrap();
        let p = MatrixModel::new(MatrixKind::Constant(diag(2.0, 1.0)), 0.4).unwrap();
        let bd = BoundaryData::Affine {
            c0: 0.0,
            grad: [1.0, 0.0, 0.0],
        };
        let prob = matrix_problem(one, one, p, bd).unwrap();
        let s = picard_solve(&prob, &g, 0.0, 1e-10, 20).unwrap();
        let err = (0..g.len()).map(|i| (s.u.get(i) - g.coord(i)[0]).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn perturbed_stencil_is_positive_definite() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let a = CoefficientModel::constant(1.5, 0.4).unwrap();
        let b = CoefficientModel::constant(1.0, 0.4).unwrap();
        let kind: MatrixKind = "perturbed:0.1,0.5,0,1,0".parse().unwrap();
        let prob = matrix_problem(a, b, MatrixModel::new(kind, 0.4).unwrap(), BoundaryData::Saddle).unwrap();
        let u = prob.boundary_field(&g);
        assert!(min_stencil_eigenvalue(&prob, &g, &u, 0.0).unwrap() > 0.0);
    }

    #[test]
    fn non_proportional_is_na() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |p| if p[0] > 0.0 { p[0] / 2.0 } else { p[0] });
        let mut prob = TwoPhaseProblem::two_plane(1.0, 1.0, 1.0, 0.4).unwrap();
        prob.matrix = Some(MatrixModel::new(MatrixKind::Constant(diag(2.0, 1.0)), 0.4).unwrap());
        let radii = [0.2, 0.3, 0.4];
        let phases = phase_matrices(&prob, &[0.0; 3]);
        let a = acf_matrix_audit(&u, &prob, &phases, &[0.0; 3], &radii, &AcfOptions::default()).unwrap();
        assert_eq!(a.kappa, Some(1.0));
        assert_eq!(a.metric_phi.unwrap().len(), 3);
        let bad = (diag(2.0, 1.0), diag(1.0, 2.0));
        let a = acf_matrix_audit(&u, &prob, &bad, &[0.0; 3], &radii, &AcfOptions::default()).unwrap();
        assert_eq!(a.verdict, Verdict::Na);
        assert!(a.audit.is_none());
        assert!(a.note.contains("proportional"), "{}", a.note);
    }
}
