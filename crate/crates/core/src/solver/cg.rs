use crate::error::{Error, Result};
use crate::par;

/// Outcome of a preconditioned conjugate-gradient run.
#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Preconditioned CG for `K x = b` restricted to the free entries.
///
/// `apply` and `precond` must leave fixed entries at zero. Stops once the
/// residual 2-norm is at most `abs_tol`. A non-positive or non-finite
/// curvature `p^T K p` is reported as a breakdown.
pub fn pcg<A, M>(
    apply: A,
    precond: M,
    b: &[f64],
    x: &mut [f64],
    abs_tol: f64,
    max_iter: usize,
) -> Result<CgStats>
where
    A: Fn(&[f64], &mut [f64]),
    M: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    par::fill_zip(&mut r, b, |ri, bi| bi - ri);
    let mut rnorm = par::dot(&r, &r).sqrt();
    if rnorm <= abs_tol {
        return Ok(CgStats {
            iterations: 0,
            residual: rnorm,
            converged: true,
        });
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = par::dot(&r, &z);
    let mut kp = vec![0.0; n];
    for it in 1..=max_iter {
        apply(&p, &mut kp);
        let pkp = par::dot(&p, &kp);
        if !(pkp > 0.0) || !pkp.is_finite() {
            return Err(Error::LinearSolverBreakdown(format!(
                "curvature p^T K p = {pkp:e} at iteration {it}"
            )));
        }
        let alpha = rz / pkp;
        par::axpy(alpha, &p, x);
        par::axpy(-alpha, &kp, &mut r);
        rnorm = par::dot(&r, &r).sqrt();
        if !rnorm.is_finite() {
            return Err(Error::LinearSolverBreakdown(format!(
                "non-finite residual at iteration {it}"
            )));
        }
        if rnorm <= abs_tol {
            return Ok(CgStats {
                iterations: it,
                residual: rnorm,
                converged: true,
            });
        }
        precond(&r, &mut z);
        let rz_new = par::dot(&r, &z);
        if !(rz_new > 0.0) {
            return Err(Error::LinearSolverBreakdown(format!(
                "preconditioner not positive (r^T z = {rz_new:e}) at iteration {it}"
            )));
        }
        let beta = rz_new / rz;
        rz = rz_new;
        par::xpby(&z, beta, &mut p);
    }
    Ok(CgStats {
        iterations: max_iter,
        residual: rnorm,
        converged: false,
    })
}

/// Right-preconditioned BiCGSTAB for nonsymmetric `K x = b`; same
/// conventions as [`pcg`].
pub fn bicgstab<A, M>(
    apply: A,
    precond: M,
    b: &[f64],
    x: &mut [f64],
    abs_tol: f64,
    max_iter: usize,
) -> Result<CgStats>
where
    A: Fn(&[f64], &mut [f64]),
    M: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    par::fill_zip(&mut r, b, |ri, bi| bi - ri);
    let mut rnorm = par::dot(&r, &r).sqrt();
    if rnorm <= abs_tol {
        return Ok(CgStats {
            iterations: 0,
            residual: rnorm,
            converged: true,
        });
    }
    let rhat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ph = vec![0.0; n];
    let mut sh = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = par::dot(&rhat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return Err(Error::LinearSolverBreakdown(format!("rho = {rho_new:e} at iteration {it}")));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut ph);
        apply(&ph, &mut v);
        let rv = par::dot(&rhat, &v);
        if rv == 0.0 {
            return Err(Error::LinearSolverBreakdown(format!("(r^, v) = 0 at iteration {it}")));
        }
        alpha = rho / rv;
        // r becomes s
        par::axpy(-alpha, &v, &mut r);
        par::axpy(alpha, &ph, x);
        rnorm = par::dot(&r, &r).sqrt();
        if rnorm <= abs_tol {
            return Ok(CgStats {
                iterations: it,
                residual: rnorm,
                converged: true,
            });
        }
        precond(&r, &mut sh);
        apply(&sh, &mut t);
        let tt = par::dot(&t, &t);
        omega = if tt > 0.0 { par::dot(&t, &r) / tt } else { 0.0 };
        if omega == 0.0 {
            return Err(Error::LinearSolverBreakdown(format!("omega = 0 at iteration {it}")));
        }
        par::axpy(omega, &sh, x);
        par::axpy(-omega, &t, &mut r);
        rnorm = par::dot(&r, &r).sqrt();
        if !rnorm.is_finite() {
            return Err(Error::LinearSolverBreakdown(format!(
                "non-finite residual at iteration {it}"
            )));
        }
        if rnorm <= abs_tol {
            return Ok(CgStats {
                iterations: it,
                residual: rnorm,
                converged: true,
            });
        }
    }
    Ok(CgStats {
        iterations: max_iter,
        residual: rnorm,
        converged: false,
    })
}
