use super::rescale::broken_harmonic;
use crate::error::{Error, Result};
use crate::field::grid::{dot, norm};
use crate::field::quadrature::{cell_weights, node_weights};
use crate::field::{Point, Region, ScalarField, Weight};

/// `beta/a+ (x.nu)^+ - beta/a- (x.nu)^-` in coordinates centred at `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPlane {
    pub beta: f64,
    pub nu: Point,
    pub z: Point,
    pub aplus_z: f64,
    pub aminus_z: f64,
}

impl TwoPlane {
    /// Normalizes `nu`; fails unless `beta > 0`, `nu != 0` and both
    /// coefficients are positive.
    pub fn new(beta: f64, nu: Point, z: Point, aplus_z: f64, aminus_z: f64) -> Result<TwoPlane> {
        let n = norm(&nu);
        if !(beta > 0.0) || !(n > 0.0) || !(aplus_z > 0.0) || !(aminus_z > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "two-plane needs beta > 0, nu != 0 and positive coefficients (beta {beta}, |nu| {n})"
            )));
        }
        Ok(TwoPlane {
            beta,
            nu: [nu[0] / n, nu[1] / n, nu[2] / n],
            z,
            aplus_z,
            aminus_z,
        })
    }

    /// Value at the local coordinate `x` (relative to `z`).
    pub fn local(&self, x: &Point) -> f64 {
        let t = dot(x, &self.nu);
        if t > 0.0 {
            self.beta / self.aplus_z * t
        } else {
            self.beta / self.aminus_z * t
        }
    }

    /// Value at the absolute position `p`.
    pub fn value(&self, p: &Point) -> f64 {
        self.local(&[p[0] - self.z[0], p[1] - self.z[1], p[2] - self.z[2]])
    }

    /// Local-coordinate samples on `grid`.
    pub fn field(&self, grid: &crate::field::Grid) -> ScalarField {
        let t = *self;
        ScalarField::from_fn(*grid, move |x| t.local(x))
    }

    pub fn with_nu(&self, nu: Point) -> Result<TwoPlane> {
        TwoPlane::new(self.beta, nu, self.z, self.aplus_z, self.aminus_z)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TwoPlaneFit {
    pub plane: TwoPlane,
    /// `||v - P||_{L2(B_1)}`.
    pub deficit: f64,
    /// False when the Gauss-Newton polish did not improve the initial fit.
    pub polished: bool,
}

fn tangent_basis(nu: &Point, dim: usize) -> Vec<Point> {
    if dim == 2 {
        return vec![[-nu[1], nu[0], 0.0]];
    }
    let pick = if nu[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&pick, nu);
    let t1 = [pick[0] - d * nu[0], pick[1] - d * nu[1], pick[2] - d * nu[2]];
    let n1 = norm(&t1);
    let t1 = [t1[0] / n1, t1[1] / n1, t1[2] / n1];
    let t2 = [
        nu[1] * t1[2] - nu[2] * t1[1],
        nu[2] * t1[0] - nu[0] * t1[2],
        nu[0] * t1[1] - nu[1] * t1[0],
    ];
    vec![t1, t2]
}

struct Sampled {
    pts: Vec<Point>,
    w: Vec<f64>,
    v: Vec<f64>,
}

impl Sampled {
    fn misfit(&self, p: &TwoPlane) -> f64 {
        self.pts
            .iter()
            .zip(&self.w)
            .zip(&self.v)
            .map(|((x, w), v)| w * (v - p.local(x)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn project_beta(&self, p: &TwoPlane) -> Option<TwoPlane> {
        let unit = TwoPlane { beta: 1.0, ..*p };
        let (mut num, mut den) = (0.0, 0.0);
        for ((x, w), v) in self.pts.iter().zip(&self.w).zip(&self.v) {
            let q = unit.local(x);
            num += w * v * q;
            den += w * q * q;
        }
        let beta = num / den;
        (beta > 0.0).then_some(TwoPlane { beta, ..*p })
    }
}

/// Least-squares two-plane fit on `B_1` of a field on the unit grid.
///
/// `nu` is the direction of the mean gradient of the broken-harmonic
/// transform, `beta` its projection; a few damped Gauss-Newton steps in
/// `(beta, nu)` then polish the fit, keeping the best iterate.
pub fn fit_two_plane(v: &ScalarField, aplus_z: f64, aminus_z: f64) -> Result<TwoPlaneFit> {
    let g = *v.grid();
    let dim = g.dim();
    if v.max_abs() == 0.0 {
        return Err(Error::ZeroField);
    }
    let ball = Region::ball([0.0; 3], 1.0);
    let w = broken_harmonic(v, aplus_z, aminus_z);
    let mut mean = [0.0; 3];
    for (lo, wt) in cell_weights(&g, &ball, Weight::Unit)? {
        let d = w.cell_gradient(lo);
        for a in 0..dim {
            mean[a] += wt * d[a];
        }
    }
    if norm(&mean) == 0.0 {
        return Err(Error::ZeroField);
    }
    let nodes = node_weights(&g, &ball)?;
    let s = Sampled {
        pts: nodes.iter().map(|&(i, _)| g.coord(i)).collect(),
        w: nodes.iter().map(|&(_, wt)| wt).collect(),
        v: nodes.iter().map(|&(i, _)| v.get(i)).collect(),
    };
    let start = TwoPlane::new(1.0, mean, [0.0; 3], aplus_z, aminus_z)?;
    let mut best = s.project_beta(&start).ok_or(Error::ZeroField)?;
    let mut best_misfit = s.misfit(&best);
    let initial = best_misfit;
    let np = dim; // beta plus dim-1 tangent coordinates
    for _ in 0..8 {
        let basis = tangent_basis(&best.nu, dim);
        let param = |dp: &[f64]| -> Option<TwoPlane> {
            let mut nu = best.nu;
            for (t, c) in basis.iter().zip(&dp[1..]) {
                for a in 0..3 {
                    nu[a] += c * t[a];
                }
            }
            TwoPlane::new(best.beta + dp[0], nu, [0.0; 3], aplus_z, aminus_z).ok()
        };
        let resid = |p: &TwoPlane| -> Vec<f64> {
            s.pts
                .iter()
                .zip(&s.w)
                .zip(&s.v)
                .map(|((x, w), v)| w.sqrt() * (v - p.local(x)))
                .collect()
        };
        let r0 = resid(&best);
        let step = 1e-6;
        let mut jac = nalgebra::DMatrix::<f64>::zeros(r0.len(), np);
        for j in 0..np {
            let mut dp = vec![0.0; np];
            dp[j] = step;
            let Some(pp) = param(&dp) else { break };
            dp[j] = -step;
            let Some(pm) = param(&dp) else { break };
            let (rp, rm) = (resid(&pp), resid(&pm));
            for i in 0..r0.len() {
                // residual derivative is minus the model derivative
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * step);
            }
        }
        let rv = nalgebra::DVector::from_vec(r0);
        let Ok(delta) = jac.svd(true, true).solve(&(-rv), 1e-12) else { break };
        let mut improved = false;
        let mut lambda = 1.0;
        for _ in 0..6 {
            let dp: Vec<f64> = delta.iter().map(|d| lambda * d).collect();
            if let Some(cand) = param(&dp) {
                let m = s.misfit(&cand);
                if m < best_misfit {
                    best = cand;
                    best_misfit = m;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(TwoPlaneFit {
        plane: best,
        deficit: best_misfit,
        polished: best_misfit < initial || initial == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::rescale::unit_grid;
    use crate::rng::Lcg;

    #[test]
    fn exact_member() {
        let g = unit_grid(2);
        let p = TwoPlane::new(1.0, [1.0, 0.0, 0.0], [0.0; 3], 2.0, 1.0).unwrap();
        let f = fit_two_plane(&p.field(&g), 2.0, 1.0).unwrap();
        assert!(f.deficit <= 1e-6);
        assert!((f.plane.beta - 1.0).abs() < 1e-9);
        assert!((f.plane.nu[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn perturbed_member() {
        let g = unit_grid(2);
        let p = TwoPlane::new(1.0, [1.0, 0.0, 0.0], [0.0; 3], 2.0, 1.0).unwrap();
        let v = ScalarField::from_fn(g, |x| p.local(x) + 0.01 * x[1]);
        let f = fit_two_plane(&v, 2.0, 1.0).unwrap();
        assert!(f.deficit <= 0.02, "{}", f.deficit);
        let d = [f.plane.nu[0] - 1.0, f.plane.nu[1], 0.0];
        assert!(norm(&d) <= 0.05);
    }

    #[test]
    fn zero_rejected() {
        let g = unit_grid(2);
        assert!(matches!(fit_two_plane(&ScalarField::zeros(g), 1.0, 1.0), Err(Error::ZeroField)));
    }

    #[test]
    fn randomized_inverse_pairs() {
        let mut rng = Lcg::new(42);
        for case in 0..20 {
            let dim = if case % 4 == 3 { 3 } else { 2 };
            let g = if dim == 3 { crate::field::Grid::new(3, 1.0, 16).unwrap() } else { unit_grid(2) };
            let mut nu = [rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), 0.0];
            if dim == 3 {
                nu[2] = rng.range(-1.0, 1.0);
            }
            let beta = rng.range(0.2, 3.0);
            let (ap, am) = (rng.range(0.5, 2.0), rng.range(0.5, 2.0));
            let t = TwoPlane::new(beta, nu, [0.0; 3], ap, am).unwrap();
            let f = fit_two_plane(&t.field(&g), ap, am).unwrap();
            assert!(f.deficit <= 1e-6, "case {case}: {}", f.deficit);
            assert!((f.plane.beta - beta).abs() < 1e-6 * beta);
        }
    }
}
