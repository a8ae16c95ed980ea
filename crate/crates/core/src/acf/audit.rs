use std::fmt::Write as _;

use super::caps::{cap_characteristic, Phase};
use super::dini::modulus_psi_g;
use super::energy::{acf_phi, weighted_energy};
use crate::error::{Error, Result};
use crate::field::{l2_ball_norm, ModulusOfContinuity, Point, ScalarField};
use crate::verdict::Verdict;

/// Default `c0`; the correction constant defaults to `4 c0`.
pub const DEFAULT_C0: f64 = 10.0;

/// Sampled `r -> (I+, I-, Phi, e^(cbar g) Phi, beta+, beta-)` about a center.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialReport {
    pub center: Point,
    pub radii: Vec<f64>,
    pub iplus: Vec<f64>,
    pub iminus: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_corrected: Vec<f64>,
    /// Only in dimension 2; `NaN` where the phase misses the circle.
    pub beta_plus: Option<Vec<f64>>,
    pub beta_minus: Option<Vec<f64>>,
    pub cbar: f64,
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        "NA".to_string()
    }
}

impl RadialReport {
    /// Re-derives `phi = r^-4 I+ I-` from the stored fields.
    pub fn is_consistent(&self) -> bool {
        self.radii
            .iter()
            .zip(self.iplus.iter().zip(&self.iminus))
            .zip(&self.phi)
            .all(|((r, (a, b)), p)| a * b / r.powi(4) == *p)
    }

    /// CSV with header `r,Iplus,Iminus,phi,phi_corrected,beta_plus,beta_minus`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,Iplus,Iminus,phi,phi_corrected,beta_plus,beta_minus\n");
        for k in 0..self.radii.len() {
            let bp = self.beta_plus.as_ref().map_or(f64::NAN, |b| b[k]);
            let bm = self.beta_minus.as_ref().map_or(f64::NAN, |b| b[k]);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_num(self.radii[k]),
                fmt_num(self.iplus[k]),
                fmt_num(self.iminus[k]),
                fmt_num(self.phi[k]),
                fmt_num(self.phi_corrected[k]),
                fmt_num(bp),
                fmt_num(bm)
            );
        }
        out
    }
}

/// Checks the radius list: strictly increasing, `>= 4h`, `<= R - 2h`, and
/// every ball inside the box.
pub fn validate_radii(u: &ScalarField, z: &Point, radii: &[f64]) -> Result<()> {
    let g = u.grid();
    let h = g.h();
    if radii.is_empty() {
        return Err(Error::InvalidArgument("empty radius list".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
    }
    for &r in radii {
        if r < 4.0 * h * (1.0 - 1e-12) {
            return Err(Error::RadiusTooSmall { radius: r, h });
        }
        if r > g.radius() - 2.0 * h + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "radius {r} exceeds domain radius minus 2h"
            )));
        }
        g.require_ball(z, r)?;
    }
    Ok(())
}

fn beta_or_nan(u: &ScalarField, z: &Point, r: f64, phase: Phase) -> Result<f64> {
    match cap_characteristic(u, z, r, phase) {
        Ok(c) => Ok(c.beta),
        Err(Error::EmptyCap { .. }) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

/// Builds the radial report of `u` about `z`.
pub fn radial_report(
    u: &ScalarField,
    z: &Point,
    radii: &[f64],
    modulus: &ModulusOfContinuity,
    cbar: f64,
) -> Result<RadialReport> {
    validate_radii(u, z, radii)?;
    let up = u.positive_part();
    let um = u.negative_part();
    let mut rep = RadialReport {
        center: *z,
        radii: radii.to_vec(),
        iplus: Vec::new(),
        iminus: Vec::new(),
        phi: Vec::new(),
        phi_corrected: Vec::new(),
        beta_plus: (u.grid().dim() == 2).then(Vec::new),
        beta_minus: (u.grid().dim() == 2).then(Vec::new),
        cbar,
    };
    for &r in radii {
        let ip = weighted_energy(&up, z, r)?;
        let im = weighted_energy(&um, z, r)?;
        let phi = ip * im / r.powi(4);
        let (_, g) = modulus_psi_g(modulus, r)?;
        rep.iplus.push(ip);
        rep.iminus.push(im);
        rep.phi.push(phi);
        rep.phi_corrected.push((cbar * g).exp() * phi);
        if let Some(b) = rep.beta_plus.as_mut() {
            b.push(beta_or_nan(u, z, r, Phase::Plus)?);
        }
        if let Some(b) = rep.beta_minus.as_mut() {
            b.push(beta_or_nan(u, z, r, Phase::Minus)?);
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfOptions {
    pub cbar: f64,
    /// Multiplier of `h^(1/2) max Phi` in the monotonicity tolerance.
    pub tol_factor: f64,
}

impl Default for AcfOptions {
    fn default() -> Self {
        AcfOptions {
            cbar: 4.0 * DEFAULT_C0,
            tol_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityAudit {
    pub report: RadialReport,
    /// Successive differences of the corrected curve.
    pub differences: Vec<f64>,
    pub delta_tol: f64,
    /// Smallest `cbar >= 0` making the sampled corrected curve nondecreasing
    /// (infinite when no correction can, e.g. a decrease with `g` flat).
    pub min_cbar: f64,
    /// `Phi(r) / (||u+||^2 ||u-||^2)` on the largest ball about `z` of radius <= 1.
    pub bound_ratios: Vec<f64>,
    pub bound_max: f64,
    pub bound_radius: f64,
    pub verdict: Verdict,
}

/// Smallest nonnegative `c` with `e^(c g_i) Phi_i` nondecreasing.
pub fn minimal_cbar(phi: &[f64], g: &[f64]) -> f64 {
    let mut c = 0.0f64;
    for i in 0..phi.len().saturating_sub(1) {
        let (a, b) = (phi[i], phi[i + 1]);
        if b >= a {
            continue;
        }
        let dg = g[i + 1] - g[i];
        if dg <= 0.0 || b <= 0.0 {
            return f64::INFINITY;
        }
        c = c.max((a / b).ln() / dg);
    }
    c
}

/// Monotonicity of `r -> e^(cbar g(r)) Phi(r)` with tolerance
/// `tol_factor h^(1/2) max Phi`, plus the bound ratio of `Phi` against the
/// phase norms.
pub fn monotonicity_audit(
    u: &ScalarField,
    modulus: &ModulusOfContinuity,
    z: &Point,
    radii: &[f64],
    opts: &AcfOptions,
) -> Result<MonotonicityAudit> {
    let report = radial_report(u, z, radii, modulus, opts.cbar)?;
    let h = u.grid().h();
    let max_phi = report.phi.iter().cloned().fold(0.0, f64::max);
    let delta_tol = opts.tol_factor * h.sqrt() * max_phi;
    let differences: Vec<f64> = report
        .phi_corrected
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let gs: Vec<f64> = radii
        .iter()
        .map(|&r| modulus_psi_g(modulus, r).map(|x| x.1))
        .collect::<Result<_>>()?;
    let min_cbar = minimal_cbar(&report.phi, &gs);

    let g = u.grid();
    let fit = (0..g.dim())
        .map(|a| g.radius() - z[a].abs())
        .fold(f64::INFINITY, f64::min);
    let rho = fit.min(1.0);
    let np = l2_ball_norm(&u.positive_part(), z, rho)?;
    let nm = l2_ball_norm(&u.negative_part(), z, rho)?;
    let denom = np * np * nm * nm;
    let bound_ratios: Vec<f64> = report
        .phi
        .iter()
        .map(|p| if denom > 0.0 { p / denom } else { 0.0 })
        .collect();
    let bound_max = bound_ratios.iter().cloned().fold(0.0, f64::max);
    let verdict = Verdict::from_bool(differences.iter().all(|d| *d >= -delta_tol));
    Ok(MonotonicityAudit {
        report,
        differences,
        delta_tol,
        min_cbar,
        bound_ratios,
        bound_max,
        bound_radius: rho,
        verdict,
    })
}

/// `Phi(r)` for the phases of `u`.
pub fn phi_of(u: &ScalarField, z: &Point, r: f64) -> Result<f64> {
    acf_phi(&u.positive_part(), &u.negative_part(), z, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    #[test]
    fn two_plane_report() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        let u = ScalarField::from_fn(g, |p| if p[0] > 0.0 { 0.5 * p[0] } else { p[0] });
        let radii = [0.1, 0.2, 0.3, 0.4, 0.5];
        let a = monotonicity_audit(&u, &ModulusOfContinuity::zero(), &[0.0; 3], &radii, &AcfOptions::default())
            .unwrap();
        assert!(a.report.is_consistent());
        assert_eq!(a.verdict, Verdict::Pass);
        let target = std::f64::consts::PI.powi(2) / 16.0;
        for p in &a.report.phi {
            assert!((p - target).abs() / target < 0.04);
        }
        let csv = a.report.to_csv();
        assert!(csv.starts_with("r,Iplus,Iminus,phi,phi_corrected,beta_plus,beta_minus\n"));
        assert_eq!(csv.lines().count(), 6);
        assert!(a.bound_max > 0.0 && a.bound_max.is_finite());
    }

    #[test]
    fn vanishing_phase_is_trivially_monotone() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |p| -1.0 - p[0] * p[0]);
        let a = monotonicity_audit(&u, &ModulusOfContinuity::zero(), &[0.0; 3], &[0.2, 0.4], &AcfOptions::default())
            .unwrap();
        assert!(a.report.phi.iter().all(|p| *p == 0.0));
        assert_eq!(a.verdict, Verdict::Pass);
        assert!(a.report.to_csv().contains("NA"));
    }

    #[test]
    fn minimal_correction() {
        assert_eq!(minimal_cbar(&[1.0, 2.0, 3.0], &[0.0, 0.1, 0.2]), 0.0);
        let c = minimal_cbar(&[1.0, 0.5], &[0.0, 0.1]);
        assert!((c - 2f64.ln() / 0.1).abs() < 1e-12);
        assert!(minimal_cbar(&[1.0, 0.5], &[0.0, 0.0]).is_infinite());
    }

    #[test]
    fn radii_validation() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0]);
        let m = ModulusOfContinuity::zero();
        let o = AcfOptions::default();
        assert!(monotonicity_audit(&u, &m, &[0.0; 3], &[0.3, 0.2], &o).is_err());
        assert!(monotonicity_audit(&u, &m, &[0.0; 3], &[0.01], &o).is_err());
        assert!(monotonicity_audit(&u, &m, &[0.0; 3], &[0.99], &o).is_err());
    }
}
