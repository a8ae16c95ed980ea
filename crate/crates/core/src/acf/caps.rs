//! Spherical-cap characteristic constants in two dimensions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Point, ScalarField};
use crate::verdict::Verdict;

/// Samples on the circle `dB_r(z)`.
pub const CIRCLE_SAMPLES: usize = 256;

/// Which phase a cap belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Plus,
    Minus,
}

impl Phase {
    fn sign(self) -> f64 {
        match self {
            Phase::Plus => 1.0,
            Phase::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapResult {
    /// Characteristic constant of the largest arc.
    pub beta: f64,
    /// Angle of the largest arc.
    pub theta: f64,
    /// Number of maximal arcs.
    pub arcs: usize,
    /// The phase covers the whole circle (no Dirichlet boundary, `beta = 0`).
    pub full_circle: bool,
}

impl CapResult {
    pub fn multi_arc(&self) -> bool {
        self.arcs > 1
    }

    /// Principal eigenvalue `lambda = beta (beta + n - 2)` with `n = 2`.
    pub fn lambda(&self) -> f64 {
        self.beta * self.beta
    }
}

/// `beta_+-(r)` from the largest arc of `{+-u > 0}` on `dB_r(z)`:
/// `theta` is the arc angle, `lambda = (pi/theta)^2` and `beta = pi/theta`.
pub fn cap_characteristic(u: &ScalarField, z: &Point, r: f64, phase: Phase) -> Result<CapResult> {
    let grid = u.grid();
    if grid.dim() != 2 {
        return Err(Error::WrongDimension {
            required: 2,
            got: grid.dim(),
        });
    }
    grid.require_ball(z, r)?;
    let m = CIRCLE_SAMPLES;
    let dt = 2.0 * PI / m as f64;
    let vals: Vec<f64> = (0..m)
        .map(|k| {
            let t = k as f64 * dt;
            phase.sign() * u.interpolate(&[z[0] + r * t.cos(), z[1] + r * t.sin(), 0.0])
        })
        .collect();
    let positive = |v: f64| v > 0.0;
    let count = vals.iter().filter(|v| positive(**v)).count();
    if count == 0 {
        return Err(Error::EmptyCap { radius: r });
    }
    if count == m {
        return Ok(CapResult {
            beta: 0.0,
            theta: 2.0 * PI,
            arcs: 1,
            full_circle: true,
        });
    }
    // crossing angles, linearly interpolated between samples
    let mut ups = Vec::new();
    let mut downs = Vec::new();
    for k in 0..m {
        let (a, b) = (vals[k], vals[(k + 1) % m]);
        if positive(a) == positive(b) {
            continue;
        }
        let frac = if a != b { a / (a - b) } else { 0.5 };
        let t = (k as f64 + frac.clamp(0.0, 1.0)) * dt;
        if positive(b) {
            ups.push(t);
        } else {
            downs.push(t);
        }
    }
    // pair each up-crossing with the next down-crossing
    let mut best = 0.0f64;
    for &t_up in &ups {
        let t_down = downs
            .iter()
            .map(|&d| if d > t_up { d } else { d + 2.0 * PI })
            .fold(f64::INFINITY, f64::min);
        best = best.max(t_down - t_up);
    }
    let theta = best.max(1e-300);
    Ok(CapResult {
        beta: PI / theta,
        theta,
        arcs: ups.len(),
        full_circle: false,
    })
}

/// Per-radius `beta_+ + beta_-` with the arc-resolution tolerance `8h/r`.
#[derive(Debug, Clone, PartialEq)]
pub struct FriedlandHayman {
    pub radii: Vec<f64>,
    pub beta_plus: Vec<f64>,
    pub beta_minus: Vec<f64>,
    pub sums: Vec<f64>,
    pub tolerances: Vec<f64>,
    pub verdict: Verdict,
    pub note: String,
}

impl FriedlandHayman {
    /// Largest `|beta_+ + beta_- - 2|` relative to the per-radius tolerance
    /// (at most 1 in the equality case).
    pub fn equality_ratio(&self) -> f64 {
        self.sums
            .iter()
            .zip(&self.tolerances)
            .map(|(s, t)| (s - 2.0).abs() / t)
            .fold(0.0, f64::max)
    }
}

/// Checks `beta_+(r) + beta_-(r) >= 2 - 8h/r` on every radius. A phase
/// missing from some circle makes the verdict NA.
pub fn friedland_hayman_check(u: &ScalarField, z: &Point, radii: &[f64]) -> Result<FriedlandHayman> {
    let h = u.grid().h();
    let mut out = FriedlandHayman {
        radii: radii.to_vec(),
        beta_plus: Vec::new(),
        beta_minus: Vec::new(),
        sums: Vec::new(),
        tolerances: Vec::new(),
        verdict: Verdict::Pass,
        note: String::new(),
    };
    for &r in radii {
        let bp = cap_characteristic(u, z, r, Phase::Plus);
        let bm = cap_characteristic(u, z, r, Phase::Minus);
        let (bp, bm) = match (bp, bm) {
            (Ok(p), Ok(m)) => (p, m),
            (Err(Error::EmptyCap { radius }), _) | (_, Err(Error::EmptyCap { radius })) => {
                out.verdict = Verdict::Na;
                out.note = format!("empty cap at radius {radius}");
                out.beta_plus.clear();
                out.beta_minus.clear();
                out.sums.clear();
                out.tolerances.clear();
                return Ok(out);
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let tol = 8.0 * h / r;
        let sum = bp.beta + bm.beta;
        out.beta_plus.push(bp.beta);
        out.beta_minus.push(bm.beta);
        out.sums.push(sum);
        out.tolerances.push(tol);
        if sum < 2.0 - tol {
            out.verdict = Verdict::Fail;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    #[test]
    fn half_plane_has_beta_one() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0]);
        for r in [0.2, 0.5, 0.9] {
            let c = cap_characteristic(&u, &[0.0; 3], r, Phase::Plus).unwrap();
            assert!((c.beta - 1.0).abs() < 1e-9, "{}", c.beta);
            assert!((c.lambda() - c.beta * c.beta).abs() == 0.0);
            assert!(!c.multi_arc());
        }
    }

    #[test]
    fn quadrant() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0].min(p[1]));
        let bp = cap_characteristic(&u, &[0.0; 3], 0.5, Phase::Plus).unwrap();
        let bm = cap_characteristic(&u, &[0.0; 3], 0.5, Phase::Minus).unwrap();
        assert!((bp.beta - 2.0).abs() < 0.02);
        assert!((bm.beta - 2.0 / 3.0).abs() < 0.01);
        let fh = friedland_hayman_check(&u, &[0.0; 3], &[0.25, 0.5]).unwrap();
        assert_eq!(fh.verdict, Verdict::Pass);
        assert!(fh.sums.iter().all(|s| (s - 8.0 / 3.0).abs() < 0.03));
    }

    #[test]
    fn empty_cap() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let u = ScalarField::constant(g, -1.0);
        assert!(matches!(
            cap_characteristic(&u, &[0.0; 3], 0.5, Phase::Plus),
            Err(Error::EmptyCap { .. })
        ));
        let fh = friedland_hayman_check(&u, &[0.0; 3], &[0.5]).unwrap();
        assert_eq!(fh.verdict, Verdict::Na);
        let full = cap_characteristic(&u, &[0.0; 3], 0.5, Phase::Minus).unwrap();
        assert!(full.full_circle);
    }

    #[test]
    fn needs_dim_two() {
        let g = Grid::new(3, 1.0, 16).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0]);
        assert!(matches!(
            cap_characteristic(&u, &[0.0; 3], 0.5, Phase::Plus),
            Err(Error::WrongDimension { .. })
        ));
    }
}
