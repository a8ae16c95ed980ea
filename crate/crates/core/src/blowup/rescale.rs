use crate::error::Result;
use crate::field::{l2_ball_norm, Grid, Point, ScalarField};

/// Cells per side of the unit-ball grid `[-5/4, 5/4]^n` (spacing 1/32).
pub const UNIT_CELLS: usize = 80;
/// Half side of the unit-ball grid box.
pub const UNIT_BOX: f64 = 1.25;

/// Grid covering `B_1` with a margin for boundary extrapolation.
pub fn unit_grid(dim: usize) -> Grid {
    Grid::new(dim, UNIT_BOX, UNIT_CELLS).expect("valid unit grid")
}

/// `u(r x + z) / r` sampled on the unit grid (points leaving the source
/// box are clamped onto it).
pub fn zoom(u: &ScalarField, z: &Point, r: f64) -> Result<ScalarField> {
    u.grid().require_ball(z, r)?;
    let unit = unit_grid(u.grid().dim());
    Ok(ScalarField::from_fn(unit, |x| {
        let p = [r * x[0] + z[0], r * x[1] + z[1], r * x[2] + z[2]];
        u.interpolate(&p) / r
    }))
}

/// `u(r x + z) r^(n/2) / ||u||_{L2(B_r(z))}` on the unit grid; the zero
/// field when the normalizing norm vanishes.
pub fn rescale(u: &ScalarField, z: &Point, r: f64) -> Result<ScalarField> {
    let g = u.grid();
    g.require_ball(z, r)?;
    let norm = l2_ball_norm(u, z, r)?;
    let unit = unit_grid(g.dim());
    if norm == 0.0 {
        return Ok(ScalarField::zeros(unit));
    }
    let scale = r.powf(g.dim() as f64 / 2.0) / norm;
    Ok(ScalarField::from_fn(unit, |x| {
        let p = [r * x[0] + z[0], r * x[1] + z[1], r * x[2] + z[2]];
        u.interpolate(&p) * scale
    }))
}

/// `a+ u^+ - a- u^-` nodewise.
pub fn broken_harmonic(u: &ScalarField, aplus: f64, aminus: f64) -> ScalarField {
    u.map(|v| if v > 0.0 { aplus * v } else { aminus * v })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(g: Grid) -> ScalarField {
        ScalarField::from_fn(g, |p| if p[0] > 0.0 { p[0] / 2.0 } else { p[0] })
    }

    #[test]
    fn normalization() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0] * p[0] + 0.3 * p[1] + 0.1);
        let v = rescale(&u, &[0.1, -0.2, 0.0], 0.4).unwrap();
        let n = l2_ball_norm(&v, &[0.0; 3], 1.0).unwrap();
        assert!((n - 1.0).abs() < 0.01, "{n}");
        assert_eq!(rescale(&ScalarField::zeros(g), &[0.0; 3], 0.5).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn two_plane_is_scale_invariant() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        let u = plane(g);
        let a = rescale(&u, &[0.0; 3], 0.5).unwrap();
        let b = rescale(&u, &[0.0; 3], 0.25).unwrap();
        assert!(a.max_diff(&b) < 1e-2);
    }

    #[test]
    fn broken_harmonic_cases() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let u = plane(g);
        let w = broken_harmonic(&u, 2.0, 1.0);
        for i in 0..g.len() {
            assert!((w.get(i) - g.coord(i)[0]).abs() < 1e-15);
        }
        assert_eq!(broken_harmonic(&u, 1.0, 1.0), u);
        let v = ScalarField::from_fn(g, |p| if p[0] > 0.0 { p[0] } else { 2.0 * p[0] });
        let w = broken_harmonic(&v, 2.0, 1.0);
        for i in 0..g.len() {
            assert!((w.get(i) - 2.0 * g.coord(i)[0]).abs() < 1e-15);
        }
    }
}
