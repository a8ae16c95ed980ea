use crate::error::{Error, Result};
use crate::field::grid::dist;
use crate::field::{l2_ball_norm, Point, ScalarField};

/// Default threshold as a fraction of `q(r_max)`.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    Nondegenerate,
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub kind: Degeneracy,
    pub radii: Vec<f64>,
    /// `q(r) = ||u||_{L2(B_r)} / r^(n/2 + 1)`.
    pub q: Vec<f64>,
    pub threshold: f64,
}

/// `r_max, r_max/2, ...` down to (and including) the last value `>= 8h`.
pub fn dyadic_radii(r_max: f64, h: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = r_max;
    while r >= 8.0 * h * (1.0 - 1e-12) {
        out.push(r);
        r *= 0.5;
    }
    out
}

/// Fails with `NotOnBoundary` when every node within `2h` of `z` has the
/// same strict sign.
pub fn require_on_boundary(u: &ScalarField, z: &Point) -> Result<()> {
    let g = u.grid();
    let h = g.h();
    let c = g.unravel(g.nearest_node(z));
    let (mut pos, mut neg) = (false, false);
    let span = |a: usize| if a < g.dim() { -3isize..=3 } else { 0..=0 };
    for dk in span(2) {
        for dj in span(1) {
            for di in span(0) {
                let ijk = [c[0] as isize + di, c[1] as isize + dj, c[2] as isize + dk];
                if (0..g.dim()).any(|a| ijk[a] < 0 || ijk[a] > g.cells() as isize) {
                    continue;
                }
                let idx = g.index([ijk[0] as usize, ijk[1] as usize, ijk[2] as usize]);
                if dist(&g.coord(idx), z) > 2.0 * h * (1.0 + 1e-12) {
                    continue;
                }
                let v = u.get(idx);
                pos |= v >= 0.0;
                neg |= v <= 0.0;
            }
        }
    }
    if pos && neg {
        Ok(())
    } else {
        Err(Error::NotOnBoundary { at: *z })
    }
}

/// Nondegenerate when `min_r q(r) >= fraction * q(r_max)` and `q(r_max) > 0`.
pub fn classify_point(u: &ScalarField, z: &Point, radii: &[f64], fraction: f64) -> Result<Classification> {
    let g = u.grid();
    if radii.is_empty() {
        return Err(Error::InvalidArgument("empty radius list".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("threshold fraction {fraction} not in (0, 1]")));
    }
    for &r in radii {
        if r < 8.0 * g.h() * (1.0 - 1e-12) {
            return Err(Error::RadiusTooSmall { radius: r, h: g.h() });
        }
        g.require_ball(z, r)?;
    }
    require_on_boundary(u, z)?;
    let expo = g.dim() as f64 / 2.0 + 1.0;
    let q = radii
        .iter()
        .map(|&r| Ok(l2_ball_norm(u, z, r)? / r.powf(expo)))
        .collect::<Result<Vec<f64>>>()?;
    let imax = (0..radii.len())
        .max_by(|&a, &b| radii[a].total_cmp(&radii[b]))
        .unwrap();
    let threshold = fraction * q[imax];
    let qmin = q.iter().copied().fold(f64::INFINITY, f64::min);
    let kind = if q[imax] > 0.0 && qmin >= threshold {
        Degeneracy::Nondegenerate
    } else {
        Degeneracy::Degenerate
    };
    Ok(Classification {
        kind,
        radii: radii.to_vec(),
        q,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    #[test]
    fn plane_and_saddle() {
        let g = Grid::new(2, 1.0, 256).unwrap();
        let radii = dyadic_radii(0.5, g.h());
        assert_eq!(radii.len(), 4);
        let plane = ScalarField::from_fn(g, |p| if p[0] > 0.0 { p[0] / 2.0 } else { p[0] });
        let c = classify_point(&plane, &[0.0; 3], &radii, DEFAULT_THRESHOLD_FRACTION).unwrap();
        assert_eq!(c.kind, Degeneracy::Nondegenerate);
        let spread = c.q.iter().copied().fold(0.0, f64::max) / c.q.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.02);
        let saddle = ScalarField::from_fn(g, |p| p[0] * p[1]);
        let c = classify_point(&saddle, &[0.0; 3], &radii, DEFAULT_THRESHOLD_FRACTION).unwrap();
        assert_eq!(c.kind, Degeneracy::Degenerate);
    }

    #[test]
    fn interior_point_rejected() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0]);
        let r = classify_point(&u, &[0.5, 0.0, 0.0], &[0.25], DEFAULT_THRESHOLD_FRACTION);
        assert!(matches!(r, Err(Error::NotOnBoundary { .. })));
    }
}
