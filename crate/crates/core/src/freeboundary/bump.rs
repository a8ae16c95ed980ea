use super::levelset::extract_level_set;
use crate::error::{Error, Result};
use crate::field::grid::dist;
use crate::field::{Grid, Point, ScalarField};
use crate::rng::Lcg;

/// Radial test function `(1 - |x-c|^2/R^2)^3` on `B_R(c)`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpTest {
    pub center: Point,
    pub radius: f64,
}

impl BumpTest {
    pub fn new(center: Point, radius: f64) -> Result<BumpTest> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("bump radius {radius} must be positive")));
        }
        Ok(BumpTest { center, radius })
    }

    pub fn value(&self, p: &Point) -> f64 {
        let s = dist(p, &self.center).powi(2) / (self.radius * self.radius);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - s).powi(3)
        }
    }

    /// Nodal samples; fails unless the support lies strictly inside the box.
    pub fn field(&self, grid: &Grid) -> Result<ScalarField> {
        self.check_inside(grid)?;
        let b = *self;
        Ok(ScalarField::from_fn(*grid, move |p| b.value(p)))
    }

    pub fn check_inside(&self, grid: &Grid) -> Result<()> {
        if self.contained(grid) {
            Ok(())
        } else {
            Err(Error::BallOutsideDomain {
                center: self.center,
                radius: self.radius,
            })
        }
    }

    fn contained(&self, grid: &Grid) -> bool {
        (0..grid.dim()).all(|a| self.center[a].abs() + self.radius < grid.radius() - 0.5 * grid.h())
    }

    /// `int_{-R}^{R} profile(t) dt = 32 R / 35`.
    pub fn line_integral(&self) -> f64 {
        32.0 * self.radius / 35.0
    }
}

/// `count` bumps of the given radius centred at vertices of `{u = 0}`,
/// drawn with the seeded LCG among the vertices whose bump fits in the box.
/// Empty when the zero set is empty.
pub fn bump_family(u: &ScalarField, count: usize, radius: f64, seed: u64) -> Result<Vec<BumpTest>> {
    let grid = u.grid();
    let curve = extract_level_set(u, 0.0);
    let mut centers: Vec<Point> = Vec::new();
    for p in curve.vertices() {
        let b = BumpTest::new(*p, radius)?;
        if b.contained(grid) && !centers.iter().any(|c| dist(c, p) < 1e-12) {
            centers.push(*p);
        }
    }
    if centers.is_empty() {
        return Ok(Vec::new());
    }
    let mut rng = Lcg::new(seed);
    (0..count)
        .map(|_| {
            let k = ((rng.uniform() * centers.len() as f64) as usize).min(centers.len() - 1);
            BumpTest::new(centers[k], radius)
        })
        .collect()
}
