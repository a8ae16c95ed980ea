use super::grid::{Grid, Point};
use crate::error::{Error, Result};
use crate::par;

/// Nodal values of a scalar function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

/// One gradient vector per node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    values: Vec<Point>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at node {i}"
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid) -> ScalarField {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> ScalarField {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn<F>(grid: Grid, f: F) -> ScalarField
    where
        F: Fn(&Point) -> f64 + Sync + Send,
    {
        let values = par::map_range(grid.len(), |i| f(&grid.coord(i)));
        ScalarField { grid, values }
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn map<F>(&self, f: F) -> ScalarField
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        ScalarField {
            grid: self.grid,
            values: par::map_slice(&self.values, |&v| f(v)),
        }
    }

    /// `max(u, 0)`.
    pub fn positive_part(&self) -> ScalarField {
        self.map(|v| v.max(0.0))
    }

    /// `max(-u, 0)`.
    pub fn negative_part(&self) -> ScalarField {
        self.map(|v| (-v).max(0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm distance to another field on the same grid.
    pub fn max_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        ScalarField::from_raw(self.grid, values)
    }

    /// Multilinear interpolation; points outside the box are clamped onto it.
    pub fn interpolate(&self, p: &Point) -> f64 {
        let g = &self.grid;
        let s = g.strides();
        let mut lo = 0;
        let mut t = [0.0; 3];
        for a in 0..g.dim() {
            let (i, f) = g.locate1(p[a]);
            lo += i * s[a];
            t[a] = f;
        }
        let mut acc = 0.0;
        for (mask, idx) in g.cell_corners(lo) {
            let mut w = 1.0;
            for (a, ta) in t.iter().enumerate().take(g.dim()) {
                w *= if mask >> a & 1 == 1 { *ta } else { 1.0 - ta };
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        acc
    }

    /// Gradient of the multilinear interpolant at the center of the cell
    /// with lowest corner `lo`: the mean of the `2^(dim-1)` edge differences
    /// along each axis.
    pub fn cell_gradient(&self, lo: usize) -> Point {
        let g = &self.grid;
        let dim = g.dim();
        let scale = 1.0 / ((1usize << (dim - 1)) as f64 * g.h());
        let mut grad = [0.0; 3];
        for (mask, idx) in g.cell_corners(lo) {
            let v = self.values[idx];
            for (a, ga) in grad.iter_mut().enumerate().take(dim) {
                if mask >> a & 1 == 1 {
                    *ga += v;
                } else {
                    *ga -= v;
                }
            }
        }
        for ga in grad.iter_mut().take(dim) {
            *ga *= scale;
        }
        grad
    }
}

impl VectorField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> Point {
        self.values[idx]
    }

    pub fn magnitude(&self, idx: usize) -> f64 {
        super::grid::norm(&self.values[idx])
    }
}

/// Nodal gradient: central differences in the interior, one-sided
/// differences on the box faces.
pub fn gradient_field(u: &ScalarField) -> VectorField {
    let g = *u.grid();
    let s = g.strides();
    let n = g.cells();
    let h = g.h();
    let vals = u.values();
    let values = par::map_range(g.len(), |idx| {
        let ijk = g.unravel(idx);
        let mut grad = [0.0; 3];
        for a in 0..g.dim() {
            grad[a] = if ijk[a] == 0 {
                (vals[idx + s[a]] - vals[idx]) / h
            } else if ijk[a] == n {
                (vals[idx] - vals[idx - s[a]]) / h
            } else {
                (vals[idx + s[a]] - vals[idx - s[a]]) / (2.0 * h)
            };
        }
        grad
    });
    VectorField { grid: g, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_affine_is_exact() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let u = ScalarField::from_fn(g, |p| 3.0 * p[0] - 0.5 * p[1] + 2.0);
        let du = gradient_field(&u);
        for idx in 0..g.len() {
            let d = du.get(idx);
            assert!((d[0] - 3.0).abs() < 1e-12);
            assert!((d[1] + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_square_vanishes_at_origin() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0] * p[0]);
        let o = g.nearest_node(&[0.0; 3]);
        assert_eq!(gradient_field(&u).get(o), [0.0; 3]);
    }

    #[test]
    fn gradient_of_bilinear_at_diagonal_node() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let h = g.h();
        let u = ScalarField::from_fn(g, |p| p[0] * p[1]);
        // ((h)(2h) - (h)(0)) / 2h = h along either axis
        let idx = g.nearest_node(&[h, h, 0.0]);
        let d = gradient_field(&u).get(idx);
        assert!((d[0] - h).abs() < 1e-15);
        assert!((d[1] - h).abs() < 1e-15);
    }

    #[test]
    fn interpolation_reproduces_bilinear() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let u = ScalarField::from_fn(g, |p| 1.0 + p[0] - 2.0 * p[1] + 0.5 * p[0] * p[1]);
        for p in [[0.013, -0.77, 0.0], [0.5, 0.5, 0.0], [-0.999, 0.31, 0.0]] {
            let exact = 1.0 + p[0] - 2.0 * p[1] + 0.5 * p[0] * p[1];
            assert!((u.interpolate(&p) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_gradient_of_kink_on_grid_line() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0].max(0.0));
        let lo = g.nearest_node(&[0.0, 0.0, 0.0]);
        assert_eq!(u.cell_gradient(lo)[0], 1.0);
        let lo = g.nearest_node(&[-g.h(), 0.0, 0.0]);
        assert_eq!(u.cell_gradient(lo)[0], 0.0);
    }

    #[test]
    fn rejects_nan() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let mut v = vec![0.0; g.len()];
        v[3] = f64::NAN;
        assert!(ScalarField::new(g, v).is_err());
    }
}
