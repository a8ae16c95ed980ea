use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{Grid, ModulusOfContinuity, Point};

pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixKind {
    Constant(Mat3),
    /// `I + c |x - x0|^alpha S` with symmetric `S`.
    PerturbedIdentity {
        c: f64,
        x0: Point,
        alpha: f64,
        s: Mat3,
    },
}

/// Symmetric matrix field `P(x)` multiplying both phase conductivities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixModel {
    pub kind: MatrixKind,
    pub lambda: f64,
}

fn is_symmetric(m: &Mat3, dim: usize) -> bool {
    for i in 0..dim {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-14 * (1.0 + m[i][j].abs()) {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues of the leading `dim x dim` block of a symmetric matrix.
pub fn sym_eigenvalues(m: &Mat3, dim: usize) -> Vec<f64> {
    let a = nalgebra::DMatrix::from_fn(dim, dim, |i, j| m[i][j]);
    a.symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Spectral norm of a symmetric block.
pub fn sym_norm(m: &Mat3, dim: usize) -> f64 {
    sym_eigenvalues(m, dim).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

impl MatrixModel {
    pub fn new(kind: MatrixKind, lambda: f64) -> Result<Self> {
        let sym_ok = match &kind {
            MatrixKind::Constant(m) => is_symmetric(m, 3),
            MatrixKind::PerturbedIdentity { s, alpha, .. } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidModel(format!("exponent {alpha} not in (0, 1]")));
                }
                is_symmetric(s, 3)
            }
        };
        if !sym_ok {
            return Err(Error::AsymmetricMatrix);
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidModel(format!("ellipticity {lambda} not in (0, 1]")));
        }
        Ok(MatrixModel { kind, lambda })
    }

    pub fn identity(lambda: f64) -> Self {
        MatrixModel {
            kind: MatrixKind::Constant(IDENTITY),
            lambda,
        }
    }

    pub fn eval(&self, p: &Point) -> Mat3 {
        match &self.kind {
            MatrixKind::Constant(m) => *m,
            MatrixKind::PerturbedIdentity { c, x0, alpha, s } => {
                let f = c * crate::field::grid::dist(p, x0).powf(*alpha);
                let mut m = IDENTITY;
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += f * s[i][j];
                    }
                }
                m
            }
        }
    }

    /// Whether `P` has nonzero off-diagonal entries somewhere.
    pub fn has_cross_terms(&self, dim: usize) -> bool {
        let m = match &self.kind {
            MatrixKind::Constant(m) => m,
            MatrixKind::PerturbedIdentity { s, c, .. } => {
                if *c == 0.0 {
                    return false;
                }
                s
            }
        };
        (0..dim).any(|i| (0..dim).any(|j| i != j && m[i][j] != 0.0))
    }

    pub fn modulus(&self, dim: usize) -> ModulusOfContinuity {
        match &self.kind {
            MatrixKind::Constant(_) => ModulusOfContinuity::zero(),
            MatrixKind::PerturbedIdentity { c, alpha, s, .. } => ModulusOfContinuity {
                omega0: c.abs() * sym_norm(s, dim),
                alpha: *alpha,
            },
        }
    }

    /// Checks `lambda I <= P(x) <= I / lambda` at every node.
    pub fn validate_on(&self, grid: &Grid) -> Result<()> {
        let dim = grid.dim();
        let check = |p: &Point| -> Result<()> {
            let m = self.eval(p);
            for ev in sym_eigenvalues(&m, dim) {
                if !(ev >= self.lambda && ev <= 1.0 / self.lambda) {
                    return Err(Error::EllipticityViolated {
                        value: ev,
                        at: *p,
                        lo: self.lambda,
                        hi: 1.0 / self.lambda,
                    });
                }
            }
            Ok(())
        };
        match &self.kind {
            MatrixKind::Constant(_) => check(&[0.0; 3]),
            MatrixKind::PerturbedIdentity { .. } => {
                (0..grid.len()).try_for_each(|i| check(&grid.coord(i)))
            }
        }
    }
}

fn parse_nums(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number '{t}': {e}")))
        })
        .collect()
}

fn sym_from(v: &[f64]) -> Result<Mat3> {
    // 3 entries: 2x2 upper triangle (p11,p12,p22); 6 entries: 3x3 (p11,p12,p13,p22,p23,p33)
    match v.len() {
        3 => Ok([[v[0], v[1], 0.0], [v[1], v[2], 0.0], [0.0, 0.0, 1.0]]),
        6 => Ok([[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], v[5]]]),
        n => Err(Error::Parse(format!(
            "symmetric matrix needs 3 (2x2) or 6 (3x3) upper-triangle entries, got {n}"
        ))),
    }
}

/// Matrix model strings:
/// `identity`, `diag:<p11>,<p22>[,<p33>]`,
/// `sym:<upper triangle, row-major>` (3 entries in 2D, 6 in 3D),
/// `perturbed:<c>,<alpha>,<upper triangle of S>` (centered at the origin).
impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" {
            return Ok(MatrixKind::Constant(IDENTITY));
        }
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("matrix model '{s}' lacks ':'")))?;
        let v = parse_nums(rest)?;
        match head.trim() {
            "diag" => {
                if v.len() < 2 || v.len() > 3 {
                    return Err(Error::Parse(format!("diag takes 2 or 3 entries: '{s}'")));
                }
                let mut m = IDENTITY;
                for (k, val) in v.iter().enumerate() {
                    m[k][k] = *val;
                }
                Ok(MatrixKind::Constant(m))
            }
            "sym" => Ok(MatrixKind::Constant(sym_from(&v)?)),
            "perturbed" => {
                if v.len() < 5 {
                    return Err(Error::Parse(format!("perturbed takes c,alpha,S: '{s}'")));
                }
                let mut sm = sym_from(&v[2..])?;
                if v.len() == 5 {
                    sm[2][2] = 0.0;
                }
                Ok(MatrixKind::PerturbedIdentity {
                    c: v[0],
                    alpha: v[1],
                    x0: [0.0; 3],
                    s: sm,
                })
            }
            other => Err(Error::Parse(format!("unknown matrix model '{other}'"))),
        }
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tri = |m: &Mat3| {
            format!(
                "{},{},{},{},{},{}",
                m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]
            )
        };
        match self {
            MatrixKind::Constant(m) => write!(f, "sym:{}", tri(m)),
            MatrixKind::PerturbedIdentity { c, alpha, s, .. } => {
                write!(f, "perturbed:{c},{alpha},{}", tri(s))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let k: MatrixKind = "diag:2,1".parse().unwrap();
        let m = MatrixModel::new(k, 0.4).unwrap();
        assert_eq!(m.eval(&[0.3, 0.1, 0.0])[0][0], 2.0);
        assert!(!m.has_cross_terms(2));

        let k: MatrixKind = "perturbed:0.1,0.5,0,1,0".parse().unwrap();
        let m = MatrixModel::new(k, 0.5).unwrap();
        assert!(m.has_cross_terms(2));
        let p = m.eval(&[0.25, 0.0, 0.0]);
        assert!((p[0][1] - 0.05).abs() < 1e-15);
        assert_eq!(p[0][0], 1.0);
        let again: MatrixKind = k.to_string().parse().unwrap();
        assert_eq!(again, k);
    }

    #[test]
    fn asymmetric_rejected() {
        let mut a = IDENTITY;
        a[0][1] = 0.3;
        assert_eq!(
            MatrixModel::new(MatrixKind::Constant(a), 0.5).unwrap_err(),
            Error::AsymmetricMatrix
        );
    }

    #[test]
    fn ellipticity_check() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let m = MatrixModel::new("diag:2,1".parse().unwrap(), 0.4).unwrap();
        assert!(m.validate_on(&g).is_ok());
        let m = MatrixModel::new("diag:3,1".parse().unwrap(), 0.4).unwrap();
        assert!(m.validate_on(&g).is_err());
    }
}
