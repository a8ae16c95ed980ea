use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{CoefficientModel, Grid, ModulusOfContinuity, Point, ScalarField};
use crate::matrixext::MatrixModel;

type BoundaryFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Dirichlet data on the box boundary.
#[derive(Clone)]
pub enum BoundaryData {
    Zero,
    /// `c0 + grad . x`
    Affine { c0: f64, grad: Point },
    /// Two-plane profile `beta/a+(0) (x.nu)^+ - beta/a-(0) (x.nu)^-`.
    TwoPlane { beta: f64, nu: Point },
    /// `x1 * x2`
    Saddle,
    Custom(BoundaryFn),
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Custom(_) => f.write_str("Custom(..)"),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Display for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Zero => f.write_str("zero"),
            BoundaryData::Affine { c0, grad } => {
                write!(f, "affine:{c0},{},{},{}", grad[0], grad[1], grad[2])
            }
            BoundaryData::TwoPlane { beta, nu } => {
                write!(f, "twoplane:{beta},{},{},{}", nu[0], nu[1], nu[2])
            }
            BoundaryData::Saddle => f.write_str("saddle"),
            BoundaryData::Custom(_) => f.write_str("custom"),
        }
    }
}

/// `beta/a+ (x.nu)^+ - beta/a- (x.nu)^-`.
pub fn two_plane_value(beta: f64, nu: &Point, aplus: f64, aminus: f64, x: &Point) -> f64 {
    let t = crate::field::grid::dot(x, nu);
    if t > 0.0 {
        beta / aplus * t
    } else {
        beta / aminus * t
    }
}

impl BoundaryData {
    pub fn eval(&self, p: &Point, aplus0: f64, aminus0: f64) -> f64 {
        match self {
            BoundaryData::Zero => 0.0,
            BoundaryData::Affine { c0, grad } => c0 + crate::field::grid::dot(grad, p),
            BoundaryData::TwoPlane { beta, nu } => two_plane_value(*beta, nu, aplus0, aminus0, p),
            BoundaryData::Saddle => p[0] * p[1],
            BoundaryData::Custom(f) => f(p),
        }
    }
}

/// Boundary strings: `zero`, `saddle`, `affine:<c0>,<g1>,<g2>[,<g3>]`,
/// `twoplane:<beta>,<nu1>,<nu2>[,<nu3>]` (nu is normalized).
impl FromStr for BoundaryData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "zero" => return Ok(BoundaryData::Zero),
            "saddle" => return Ok(BoundaryData::Saddle),
            _ => {}
        }
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("unknown boundary data '{s}'")))?;
        let v: Vec<f64> = rest
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number '{t}': {e}")))
            })
            .collect::<Result<_>>()?;
        let vec3 = |w: &[f64]| {
            let mut p = [0.0; 3];
            for (k, x) in w.iter().take(3).enumerate() {
                p[k] = *x;
            }
            p
        };
        match head.trim() {
            "affine" if (3..=4).contains(&v.len()) => Ok(BoundaryData::Affine {
                c0: v[0],
                grad: vec3(&v[1..]),
            }),
            "twoplane" if (3..=4).contains(&v.len()) => {
                let nu = vec3(&v[1..]);
                let n = crate::field::grid::norm(&nu);
                if v[0] <= 0.0 || n == 0.0 {
                    return Err(Error::Parse(format!("twoplane needs beta > 0 and nu != 0: '{s}'")));
                }
                Ok(BoundaryData::TwoPlane {
                    beta: v[0],
                    nu: [nu[0] / n, nu[1] / n, nu[2] / n],
                })
            }
            _ => Err(Error::Parse(format!("bad boundary data '{s}'"))),
        }
    }
}

/// Coefficients, optional matrix factor and boundary data of
/// `div(A(x,u) grad u) = 0`.
#[derive(Debug, Clone)]
pub struct TwoPhaseProblem {
    pub aplus: CoefficientModel,
    pub aminus: CoefficientModel,
    pub matrix: Option<MatrixModel>,
    pub boundary: BoundaryData,
    pub lambda: f64,
    pub modulus: ModulusOfContinuity,
}

impl TwoPhaseProblem {
    /// Scalar problem; the modulus is the envelope of both coefficient moduli.
    pub fn new(
        aplus: CoefficientModel,
        aminus: CoefficientModel,
        boundary: BoundaryData,
        lambda: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidModel(format!("ellipticity {lambda} not in (0, 1]")));
        }
        Ok(TwoPhaseProblem {
            aplus,
            aminus,
            matrix: None,
            boundary,
            lambda,
            modulus: aplus.modulus(3).combine(&aminus.modulus(3)),
        })
    }

    /// Constant conductivities and two-plane boundary data with slope `beta`
    /// along `e_1`.
    pub fn two_plane(aplus: f64, aminus: f64, beta: f64, lambda: f64) -> Result<Self> {
        Self::new(
            CoefficientModel::constant(aplus, lambda)?,
            CoefficientModel::constant(aminus, lambda)?,
            BoundaryData::TwoPlane {
                beta,
                nu: [1.0, 0.0, 0.0],
            },
            lambda,
        )
    }

    pub fn with_modulus(mut self, modulus: ModulusOfContinuity) -> Self {
        self.modulus = modulus;
        self
    }

    pub fn aplus_at(&self, p: &Point) -> f64 {
        self.aplus.eval(p)
    }

    pub fn aminus_at(&self, p: &Point) -> f64 {
        self.aminus.eval(p)
    }

    pub fn boundary_value(&self, p: &Point) -> f64 {
        let o = [0.0; 3];
        self.boundary.eval(p, self.aplus.eval(&o), self.aminus.eval(&o))
    }

    /// Boundary data at every node (interior nodes included).
    pub fn boundary_field(&self, grid: &Grid) -> ScalarField {
        let o = [0.0; 3];
        let (ap, am) = (self.aplus.eval(&o), self.aminus.eval(&o));
        let b = self.boundary.clone();
        ScalarField::from_fn(*grid, move |p| b.eval(p, ap, am))
    }

    /// Whether `A(x, s)` does not depend on `s`.
    pub fn is_phase_independent(&self) -> bool {
        self.aplus == self.aminus
            || matches!(
                (self.aplus.kind, self.aminus.kind),
                (crate::field::CoefficientKind::Constant(a), crate::field::CoefficientKind::Constant(b)) if a == b
            )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_boundary() {
        let b: BoundaryData = "twoplane:1,2,0".parse().unwrap();
        match b {
            BoundaryData::TwoPlane { beta, nu } => {
                assert_eq!(beta, 1.0);
                assert_eq!(nu, [1.0, 0.0, 0.0]);
            }
            _ => panic!(),
        }
        assert!("twoplane:0,1,0".parse::<BoundaryData>().is_err());
        assert!("spline".parse::<BoundaryData>().is_err());
        let b: BoundaryData = "affine:1,2,3".parse().unwrap();
        assert_eq!(b.eval(&[1.0, 1.0, 0.0], 1.0, 1.0), 6.0);
    }

    #[test]
    fn two_plane_slopes() {
        let p = TwoPhaseProblem::two_plane(2.0, 1.0, 1.0, 0.4).unwrap();
        assert_eq!(p.boundary_value(&[0.5, 0.3, 0.0]), 0.25);
        assert_eq!(p.boundary_value(&[-0.5, 0.3, 0.0]), -0.5);
    }
}
