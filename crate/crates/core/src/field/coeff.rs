use std::fmt;
use std::str::FromStr;

use super::grid::{Grid, Point};
use super::scalar::ScalarField;
use crate::error::{Error, Result};

/// Power-law modulus of continuity `omega(r) = omega0 * r^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusOfContinuity {
    pub omega0: f64,
    pub alpha: f64,
}

impl ModulusOfContinuity {
    pub fn new(omega0: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidModel(format!("exponent {alpha} not in (0, 1]")));
        }
        if !(omega0 >= 0.0 && omega0.is_finite()) {
            return Err(Error::InvalidModel(format!("amplitude {omega0} must be >= 0")));
        }
        Ok(ModulusOfContinuity { omega0, alpha })
    }

    pub fn zero() -> Self {
        ModulusOfContinuity {
            omega0: 0.0,
            alpha: 1.0,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.omega0 * r.powf(self.alpha)
    }

    /// `int_0^r omega(rho)/rho drho = omega0 r^alpha / alpha`.
    pub fn dini(&self, r: f64) -> f64 {
        self.omega0 * r.powf(self.alpha) / self.alpha
    }

    /// Pointwise upper envelope of two moduli on `[0, 1]`.
    pub fn combine(&self, other: &ModulusOfContinuity) -> ModulusOfContinuity {
        ModulusOfContinuity {
            omega0: self.omega0 + other.omega0,
            alpha: self.alpha.min(other.alpha),
        }
    }
}

/// Named smooth coefficient profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothProfile {
    /// `a0 + c * prod_k cos(pi x_k / 2)`
    Cosine,
    /// `a0 + c * x_1`
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientKind {
    Constant(f64),
    /// `a0 + c |x - x0|^alpha`
    Hoelder {
        a0: f64,
        c: f64,
        x0: Point,
        alpha: f64,
    },
    Smooth {
        profile: SmoothProfile,
        a0: f64,
        c: f64,
    },
}

/// Scalar conductivity of one phase together with its ellipticity bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientModel {
    pub kind: CoefficientKind,
    pub lambda: f64,
}

impl CoefficientKind {
    pub fn eval(&self, p: &Point) -> f64 {
        match *self {
            CoefficientKind::Constant(a) => a,
            CoefficientKind::Hoelder { a0, c, x0, alpha } => {
                a0 + c * super::grid::dist(p, &x0).powf(alpha)
            }
            CoefficientKind::Smooth { profile, a0, c } => match profile {
                SmoothProfile::Cosine => {
                    let half_pi = std::f64::consts::FRAC_PI_2;
                    a0 + c * (half_pi * p[0]).cos() * (half_pi * p[1]).cos() * (half_pi * p[2]).cos()
                }
                SmoothProfile::Linear => a0 + c * p[0],
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientKind::Constant(_))
    }

    /// Modulus of continuity on a domain of dimension `dim`.
    pub fn modulus(&self, dim: usize) -> ModulusOfContinuity {
        match *self {
            CoefficientKind::Constant(_) => ModulusOfContinuity::zero(),
            // | |x-x0|^a - |y-x0|^a | <= |x-y|^a for a in (0,1]
            CoefficientKind::Hoelder { c, alpha, .. } => ModulusOfContinuity {
                omega0: c.abs(),
                alpha,
            },
            CoefficientKind::Smooth { profile, c, .. } => {
                let lip = match profile {
                    SmoothProfile::Cosine => c.abs() * std::f64::consts::FRAC_PI_2 * (dim as f64).sqrt(),
                    SmoothProfile::Linear => c.abs(),
                };
                ModulusOfContinuity {
                    omega0: lip,
                    alpha: 1.0,
                }
            }
        }
    }
}

impl CoefficientModel {
    pub fn new(kind: CoefficientKind, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidModel(format!("ellipticity {lambda} not in (0, 1]")));
        }
        if let CoefficientKind::Hoelder { alpha, .. } = kind {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidModel(format!("exponent {alpha} not in (0, 1]")));
            }
        }
        Ok(CoefficientModel { kind, lambda })
    }

    pub fn constant(a: f64, lambda: f64) -> Result<Self> {
        Self::new(CoefficientKind::Constant(a), lambda)
    }

    pub fn eval(&self, p: &Point) -> f64 {
        self.kind.eval(p)
    }

    pub fn modulus(&self, dim: usize) -> ModulusOfContinuity {
        self.kind.modulus(dim)
    }

    fn check_value(&self, v: f64, p: &Point) -> Result<()> {
        let (lo, hi) = (self.lambda, 1.0 / self.lambda);
        if v.is_finite() && v >= lo && v <= hi {
            Ok(())
        } else {
            Err(Error::EllipticityViolated {
                value: v,
                at: *p,
                lo,
                hi,
            })
        }
    }
}

/// Nodal values of a coefficient model; every value is checked against
/// `[lambda, 1/lambda]`.
pub fn sample_coefficient(model: &CoefficientModel, grid: &Grid) -> Result<ScalarField> {
    let field = ScalarField::from_fn(*grid, |p| model.eval(p));
    for (i, &v) in field.values().iter().enumerate() {
        model.check_value(v, &grid.coord(i))?;
    }
    Ok(field)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number '{t}': {e}")))
        })
        .collect()
}

/// Model strings:
/// `constant:<a0>`, `hoelder:<a0>,<c>,<alpha>[,<x0_1>,<x0_2>[,<x0_3>]]`,
/// `smooth:<cosine|linear>,<a0>,<c>`.
impl FromStr for CoefficientKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("model '{s}' lacks ':'")))?;
        match head.trim() {
            "constant" => {
                let v = parse_list(rest)?;
                if v.len() != 1 {
                    return Err(Error::Parse(format!("constant model takes one value: '{s}'")));
                }
                Ok(CoefficientKind::Constant(v[0]))
            }
            "hoelder" => {
                let v = parse_list(rest)?;
                if v.len() < 3 || v.len() > 6 {
                    return Err(Error::Parse(format!("hoelder model takes 3-6 values: '{s}'")));
                }
                let mut x0 = [0.0; 3];
                for (k, val) in v[3..].iter().enumerate() {
                    x0[k] = *val;
                }
                Ok(CoefficientKind::Hoelder {
                    a0: v[0],
                    c: v[1],
                    alpha: v[2],
                    x0,
                })
            }
            "smooth" => {
                let (id, nums) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("smooth model needs id and values: '{s}'")))?;
                let profile = match id.trim() {
                    "cosine" => SmoothProfile::Cosine,
                    "linear" => SmoothProfile::Linear,
                    other => return Err(Error::Parse(format!("unknown smooth profile '{other}'"))),
                };
                let v = parse_list(nums)?;
                if v.len() != 2 {
                    return Err(Error::Parse(format!("smooth model takes a0,c: '{s}'")));
                }
                Ok(CoefficientKind::Smooth {
                    profile,
                    a0: v[0],
                    c: v[1],
                })
            }
            other => Err(Error::Parse(format!("unknown model kind '{other}'"))),
        }
    }
}

impl fmt::Display for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientKind::Constant(a) => write!(f, "constant:{a}"),
            CoefficientKind::Hoelder { a0, c, x0, alpha } => {
                write!(f, "hoelder:{a0},{c},{alpha},{},{},{}", x0[0], x0[1], x0[2])
            }
            CoefficientKind::Smooth { profile, a0, c } => {
                let id = match profile {
                    SmoothProfile::Cosine => "cosine",
                    SmoothProfile::Linear => "linear",
                };
                write!(f, "smooth:{id},{a0},{c}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let m = CoefficientModel::constant(2.0, 0.4).unwrap();
        let f = sample_coefficient(&m, &g).unwrap();
        assert!(f.values().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn hoelder_value() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let m = CoefficientModel::new(
            CoefficientKind::Hoelder {
                a0: 1.0,
                c: 0.5,
                x0: [0.0; 3],
                alpha: 0.5,
            },
            0.5,
        )
        .unwrap();
        let f = sample_coefficient(&m, &g).unwrap();
        let idx = g.nearest_node(&[0.25, 0.0, 0.0]);
        assert!((f.get(idx) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn below_lambda_rejected() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let m = CoefficientModel::constant(0.1, 0.5).unwrap();
        assert!(matches!(
            sample_coefficient(&m, &g),
            Err(Error::EllipticityViolated { .. })
        ));
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["constant:2", "hoelder:1,0.25,0.5,0.1,0,0", "smooth:cosine,1.5,0.2"] {
            let k: CoefficientKind = s.parse().unwrap();
            let again: CoefficientKind = k.to_string().parse().unwrap();
            assert_eq!(k, again);
        }
        assert!("bogus:1".parse::<CoefficientKind>().is_err());
        assert!("hoelder:1".parse::<CoefficientKind>().is_err());
    }

    #[test]
    fn hoelder_modulus_bounds_increments() {
        let k = CoefficientKind::Hoelder {
            a0: 1.0,
            c: 0.3,
            x0: [0.1, -0.2, 0.0],
            alpha: 0.5,
        };
        let m = k.modulus(2);
        let pts = [[0.0, 0.0, 0.0], [0.1, -0.2, 0.0], [0.5, 0.3, 0.0], [-0.7, 0.9, 0.0]];
        for a in &pts {
            for b in &pts {
                let d = super::super::grid::dist(a, b);
                assert!((k.eval(a) - k.eval(b)).abs() <= m.eval(d) + 1e-14);
            }
        }
        assert!((m.dini(1.0) - 0.6).abs() < 1e-15);
    }
}
