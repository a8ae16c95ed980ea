//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Keys are dotted (`grid.cells`, `acf.radii`, ...). Unknown keys are an
//! error so that typos never pass silently.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use twophase::field::{CoefficientKind, CoefficientModel, Grid};
use twophase::matrixext::model::Mat3;
use twophase::matrixext::{matrix_problem, MatrixKind, MatrixModel};
use twophase::solver::{BoundaryData, TwoPhaseProblem};

use crate::audits::AuditKind;

/// Every accepted key with its default (empty means required or absent).
const KEYS: &[(&str, &str)] = &[
    ("name", ""),
    ("grid.dim", "2"),
    ("grid.radius", "1"),
    ("grid.cells", "256"),
    ("problem.aplus", "constant:2"),
    ("problem.aminus", "constant:1"),
    ("problem.lambda", "0.4"),
    ("problem.boundary", "twoplane:1,1,0"),
    ("problem.matrix", ""),
    ("problem.alt_minus", ""),
    ("solver.schedule", "0.2,0.1,0.05,0"),
    ("solver.tol", "1e-10"),
    ("solver.max_iters", "200"),
    ("audits", ""),
    ("center", "gamma"),
    ("acf.radii", "0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5"),
    ("acf.cbar", "40"),
    ("acf.tol_factor", "1"),
    ("mu.count", "16"),
    ("mu.radius", "0.25"),
    ("mu.seed", "20240229"),
    ("mu.tol_constant", "0.05"),
    ("flux.radius", "0.4"),
    ("flux.levels", "6,5,4,3,2"),
    ("flux.tol", "0.05"),
    ("classify.r_max", "0.5"),
    ("classify.fraction", "0.25"),
    ("classify.expect", "any"),
    ("lipschitz.radius", "0.5"),
    ("blowup.radius", "0.25"),
    ("blowup.tol", "0.05"),
    ("cascade.r0", "0.5"),
    ("cascade.rbar", "0.25"),
    ("cascade.alpha", "0.5"),
    ("cascade.steps", "4"),
    ("envelope.constant", "1"),
    ("output.formats", "json,csv,text"),
];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub dim: usize,
    pub radius: f64,
    pub cells: usize,
    pub aplus: CoefficientKind,
    pub aminus: CoefficientKind,
    pub lambda: f64,
    pub boundary: BoundaryData,
    pub matrix: Option<MatrixKind>,
    /// Replacement for `A-(z)` in the matrix audit (non-proportional pairs).
    pub alt_minus: Option<Mat3>,
    pub schedule: Vec<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub audits: Vec<AuditKind>,
    /// Resolved values of every key, defaults included.
    pub values: BTreeMap<String, String>,
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| anyhow!("{key}: bad entry '{t}': {e}")))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| anyhow!("{key}: bad value '{s}': {e}"))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values: BTreeMap<String, String> =
            KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected 'key = value'", n + 1))?;
            let k = k.trim();
            if !values.contains_key(k) {
                bail!("line {}: unknown key '{k}'", n + 1);
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Self::from_values(values)
    }

    fn from_values(values: BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| values.get(k).map(String::as_str).unwrap_or("");
        let name = get("name").to_string();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            bail!("name must be a nonempty [A-Za-z0-9_-] identifier, got '{name}'");
        }
        let audits = parse_list::<AuditKind>("audits", get("audits"))?;
        for (i, a) in audits.iter().enumerate() {
            if audits[..i].contains(a) {
                bail!("audit '{a}' listed twice");
            }
        }
        let matrix = match get("problem.matrix") {
            "" => None,
            s => Some(parse_one::<MatrixKind>("problem.matrix", s)?),
        };
        let alt_minus = match get("problem.alt_minus") {
            "" => None,
            s => match parse_one::<MatrixKind>("problem.alt_minus", s)? {
                MatrixKind::Constant(m) => Some(m),
                _ => bail!("problem.alt_minus must be a constant matrix"),
            },
        };
        let cfg = ExperimentConfig {
            name,
            dim: parse_one("grid.dim", get("grid.dim"))?,
            radius: parse_one("grid.radius", get("grid.radius"))?,
            cells: parse_one("grid.cells", get("grid.cells"))?,
            aplus: parse_one("problem.aplus", get("problem.aplus"))?,
            aminus: parse_one("problem.aminus", get("problem.aminus"))?,
            lambda: parse_one("problem.lambda", get("problem.lambda"))?,
            boundary: parse_one("problem.boundary", get("problem.boundary"))?,
            matrix,
            alt_minus,
            schedule: parse_list("solver.schedule", get("solver.schedule"))?,
            tol: parse_one("solver.tol", get("solver.tol"))?,
            max_iters: parse_one("solver.max_iters", get("solver.max_iters"))?,
            audits,
            values,
        };
        cfg.grid()?;
        cfg.problem()?;
        crate::audits::AuditParams::from_config(&cfg)?;
        Ok(cfg)
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn number(&self, key: &str) -> Result<f64> {
        parse_one(key, self.get(key))
    }

    pub fn numbers(&self, key: &str) -> Result<Vec<f64>> {
        parse_list(key, self.get(key))
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.dim, self.radius, self.cells)?)
    }

    /// Same configuration on a grid with spacing `h`.
    pub fn with_spacing(&self, h: f64) -> Result<Self> {
        let cells = (2.0 * self.radius / h).round();
        if !(cells >= 2.0) || ((2.0 * self.radius / cells) - h).abs() > 1e-9 * h {
            bail!("spacing {h} does not divide the box side {}", 2.0 * self.radius);
        }
        let mut out = self.clone();
        out.cells = cells as usize;
        out.values.insert("grid.cells".into(), out.cells.to_string());
        Ok(out)
    }

    pub fn problem(&self) -> Result<TwoPhaseProblem> {
        let ap = CoefficientModel::new(self.aplus, self.lambda)?;
        let am = CoefficientModel::new(self.aminus, self.lambda)?;
        let p = match self.matrix {
            None => TwoPhaseProblem::new(ap, am, self.boundary.clone(), self.lambda)?,
            Some(kind) => matrix_problem(ap, am, MatrixModel::new(kind, self.lambda)?, self.boundary.clone())?,
        };
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_defaults_and_overrides() {
        let c = ExperimentConfig::parse("name = t\n# comment\ngrid.cells = 64 # trailing\naudits = perimeter\n").unwrap();
        assert_eq!(c.cells, 64);
        assert_eq!(c.schedule, vec![0.2, 0.1, 0.05, 0.0]);
        assert_eq!(c.audits, vec![AuditKind::Perimeter]);
        assert_eq!(c.get("acf.cbar"), "40");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("name = t\ngrid.cels = 64\n").is_err());
        assert!(ExperimentConfig::parse("name = t\naudits = nonsense\n").is_err());
        assert!(ExperimentConfig::parse("name = t\nproblem.matrix = sym:1,2,1\n").is_ok());
        assert!(ExperimentConfig::parse("grid.cells = 64\n").is_err());
        assert!(ExperimentConfig::parse("name = t\naudits = perimeter, perimeter\n").is_err());
    }

    #[test]
    fn spacing() {
        let c = ExperimentConfig::parse("name = t\n").unwrap();
        assert_eq!(c.with_spacing(1.0 / 64.0).unwrap().cells, 128);
        assert!(c.with_spacing(0.3).is_err());
    }
}
