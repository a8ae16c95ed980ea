//! Plain-text grid dump.
//!
//! Line 1 is `dim h radius cells`; then one nodal value per line in
//! row-major order (axis 0 varies fastest), 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::grid::Grid;
use super::scalar::ScalarField;
use crate::error::{Error, Result};

pub fn to_dump_string(u: &ScalarField) -> String {
    let g = u.grid();
    let mut s = String::with_capacity(24 * (g.len() + 1));
    let _ = writeln!(s, "{} {} {} {}", g.dim(), g.h(), g.radius(), g.cells());
    for v in u.values() {
        let _ = writeln!(s, "{v:.16e}");
    }
    s
}

pub fn from_dump_str(text: &str) -> Result<ScalarField> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty grid dump".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(Error::Parse(format!("bad header '{header}'")));
    }
    let bad = |what: &str| Error::Parse(format!("bad {what} in header '{header}'"));
    let dim: usize = parts[0].parse().map_err(|_| bad("dim"))?;
    let h: f64 = parts[1].parse().map_err(|_| bad("h"))?;
    let radius: f64 = parts[2].parse().map_err(|_| bad("radius"))?;
    let cells: usize = parts[3].parse().map_err(|_| bad("cells"))?;
    let grid = Grid::new(dim, radius, cells)?;
    if (grid.h() - h).abs() > 1e-12 * h {
        return Err(Error::Parse(format!("spacing {h} inconsistent with radius/cells")));
    }
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad value '{l}': {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    ScalarField::new(grid, values)
}

pub fn write_dump(u: &ScalarField, path: &Path) -> Result<()> {
    std::fs::write(path, to_dump_string(u)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_dump(path: &Path) -> Result<ScalarField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    from_dump_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_roundtrip() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let u = ScalarField::from_fn(g, |p| (3.0 * p[0]).sin() + p[1] / 7.0);
        let s = to_dump_string(&u);
        assert_eq!(s.lines().next().unwrap(), "2 0.125 1 16");
        assert_eq!(s.lines().count(), 1 + 17 * 17);
        let back = from_dump_str(&s).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn rejects_truncated() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let s = to_dump_string(&ScalarField::zeros(g));
        let cut: String = s.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(from_dump_str(&cut).is_err());
    }
}
