use crate::field::grid::{dot, norm};
use crate::field::Point;
use crate::freeboundary::LevelSetCurve;
use crate::verdict::Verdict;

#[derive(Debug, Clone)]
pub struct EnvelopeCheck {
    pub verdict: Verdict,
    /// Vertices (relative to the centre) with `|x.e| > bound |x|^(1+alpha) + 2h`.
    pub violations: Vec<Point>,
    pub checked: usize,
}

/// Checks that every vertex `x` of `curve` within `B_1(z)` (local
/// coordinates) lies in `|x.e| <= bound |x|^(1+alpha) + 2h`, where `bound`
/// stands for `C eps / beta`. NA when no vertex lies in the ball.
pub fn graph_envelope_check(curve: &LevelSetCurve, z: &Point, e: &Point, bound: f64, alpha: f64, h: f64) -> EnvelopeCheck {
    let ne = norm(e);
    let e = [e[0] / ne, e[1] / ne, e[2] / ne];
    let mut violations = Vec::new();
    let mut checked = 0;
    for p in curve.vertices() {
        let x = [p[0] - z[0], p[1] - z[1], p[2] - z[2]];
        let r = norm(&x);
        if r > 1.0 {
            continue;
        }
        checked += 1;
        if dot(&x, &e).abs() > bound * r.powf(1.0 + alpha) + 2.0 * h {
            violations.push(x);
        }
    }
    let verdict = if checked == 0 {
        Verdict::Na
    } else {
        Verdict::from_bool(violations.is_empty())
    };
    EnvelopeCheck {
        verdict,
        violations,
        checked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, ScalarField};
    use crate::freeboundary::extract_level_set;

    #[test]
    fn plane_and_graph() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        let plane = ScalarField::from_fn(g, |p| p[0]);
        let c = extract_level_set(&plane, 0.0);
        let e = [1.0, 0.0, 0.0];
        assert_eq!(graph_envelope_check(&c, &[0.0; 3], &e, 0.0, 0.5, g.h()).verdict, Verdict::Pass);
        let graph = ScalarField::from_fn(g, |p| {
            p[1] - 0.1 * (p[0] * p[0] + p[1] * p[1]).sqrt().powf(1.5)
        });
        let c = extract_level_set(&graph, 0.0);
        let e = [0.0, 1.0, 0.0];
        assert_eq!(graph_envelope_check(&c, &[0.0; 3], &e, 0.2, 0.5, g.h()).verdict, Verdict::Pass);
        let bad = graph_envelope_check(&c, &[0.0; 3], &e, 0.05, 0.5, g.h());
        assert_eq!(bad.verdict, Verdict::Fail);
        assert!(!bad.violations.is_empty());
        let empty = extract_level_set(&ScalarField::constant(g, 1.0), 0.0);
        assert_eq!(graph_envelope_check(&empty, &[0.0; 3], &e, 0.2, 0.5, g.h()).verdict, Verdict::Na);
    }
}
