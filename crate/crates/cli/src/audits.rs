//! Audit registry: names, parameters and the mapping from a solved field to
//! one [`AuditRecord`] per requested audit.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use twophase::acf::{friedland_hayman_check, monotonicity_audit, AcfOptions};
use twophase::blowup::{fit_two_plane, flatness_cascade, graph_envelope_check, rescale, zoom, TwoPlane};
use twophase::field::grid::{dist, norm};
use twophase::field::{gradient_field, Point};
use twophase::freeboundary::{
    bump_family, classify_point, dyadic_radii, extract_level_set, flux_balance, lipschitz_audit, mu_audit,
    perimeter_diagnostic, two_sided_fraction, BumpTest, Degeneracy,
};
use twophase::matrixext::{acf_matrix_audit, kappa_check, phase_matrices};
use twophase::solver::BoundaryData;
use twophase::{AuditRecord, ScalarField, TwoPhaseProblem, Verdict};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AuditKind {
    Reproduction,
    AcfMonotonicity,
    FriedlandHayman,
    MuAudit,
    FluxBalance,
    Classify,
    Lipschitz,
    Perimeter,
    TwoSided,
    BlowupFit,
    FlatnessCascade,
    GraphEnvelope,
    Kappa,
    MatrixAcf,
}

pub const ALL_AUDITS: [AuditKind; 14] = [
    AuditKind::Reproduction,
    AuditKind::AcfMonotonicity,
    AuditKind::FriedlandHayman,
    AuditKind::MuAudit,
    AuditKind::FluxBalance,
    AuditKind::Classify,
    AuditKind::Lipschitz,
    AuditKind::Perimeter,
    AuditKind::TwoSided,
    AuditKind::BlowupFit,
    AuditKind::FlatnessCascade,
    AuditKind::GraphEnvelope,
    AuditKind::Kappa,
    AuditKind::MatrixAcf,
];

impl AuditKind {
    pub fn name(self) -> &'static str {
        match self {
            AuditKind::Reproduction => "reproduction",
            AuditKind::AcfMonotonicity => "acf_monotonicity",
            AuditKind::FriedlandHayman => "friedland_hayman",
            AuditKind::MuAudit => "mu_audit",
            AuditKind::FluxBalance => "flux_balance",
            AuditKind::Classify => "classify",
            AuditKind::Lipschitz => "lipschitz",
            AuditKind::Perimeter => "perimeter",
            AuditKind::TwoSided => "two_sided",
            AuditKind::BlowupFit => "blowup_fit",
            AuditKind::FlatnessCascade => "flatness_cascade",
            AuditKind::GraphEnvelope => "graph_envelope",
            AuditKind::Kappa => "kappa",
            AuditKind::MatrixAcf => "matrix_acf",
        }
    }

    /// Subcommand group the audit belongs to.
    pub fn group(self) -> Group {
        match self {
            AuditKind::Reproduction => Group::Solve,
            AuditKind::AcfMonotonicity | AuditKind::FriedlandHayman => Group::Acf,
            AuditKind::MuAudit
            | AuditKind::FluxBalance
            | AuditKind::Classify
            | AuditKind::Lipschitz
            | AuditKind::Perimeter
            | AuditKind::TwoSided => Group::FreeBoundary,
            AuditKind::BlowupFit | AuditKind::FlatnessCascade | AuditKind::GraphEnvelope => Group::Blowup,
            AuditKind::Kappa | AuditKind::MatrixAcf => Group::Matrix,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Solve,
    Acf,
    FreeBoundary,
    Blowup,
    Matrix,
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AuditKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL_AUDITS
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| anyhow!("unknown audit '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Any,
    Nondegenerate,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Center {
    /// Zero-set vertex nearest the origin.
    Gamma,
    At(Point),
}

/// Typed audit parameters.
#[derive(Debug, Clone)]
pub struct AuditParams {
    pub center: Center,
    pub acf_radii: Vec<f64>,
    pub acf: AcfOptions,
    pub mu_count: usize,
    pub mu_radius: f64,
    pub mu_seed: u64,
    pub mu_tol_constant: f64,
    pub flux_radius: f64,
    pub flux_levels: Vec<f64>,
    pub classify_r_max: f64,
    pub classify_fraction: f64,
    pub classify_expect: Expectation,
    pub lipschitz_radius: f64,
    pub blowup_radius: f64,
    pub blowup_tol: f64,
    pub cascade_r0: f64,
    pub cascade_rbar: f64,
    pub cascade_alpha: f64,
    pub cascade_steps: usize,
    pub envelope_constant: f64,
}

impl AuditParams {
    pub fn from_config(c: &ExperimentConfig) -> Result<Self> {
        let center = match c.get("center") {
            "gamma" => Center::Gamma,
            s => {
                let v: Vec<f64> = c.numbers("center")?;
                if v.len() != c.dim {
                    bail!("center '{s}' needs {} coordinates", c.dim);
                }
                let mut p = [0.0; 3];
                p[..v.len()].copy_from_slice(&v);
                Center::At(p)
            }
        };
        let classify_expect = match c.get("classify.expect") {
            "any" => Expectation::Any,
            "nondegenerate" => Expectation::Nondegenerate,
            "degenerate" => Expectation::Degenerate,
            s => bail!("classify.expect: expected any|nondegenerate|degenerate, got '{s}'"),
        };
        let count = |k: &str| -> Result<usize> {
            c.get(k).parse::<usize>().map_err(|e| anyhow!("{k}: {e}"))
        };
        let flux_levels = c.numbers("flux.levels")?;
        if flux_levels.is_empty() || flux_levels.iter().any(|v| !(*v > 0.0)) {
            bail!("flux.levels must be positive multiples of h max|grad u|");
        }
        Ok(AuditParams {
            center,
            acf_radii: c.numbers("acf.radii")?,
            acf: AcfOptions {
                cbar: c.number("acf.cbar")?,
                tol_factor: c.number("acf.tol_factor")?,
            },
            mu_count: count("mu.count")?,
            mu_radius: c.number("mu.radius")?,
            mu_seed: c.get("mu.seed").parse::<u64>().map_err(|e| anyhow!("mu.seed: {e}"))?,
            mu_tol_constant: c.number("mu.tol_constant")?,
            flux_radius: c.number("flux.radius")?,
            flux_levels,
            classify_r_max: c.number("classify.r_max")?,
            classify_fraction: c.number("classify.fraction")?,
            classify_expect,
            lipschitz_radius: c.number("lipschitz.radius")?,
            blowup_radius: c.number("blowup.radius")?,
            blowup_tol: c.number("blowup.tol")?,
            cascade_r0: c.number("cascade.r0")?,
            cascade_rbar: c.number("cascade.rbar")?,
            cascade_alpha: c.number("cascade.alpha")?,
            cascade_steps: count("cascade.steps")?,
            envelope_constant: c.number("envelope.constant")?,
        })
    }
}

/// CSV artifacts produced alongside the audit records.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub radial: Option<String>,
    pub level_set: Option<String>,
    pub flatness: Option<String>,
}

/// Everything an audit may look at.
pub struct AuditInput<'a> {
    pub u: &'a ScalarField,
    pub problem: &'a TwoPhaseProblem,
    pub config: &'a ExperimentConfig,
    pub params: &'a AuditParams,
}

/// State shared between audits of one run (the cascade feeds the envelope
/// check).
#[derive(Default)]
pub struct AuditState {
    cascade: Option<(TwoPlane, f64)>,
    center: Option<Point>,
}

fn na(kind: AuditKind, note: impl Into<String>) -> AuditRecord {
    AuditRecord::new(kind.name(), Vec::new(), f64::NAN, Verdict::Na).with_note(note)
}

impl AuditInput<'_> {
    fn center(&self, state: &mut AuditState) -> Result<Point> {
        if let Some(z) = state.center {
            return Ok(z);
        }
        let z = match self.params.center {
            Center::At(p) => p,
            Center::Gamma => {
                let curve = extract_level_set(self.u, 0.0);
                *curve
                    .vertices()
                    .min_by(|a, b| norm(a).total_cmp(&norm(b)))
                    .ok_or_else(|| anyhow!("the zero set is empty"))?
            }
        };
        state.center = Some(z);
        Ok(z)
    }

    fn coefficients_at(&self, z: &Point) -> (f64, f64) {
        (self.problem.aplus_at(z), self.problem.aminus_at(z))
    }

    /// Runs one audit; errors become an NA record carrying the message,
    /// except where an error means the audited property failed.
    pub fn run(&self, kind: AuditKind, state: &mut AuditState, art: &mut Artifacts) -> AuditRecord {
        match self.run_inner(kind, state, art) {
            Ok(r) => r,
            Err(e) => na(kind, format!("not applicable: {e:#}")),
        }
    }

    fn run_inner(&self, kind: AuditKind, state: &mut AuditState, art: &mut Artifacts) -> Result<AuditRecord> {
        let u = self.u;
        let g = u.grid();
        let h = g.h();
        let p = self.params;
        Ok(match kind {
            AuditKind::Reproduction => {
                let BoundaryData::TwoPlane { beta, nu } = self.problem.boundary else {
                    return Ok(na(kind, "needs two-plane boundary data"));
                };
                if !(self.problem.aplus.kind.is_constant() && self.problem.aminus.kind.is_constant())
                    || self.problem.matrix.is_some()
                {
                    return Ok(na(kind, "needs constant scalar conductivities"));
                }
                let exact = self.problem.boundary_field(g);
                let (mut near, mut far) = (0.0f64, 0.0f64);
                for i in 0..g.len() {
                    let x = g.coord(i);
                    let e = (u.get(i) - exact.get(i)).abs();
                    let d = twophase::field::grid::dot(&x, &nu).abs();
                    if d >= 0.25 {
                        far = far.max(e);
                    } else {
                        near = near.max(e);
                    }
                }
                let (tn, tf) = (0.5 * h.powf(0.9), 5.0 * h.powf(1.8));
                AuditRecord::new(kind.name(), vec![near, far, tf], tn, Verdict::from_bool(near <= tn && far <= tf))
                    .with_note(format!("max error near / far from the zero set (beta {beta}); far tolerance third"))
            }
            AuditKind::AcfMonotonicity => {
                let z = self.center(state)?;
                let a = monotonicity_audit(u, &self.problem.modulus, &z, &p.acf_radii, &p.acf)?;
                art.radial = Some(a.report.to_csv());
                let min_diff = a.differences.iter().copied().fold(f64::INFINITY, f64::min);
                let phi = &a.report.phi;
                AuditRecord::new(
                    kind.name(),
                    vec![
                        min_diff,
                        a.min_cbar,
                        a.bound_max,
                        a.report.cbar,
                        phi.iter().copied().fold(f64::INFINITY, f64::min),
                        phi.iter().copied().fold(0.0, f64::max),
                    ],
                    a.delta_tol,
                    a.verdict,
                )
                .with_note("min difference, minimal cbar, max bound ratio, cbar, min phi, max phi")
            }
            AuditKind::FriedlandHayman => {
                let z = self.center(state)?;
                let f = friedland_hayman_check(u, &z, &p.acf_radii)?;
                let slack = f
                    .sums
                    .iter()
                    .zip(&f.tolerances)
                    .map(|(s, t)| s - (2.0 - t))
                    .fold(f64::INFINITY, f64::min);
                let min_sum = f.sums.iter().copied().fold(f64::INFINITY, f64::min);
                let tol = f.tolerances.iter().copied().fold(0.0, f64::max);
                AuditRecord::new(kind.name(), vec![min_sum, slack, f.equality_ratio()], tol, f.verdict)
                    .with_note(if f.note.is_empty() {
                        "min beta sum, min slack, equality ratio".to_string()
                    } else {
                        f.note.clone()
                    })
            }
            AuditKind::MuAudit => {
                let bumps = bump_family(u, p.mu_count, p.mu_radius, p.mu_seed)?;
                if bumps.is_empty() {
                    return Ok(na(kind, "no bump fits around the zero set"));
                }
                let m = mu_audit(u, self.problem, &bumps, p.mu_tol_constant);
                AuditRecord::new(kind.name(), vec![m.min_margin(), m.max_defect(), bumps.len() as f64], m.tolerance, m.verdict)
                    .with_note("min positivity margin, max symmetry defect, bumps")
            }
            AuditKind::FluxBalance => {
                let z = self.center(state)?;
                let du = gradient_field(u);
                let gmax = (0..g.len()).map(|i| du.magnitude(i)).fold(0.0, f64::max);
                let eps: Vec<f64> = p.flux_levels.iter().map(|k| k * h * gmax).collect();
                let eta = BumpTest::new(z, p.flux_radius)?;
                let f = flux_balance(u, self.problem, &eta, &eps)?;
                let tol = self.config.number("flux.tol")?;
                AuditRecord::new(
                    kind.name(),
                    vec![f.mismatch, f.plus_limit, f.minus_limit],
                    tol,
                    Verdict::from_bool(f.mismatch <= tol),
                )
                .with_note("mismatch, plus limit, minus limit; the discrete curves cannot certify locally finite perimeter")
            }
            AuditKind::Classify => {
                let z = self.center(state)?;
                let radii = dyadic_radii(p.classify_r_max, h);
                let c = classify_point(u, &z, &radii, p.classify_fraction)?;
                let qmin = c.q.iter().copied().fold(f64::INFINITY, f64::min);
                let label = match c.kind {
                    Degeneracy::Nondegenerate => "nondegenerate",
                    Degeneracy::Degenerate => "degenerate",
                };
                let verdict = match (p.classify_expect, c.kind) {
                    (Expectation::Any, _) => Verdict::Na,
                    (Expectation::Nondegenerate, Degeneracy::Nondegenerate)
                    | (Expectation::Degenerate, Degeneracy::Degenerate) => Verdict::Pass,
                    _ => Verdict::Fail,
                };
                AuditRecord::new(kind.name(), vec![qmin, c.q[0], radii.len() as f64], c.threshold, verdict)
                    .with_note(format!("{label}; min q, q(r_max), radii"))
            }
            AuditKind::Lipschitz => {
                let l = lipschitz_audit(u, &[0.0; 3], p.lipschitz_radius)?;
                AuditRecord::new(
                    kind.name(),
                    vec![l.ratio, l.sup_grad, l.l2_norm, l.d],
                    f64::NAN,
                    Verdict::from_bool(l.ratio.is_finite()),
                )
                .with_note("ratio, sup grad, box L2 norm, distance; stability is judged across a grid sweep")
            }
            AuditKind::Perimeter => {
                let curve = extract_level_set(u, 0.0);
                art.level_set = Some(curve.to_csv());
                AuditRecord::new(kind.name(), vec![perimeter_diagnostic(u)], f64::NAN, Verdict::Na)
                    .with_note("measure of the zero set; reported only, a discrete curve always has finite length")
            }
            AuditKind::TwoSided => {
                let curve = extract_level_set(u, 0.0);
                if curve.is_empty() {
                    return Ok(na(kind, "the zero set is empty"));
                }
                let frac = two_sided_fraction(u, &curve, 3.0 * h);
                AuditRecord::new(kind.name(), vec![frac], 1.0, Verdict::from_bool(frac >= 1.0))
                    .with_note("fraction of zero-set vertices with both signs within 3h")
            }
            AuditKind::BlowupFit => {
                let z = self.center(state)?;
                let (ap, am) = self.coefficients_at(&z);
                let v = rescale(u, &z, p.blowup_radius)?;
                let fit = fit_two_plane(&v, ap, am)?;
                let mut vals = vec![fit.deficit, fit.plane.beta];
                vals.extend_from_slice(&fit.plane.nu[..g.dim()]);
                let note = if fit.polished { "deficit, beta, nu" } else { "deficit, beta, nu; polish did not improve" };
                AuditRecord::new(kind.name(), vals, p.blowup_tol, Verdict::from_bool(fit.deficit <= p.blowup_tol))
                    .with_note(note)
            }
            AuditKind::FlatnessCascade => {
                let z = self.center(state)?;
                let (ap, am) = self.coefficients_at(&z);
                let floor = twophase::blowup::cascade::SCALE_FLOOR * h;
                let fit = fit_two_plane(&zoom(u, &z, floor)?, ap, am)?;
                let initial = TwoPlane::new(fit.plane.beta, fit.plane.nu, z, ap, am)?;
                let t = flatness_cascade(u, &initial, p.cascade_r0, p.cascade_rbar, p.cascade_alpha, p.cascade_steps)?;
                art.flatness = Some(t.to_csv(g.dim()));
                let last = t.entries.last().map(|e| e.nu).unwrap_or(initial.nu);
                state.cascade = Some((initial.with_nu(last)?, t.epsilon / p.cascade_r0));
                let worst = t
                    .entries
                    .iter()
                    .map(|e| if e.bound > 0.0 { e.deficit / e.bound } else { 0.0 })
                    .fold(0.0, f64::max);
                let mut note = format!(
                    "epsilon, c0, steps, worst deficit/bound; initial plane fitted at 16h; strong rate {}",
                    if t.strong_rate_holds() { "holds" } else { "does not hold" }
                );
                if let Some(tr) = &t.truncated {
                    note.push_str("; ");
                    note.push_str(tr);
                }
                AuditRecord::new(
                    kind.name(),
                    vec![t.epsilon, t.c0, t.entries.len() as f64, worst],
                    1.0,
                    t.decay_verdict.and(t.drift_verdict),
                )
                .with_note(note)
            }
            AuditKind::GraphEnvelope => {
                let z = self.center(state)?;
                let (plane, eps_unit) = match state.cascade {
                    Some(c) => c,
                    None => return Ok(na(kind, "needs flatness_cascade earlier in the audit list")),
                };
                let local = zoom(u, &z, p.cascade_r0)?;
                let curve = extract_level_set(&local, 0.0);
                let bound = p.envelope_constant * eps_unit / plane.beta;
                let e = graph_envelope_check(&curve, &[0.0; 3], &plane.nu, bound, p.cascade_alpha, local.grid().h());
                let worst = e.violations.iter().map(|x| dist(x, &[0.0; 3])).fold(0.0, f64::max);
                AuditRecord::new(kind.name(), vec![e.violations.len() as f64, e.checked as f64, worst], bound, e.verdict)
                    .with_note("violations, checked vertices, largest violating radius")
            }
            AuditKind::Kappa => {
                let z = self.center(state)?;
                let phases = self.phases(&z);
                match kappa_check(&phases.0, &phases.1, g.dim()) {
                    Ok(k) => AuditRecord::new(kind.name(), vec![k], 1e-10, Verdict::Pass)
                        .with_note("trace ratio of the phase matrices"),
                    Err(e) => AuditRecord::new(kind.name(), Vec::new(), 1e-10, Verdict::Na).with_note(e.to_string()),
                }
            }
            AuditKind::MatrixAcf => {
                let z = self.center(state)?;
                let phases = self.phases(&z);
                let m = acf_matrix_audit(u, self.problem, &phases, &z, &p.acf_radii, &p.acf)?;
                let mut vals = Vec::new();
                let mut tol = f64::NAN;
                if let Some(a) = &m.audit {
                    vals.push(a.differences.iter().copied().fold(f64::INFINITY, f64::min));
                    vals.push(a.min_cbar);
                    tol = a.delta_tol;
                }
                if let Some(mp) = &m.metric_phi {
                    vals.push(mp.iter().copied().fold(f64::INFINITY, f64::min));
                    vals.push(mp.iter().copied().fold(0.0, f64::max));
                }
                AuditRecord::new(kind.name(), vals, tol, m.verdict).with_note(m.note)
            }
        })
    }

    fn phases(&self, z: &Point) -> (twophase::matrixext::model::Mat3, twophase::matrixext::model::Mat3) {
        let mut ph = phase_matrices(self.problem, z);
        if let Some(alt) = self.config.alt_minus {
            let am = self.problem.aminus_at(z);
            for (row, arow) in ph.1.iter_mut().zip(alt.iter()) {
                for (v, a) in row.iter_mut().zip(arow) {
                    *v = am * a;
                }
            }
        }
        ph
    }
}
