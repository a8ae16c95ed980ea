//! Solve, audit and refinement-sweep orchestration.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use anyhow::Result;
use twophase::solver::solve_schedule;
use twophase::{AuditRecord, ScalarField, Verdict};

use crate::audits::{Artifacts, AuditInput, AuditKind, AuditParams, AuditState};
use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSummary {
    pub h: f64,
    pub cells: usize,
    pub picard_iters: Vec<usize>,
    pub cg_iterations: usize,
    pub residual: f64,
    pub epsilon_final: f64,
    pub drifts: Vec<f64>,
    pub max_principle_ok: bool,
    pub picard_monotone: bool,
}

/// Wall-clock timings; kept out of the emitted files.
#[derive(Debug, Clone, Default)]
pub struct Timing {
    pub solve: Duration,
    pub audits: Vec<(String, Duration)>,
}

/// One row of a refinement table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    pub cells: usize,
    pub residual: f64,
    pub picard_total: usize,
    pub audits: Vec<AuditRecord>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub name: String,
    pub config: BTreeMap<String, String>,
    pub solver: Option<SolverSummary>,
    pub solver_error: Option<String>,
    pub audits: Vec<AuditRecord>,
    pub sweep: Vec<SweepRow>,
    /// Verdicts computed across the sweep rows.
    pub sweep_checks: Vec<AuditRecord>,
    pub timing: Timing,
    pub artifacts: Artifacts,
    pub solution: Option<ScalarField>,
}

impl RunReport {
    /// FAIL if the solve failed or any verdict failed; PASS if at least one
    /// PASS; NA otherwise.
    pub fn status(&self) -> Verdict {
        if self.solver_error.is_some() {
            return Verdict::Fail;
        }
        self.audits
            .iter()
            .chain(&self.sweep_checks)
            .fold(Verdict::Na, |acc, r| acc.and(r.verdict))
    }

    pub fn has_failure(&self) -> bool {
        self.status() == Verdict::Fail
    }
}

/// Solves the configured problem and runs every requested audit in order.
/// A solver failure yields a report whose audits are all NA.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    let grid = config.grid()?;
    let problem = config.problem()?;
    let params = AuditParams::from_config(config)?;
    let mut report = RunReport {
        name: config.name.clone(),
        config: config.values.clone(),
        solver: None,
        solver_error: None,
        audits: Vec::new(),
        sweep: Vec::new(),
        sweep_checks: Vec::new(),
        timing: Timing::default(),
        artifacts: Artifacts::default(),
        solution: None,
    };
    let t = Instant::now();
    let solved = solve_schedule(&problem, &grid, &config.schedule, config.tol, config.max_iters);
    report.timing.solve = t.elapsed();
    let sol = match solved {
        Ok(s) => s,
        Err(e) => {
            log::error!("{}: solve failed: {e}", config.name);
            report.solver_error = Some(e.to_string());
            report.audits = config
                .audits
                .iter()
                .map(|a| {
                    AuditRecord::new(a.name(), Vec::new(), f64::NAN, Verdict::Na).with_note("not run: solver failed")
                })
                .collect();
            return Ok(report);
        }
    };
    report.solver = Some(SolverSummary {
        h: grid.h(),
        cells: grid.cells(),
        picard_iters: sol.picard_iters.clone(),
        cg_iterations: sol.cg_iterations,
        residual: sol.residual,
        epsilon_final: sol.epsilon_final,
        drifts: sol.drifts.clone(),
        max_principle_ok: sol.max_principle_ok,
        picard_monotone: sol.picard_monotone,
    });
    let input = AuditInput {
        u: &sol.u,
        problem: &problem,
        config,
        params: &params,
    };
    let mut state = AuditState::default();
    for &kind in &config.audits {
        let t = Instant::now();
        let rec = input.run(kind, &mut state, &mut report.artifacts);
        log::info!("{}: {} {}", config.name, rec.name, rec.verdict);
        report.timing.audits.push((rec.name.clone(), t.elapsed()));
        report.audits.push(rec);
    }
    report.solution = Some(sol.u);
    Ok(report)
}

fn sweep_row(r: &RunReport) -> SweepRow {
    let s = r.solver.as_ref();
    SweepRow {
        h: s.map_or(f64::NAN, |s| s.h),
        cells: s.map_or(0, |s| s.cells),
        residual: s.map_or(f64::NAN, |s| s.residual),
        picard_total: s.map_or(0, |s| s.picard_iters.iter().sum()),
        audits: r.audits.clone(),
    }
}

fn column(rows: &[SweepRow], name: &str) -> Option<Vec<f64>> {
    rows.iter()
        .map(|r| {
            r.audits
                .iter()
                .find(|a| a.name == name && a.verdict != Verdict::Na)
                .and_then(|a| a.values.first().copied())
        })
        .collect()
}

fn audit_value(r: &RunReport, name: &str, k: usize) -> Option<f64> {
    r.audits
        .iter()
        .find(|a| a.name == name && a.verdict != Verdict::Na)
        .and_then(|a| a.values.get(k).copied())
}

/// Least-squares slope of `log y` against `log h`.
pub fn observed_order(h: &[f64], y: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Cross-level verdicts: Lipschitz ratio stability (10%), flux mismatch
/// order (>= 0.8) and the minimal ACF correction not growing by more than
/// 10% at the last refinement.
fn sweep_checks(rows: &[SweepRow], reports: &[RunReport]) -> Vec<AuditRecord> {
    let mut out = Vec::new();
    if rows.len() < 2 {
        return out;
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    if let Some(l) = column(rows, AuditKind::Lipschitz.name()) {
        let hi = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = l.iter().copied().fold(f64::INFINITY, f64::min);
        let var = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
        out.push(
            AuditRecord::new("lipschitz_stability", vec![var], 0.1, Verdict::from_bool(var <= 0.1))
                .with_note("relative spread of the Lipschitz ratio across the sweep"),
        );
    }
    if let Some(m) = column(rows, AuditKind::FluxBalance.name()) {
        let rec = if m.iter().all(|v| *v > 0.0) {
            let order = observed_order(&hs, &m);
            AuditRecord::new("flux_order", vec![order], 0.8, Verdict::from_bool(order >= 0.8))
                .with_note("observed order of the flux mismatch")
        } else {
            AuditRecord::new("flux_order", Vec::new(), 0.8, Verdict::Na).with_note("mismatch vanishes on some level")
        };
        out.push(rec);
    }
    let cbar: Option<Vec<f64>> = reports
        .iter()
        .map(|r| audit_value(r, AuditKind::AcfMonotonicity.name(), 1))
        .collect();
    match cbar {
        Some(c) if c.iter().any(|v| !v.is_finite()) => out.push(
            AuditRecord::new("cbar_stability", c, 0.1, Verdict::Na)
                .with_note("no finite minimal cbar on some level (flat modulus)"),
        ),
        Some(c) => {
            let (prev, last) = (c[c.len() - 2], c[c.len() - 1]);
            let ok = last <= prev * 1.1 || last <= 1e-12;
            out.push(
                AuditRecord::new("cbar_stability", c, 0.1, Verdict::from_bool(ok))
                    .with_note("minimal cbar per level; the last may exceed the previous by at most 10%"),
            );
        }
        None => {}
    }
    out
}

/// Runs the configuration at each spacing and returns the report of the
/// last level with the refinement table attached.
pub fn run_sweep(config: &ExperimentConfig, spacings: &[f64]) -> Result<RunReport> {
    anyhow::ensure!(!spacings.is_empty(), "empty grid sweep");
    let mut reports = Vec::with_capacity(spacings.len());
    for &h in spacings {
        reports.push(run_experiment(&config.with_spacing(h)?)?);
    }
    let rows: Vec<SweepRow> = reports.iter().map(sweep_row).collect();
    let checks = sweep_checks(&rows, &reports);
    let mut last = reports.pop().unwrap();
    last.sweep = rows;
    last.sweep_checks = checks;
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_power_law() {
        let h = [0.1, 0.05, 0.025];
        let y: Vec<f64> = h.iter().map(|v| 3.0 * v * v).collect();
        assert!((observed_order(&h, &y) - 2.0).abs() < 1e-12);
    }
}
