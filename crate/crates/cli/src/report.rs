//! Report emission in JSON, CSV and plain text.
//!
//! Numbers are rounded to 12 significant digits in every format so that the
//! three files carry the same numeric content. JSON keys are sorted; NaN is
//! written as `null` in JSON and `NA` elsewhere.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};
use twophase::{AuditRecord, Verdict};

use crate::experiment::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "json" => Format::Json,
            "csv" => Format::Csv,
            "text" => Format::Text,
            other => bail!("unknown format '{other}' (json, csv, text)"),
        })
    }
}

pub fn parse_formats(s: &str) -> Result<Vec<Format>> {
    let mut out: Vec<Format> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Format::from_str)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// `{:.11e}`, or `NA` for non-finite values.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        "NA".to_string()
    }
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        let r: f64 = format!("{v:.11e}").parse().unwrap();
        json!(r)
    } else {
        Value::Null
    }
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn record_json(r: &AuditRecord) -> Value {
    json!({
        "name": r.name,
        "values": nums(&r.values),
        "tolerance": num(r.tolerance),
        "verdict": r.verdict.to_string(),
        "note": r.note,
    })
}

pub fn to_json(report: &RunReport) -> Value {
    let mut root = Map::new();
    root.insert("name".into(), json!(report.name));
    root.insert("status".into(), json!(report.status().to_string()));
    root.insert(
        "config".into(),
        Value::Object(report.config.iter().map(|(k, v)| (k.clone(), json!(v))).collect()),
    );
    root.insert(
        "solver".into(),
        match &report.solver {
            Some(s) => json!({
                "h": num(s.h),
                "cells": s.cells,
                "picard_iters": s.picard_iters,
                "cg_iterations": s.cg_iterations,
                "residual": num(s.residual),
                "epsilon_final": num(s.epsilon_final),
                "drifts": nums(&s.drifts),
                "max_principle_ok": s.max_principle_ok,
                "picard_monotone": s.picard_monotone,
            }),
            None => json!({ "error": report.solver_error.clone().unwrap_or_default() }),
        },
    );
    root.insert("audits".into(), Value::Array(report.audits.iter().map(record_json).collect()));
    if !report.sweep.is_empty() {
        let rows = report
            .sweep
            .iter()
            .map(|r| {
                json!({
                    "h": num(r.h),
                    "cells": r.cells,
                    "residual": num(r.residual),
                    "picard_total": r.picard_total,
                    "audits": r.audits.iter().map(record_json).collect::<Vec<_>>(),
                })
            })
            .collect();
        root.insert("sweep".into(), Value::Array(rows));
        root.insert(
            "sweep_checks".into(),
            Value::Array(report.sweep_checks.iter().map(record_json).collect()),
        );
    }
    Value::Object(root)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn joined(v: &[f64]) -> String {
    v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" ")
}

/// Rows `section,name,verdict,tolerance,values,note`; values space-separated.
pub fn to_csv(report: &RunReport) -> String {
    let mut out = String::from("section,name,verdict,tolerance,values,note\n");
    let mut row = |sec: &str, name: &str, verdict: &str, tol: &str, vals: &str, note: &str| {
        let _ = writeln!(
            out,
            "{sec},{},{verdict},{tol},{vals},{}",
            csv_field(name),
            csv_field(note)
        );
    };
    row("run", &report.name, &report.status().to_string(), "", "", "");
    match &report.solver {
        Some(s) => {
            row("solver", "h", "", "", &fmt_num(s.h), "");
            row("solver", "cells", "", "", &s.cells.to_string(), "");
            let it: Vec<String> = s.picard_iters.iter().map(|v| v.to_string()).collect();
            row("solver", "picard_iters", "", "", &it.join(" "), "");
            row("solver", "cg_iterations", "", "", &s.cg_iterations.to_string(), "");
            row("solver", "residual", "", "", &fmt_num(s.residual), "");
            row("solver", "epsilon_final", "", "", &fmt_num(s.epsilon_final), "");
            row("solver", "drifts", "", "", &joined(&s.drifts), "");
            row("solver", "max_principle_ok", "", "", "", &s.max_principle_ok.to_string());
            row("solver", "picard_monotone", "", "", "", &s.picard_monotone.to_string());
        }
        None => row("solver", "error", "FAIL", "", "", report.solver_error.as_deref().unwrap_or("")),
    }
    for a in &report.audits {
        row("audit", &a.name, &a.verdict.to_string(), &fmt_num(a.tolerance), &joined(&a.values), &a.note);
    }
    for (k, r) in report.sweep.iter().enumerate() {
        let lead = format!("{} {} {} {}", fmt_num(r.h), r.cells, fmt_num(r.residual), r.picard_total);
        row("sweep", &format!("level{k}"), "", "", &lead, "h cells residual picard_total");
        for a in &r.audits {
            row(
                "sweep",
                &format!("level{k}:{}", a.name),
                &a.verdict.to_string(),
                &fmt_num(a.tolerance),
                &joined(&a.values),
                &a.note,
            );
        }
    }
    for a in &report.sweep_checks {
        row("sweep_check", &a.name, &a.verdict.to_string(), &fmt_num(a.tolerance), &joined(&a.values), &a.note);
    }
    out
}

pub fn to_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment {}: {}", report.name, report.status());
    match &report.solver {
        Some(s) => {
            let it: Vec<String> = s.picard_iters.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "grid: h {} cells {}", fmt_num(s.h), s.cells);
            let _ = writeln!(
                out,
                "solver: residual {} epsilon_final {} picard {} cg {}",
                fmt_num(s.residual),
                fmt_num(s.epsilon_final),
                it.join(" "),
                s.cg_iterations
            );
            let _ = writeln!(
                out,
                "solver: drifts [{}] max_principle_ok {} picard_monotone {}",
                joined(&s.drifts),
                s.max_principle_ok,
                s.picard_monotone
            );
        }
        None => {
            let _ = writeln!(out, "solver: FAILED {}", report.solver_error.as_deref().unwrap_or(""));
        }
    }
    let audit_line = |out: &mut String, a: &AuditRecord| {
        let _ = writeln!(
            out,
            "{:<20} {:<4} tol {:<18} values [{}]",
            a.name,
            a.verdict.to_string(),
            fmt_num(a.tolerance),
            joined(&a.values)
        );
        if !a.note.is_empty() {
            let _ = writeln!(out, "{:<20} note: {}", "", a.note);
        }
    };
    let _ = writeln!(out, "audits: {}", report.audits.len());
    for a in &report.audits {
        audit_line(&mut out, a);
    }
    if !report.sweep.is_empty() {
        let _ = writeln!(out, "sweep: {} levels", report.sweep.len());
        for r in &report.sweep {
            let _ = writeln!(
                out,
                "  h {} cells {} residual {} picard {}",
                fmt_num(r.h),
                r.cells,
                fmt_num(r.residual),
                r.picard_total
            );
            for a in &r.audits {
                audit_line(&mut out, a);
            }
        }
        for a in &report.sweep_checks {
            audit_line(&mut out, a);
        }
    }
    out
}

/// Writes `<dir>/<name>.<ext>` per format; returns the paths written.
pub fn emit_report(report: &RunReport, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut paths = Vec::new();
    for &f in formats {
        let body = match f {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&to_json(report))?;
                s.push('\n');
                s
            }
            Format::Csv => to_csv(report),
            Format::Text => to_text(report),
        };
        let path = dir.join(format!("{}.{}", report.name, f.extension()));
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes the CSV artifacts (radial report, zero set, flatness trace) that
/// the audits produced.
pub fn write_artifacts(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let a = &report.artifacts;
    let mut paths = Vec::new();
    for (tag, body) in [("radial", &a.radial), ("levelset", &a.level_set), ("flatness", &a.flatness)] {
        if let Some(b) = body {
            let path = dir.join(format!("{}.{tag}.csv", report.name));
            std::fs::write(&path, b).with_context(|| format!("writing {}", path.display()))?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// Text summary of a previously written JSON report and whether it carries
/// a FAIL verdict.
pub fn summarize_json(text: &str) -> Result<(String, bool)> {
    let v: Value = serde_json::from_str(text).context("parsing report")?;
    let name = v["name"].as_str().unwrap_or("?");
    let status = v["status"].as_str().unwrap_or("?");
    let mut out = format!("experiment {name}: {status}\n");
    let mut failed = status == Verdict::Fail.to_string();
    for key in ["audits", "sweep_checks"] {
        for a in v[key].as_array().into_iter().flatten() {
            let verdict = a["verdict"].as_str().unwrap_or("?");
            failed |= verdict == "FAIL";
            let _ = writeln!(out, "{:<20} {verdict}", a["name"].as_str().unwrap_or("?"));
        }
    }
    Ok((out, failed))
}
