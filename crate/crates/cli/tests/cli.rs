use std::collections::BTreeSet;
use std::process::Command;

use serde_json::Value;
use twophase::Verdict;
use twophase_cli::report::{to_csv, to_json, to_text};
use twophase_cli::{emit_report, run_experiment, run_sweep, shipped, ExperimentConfig, Format, ALL_AUDITS, SHIPPED};

const SMALL: &str = "
name = small
grid.cells = 32
problem.aplus = hoelder:2,0.25,0.5
problem.aminus = hoelder:1,0.25,0.5
solver.schedule = 0.2,0.125,0
audits = acf_monotonicity, mu_audit, lipschitz, perimeter
acf.radii = 0.25,0.3,0.35,0.4,0.45,0.5
mu.radius = 0.4
";

fn small() -> ExperimentConfig {
    ExperimentConfig::parse(SMALL).unwrap()
}

#[test]
fn twoplane_battery_passes() {
    let r = run_experiment(&shipped("twoplane-2d").unwrap()).unwrap();
    assert_eq!(r.audits.len(), r.audits.iter().map(|a| &a.name).collect::<BTreeSet<_>>().len());
    for a in &r.audits {
        assert_eq!(a.verdict, Verdict::Pass, "{a:?}");
    }
}

#[test]
fn unknown_audit_is_rejected_before_solving() {
    let err = ExperimentConfig::parse("name = x\naudits = acf_monotonicity, frobnicate\n").unwrap_err();
    assert!(format!("{err:#}").contains("frobnicate"));
}

#[test]
fn sweep_has_one_row_per_level() {
    let r = run_sweep(&small(), &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]).unwrap();
    assert_eq!(r.sweep.len(), 3);
    assert_eq!(r.sweep.iter().map(|s| s.cells).collect::<Vec<_>>(), vec![32, 64, 128]);
    assert!(r.sweep_checks.iter().any(|c| c.name == "lipschitz_stability"));
    let j = to_json(&r);
    assert_eq!(j["sweep"].as_array().unwrap().len(), 3);
}

#[test]
fn emission_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let all = [Format::Json, Format::Csv, Format::Text];
    let a = emit_report(&run_experiment(&small()).unwrap(), &all, &dir.path().join("a")).unwrap();
    let b = emit_report(&run_experiment(&small()).unwrap(), &all, &dir.path().join("b")).unwrap();
    assert_eq!(a.len(), 3);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn empty_audit_list_gives_valid_report() {
    let mut c = small();
    c.audits.clear();
    let r = run_experiment(&c).unwrap();
    let j = to_json(&r);
    assert_eq!(j["audits"], Value::Array(Vec::new()));
    assert_eq!(j["status"], "NA");
    assert!(to_csv(&r).lines().all(|l| !l.starts_with("audit,")));
}

fn json_numbers(v: &Value, out: &mut BTreeSet<u64>) {
    match v {
        Value::Number(n) => {
            out.insert(n.as_f64().unwrap().to_bits());
        }
        Value::Array(a) => a.iter().for_each(|x| json_numbers(x, out)),
        Value::Object(m) => m
            .iter()
            .filter(|(k, _)| k.as_str() != "config")
            .for_each(|(_, x)| json_numbers(x, out)),
        _ => {}
    }
}

fn text_numbers(s: &str, out: &mut BTreeSet<u64>) {
    for tok in s.split(|c: char| c.is_whitespace() || c == ',' || c == '[' || c == ']') {
        if tok.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-') {
            if let Ok(v) = tok.parse::<f64>() {
                out.insert(v.to_bits());
            }
        }
    }
}

#[test]
fn formats_share_numeric_content() {
    let r = run_experiment(&small()).unwrap();
    let mut j = BTreeSet::new();
    json_numbers(&to_json(&r), &mut j);
    let csv: String = to_csv(&r)
        .lines()
        .map(|l| l.split(',').skip(3).take(2).collect::<Vec<_>>().join(" ") + "\n")
        .collect();
    let mut c = BTreeSet::new();
    text_numbers(&csv, &mut c);
    let text: String = to_text(&r).lines().filter(|l| !l.trim_start().starts_with("note:")).collect::<Vec<_>>().join("\n");
    let mut t = BTreeSet::new();
    text_numbers(&text, &mut t);
    // the text header repeats the audit count
    t.remove(&(r.audits.len() as f64).to_bits());
    c.remove(&(r.audits.len() as f64).to_bits());
    j.remove(&(r.audits.len() as f64).to_bits());
    assert_eq!(j, c);
    assert_eq!(j, t);
}

#[test]
fn shipped_battery_covers_every_audit() {
    let used: BTreeSet<_> = SHIPPED
        .iter()
        .flat_map(|(n, _)| shipped(n).unwrap().audits)
        .collect();
    for a in ALL_AUDITS {
        assert!(used.contains(&a), "{a} not shipped");
    }
}

#[test]
fn binary_runs_and_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_twophase");
    let st = Command::new(bin)
        .args(["matrix", "--config", "matrix-nonprop-2d", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(st.status.success());
    let out = Command::new(bin)
        .arg("report")
        .arg(dir.path().join("matrix-nonprop-2d.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("matrix_acf           NA"), "{s}");
    let bad = Command::new(bin).args(["acf", "--config", "/nonexistent.conf"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
