use std::fmt;

/// Outcome of an audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Not applicable: the audit's hypotheses do not hold.
    Na,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Na, v) | (v, Verdict::Na) => v,
            _ => Verdict::Pass,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Na => "NA",
        })
    }
}

/// Generic audit record `{name, values, tolerance, verdict}` with an
/// optional free-text note.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRecord {
    pub name: String,
    pub values: Vec<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub note: String,
}

impl AuditRecord {
    pub fn new(name: impl Into<String>, values: Vec<f64>, tolerance: f64, verdict: Verdict) -> Self {
        AuditRecord {
            name: name.into(),
            values,
            tolerance,
            verdict,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combine() {
        assert_eq!(Verdict::Pass.and(Verdict::Na), Verdict::Pass);
        assert_eq!(Verdict::Na.and(Verdict::Na), Verdict::Na);
        assert_eq!(Verdict::Pass.and(Verdict::Fail), Verdict::Fail);
        assert_eq!(Verdict::Pass.to_string(), "PASS");
    }
}
