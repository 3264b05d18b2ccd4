use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// One checked quantity. `value` is `None` when the computation failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
    /// Seconds.
    pub runtime: f64,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Case {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub cases: Vec<Case>,
}

impl Report {
    pub fn new(suite: &str, seed: u64, cases: Vec<Case>) -> Self {
        Self {
            suite: suite.to_string(),
            seed,
            passed: cases.iter().all(Case::passed),
            cases,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Builder for a case compared as `|value − expected| ≤ tolerance`.
#[derive(Debug, Clone)]
pub struct Check {
    name: String,
    expected: f64,
    tolerance: f64,
    provenance: String,
    note: Option<String>,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        expected: f64,
        tolerance: f64,
        provenance: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            expected,
            tolerance,
            provenance: provenance.into(),
            note: None,
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Replaces the tolerance when `tol` is given.
    pub fn tol(mut self, tol: Option<f64>) -> Self {
        if let Some(t) = tol {
            self.tolerance = t;
        }
        self
    }

    pub fn run<E: std::fmt::Display>(self, f: impl FnOnce() -> Result<f64, E>) -> Case {
        let start = Instant::now();
        let out = f();
        let runtime = start.elapsed().as_secs_f64();
        let (status, value, note) = match out {
            Ok(v) if (v - self.expected).abs() <= self.tolerance => {
                (Status::Pass, Some(v), self.note)
            }
            Ok(v) => (Status::Fail, Some(v), self.note),
            Err(e) => (Status::Error, None, Some(e.to_string())),
        };
        Case {
            name: self.name,
            status,
            value,
            expected: self.expected,
            tolerance: self.tolerance,
            runtime,
            provenance: self.provenance,
            note,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses() {
        let ok = Check::new("a", 1.0, 0.1, "x").run(|| Ok::<_, String>(1.05));
        let bad = Check::new("b", 1.0, 0.01, "x").run(|| Ok::<_, String>(1.05));
        let err = Check::new("c", 1.0, 0.01, "x").run(|| Err::<f64, _>("boom"));
        assert_eq!(
            (ok.status, bad.status, err.status),
            (Status::Pass, Status::Fail, Status::Error)
        );
        assert_eq!(err.note.as_deref(), Some("boom"));
        let nan = Check::new("d", 0.0, 1.0, "x").run(|| Ok::<_, String>(f64::NAN));
        assert_eq!(nan.status, Status::Fail);
        let r = Report::new("s", 3, vec![ok, bad]);
        assert!(!r.passed);
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().contains("\"status\": \"fail\""));
    }
}
