//! Per-check records and the run report.

use std::fmt;

use indexlab_core::Error as CoreError;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Quantity {
    Int(i64),
    Ints(Vec<i64>),
    Real(f64),
    Text(String),
}

impl Quantity {
    pub fn none() -> Self {
        Quantity::Text(String::new())
    }
}

impl From<i64> for Quantity {
    fn from(v: i64) -> Self {
        Quantity::Int(v)
    }
}

impl From<usize> for Quantity {
    fn from(v: usize) -> Self {
        Quantity::Int(v as i64)
    }
}

impl From<Vec<i64>> for Quantity {
    fn from(v: Vec<i64>) -> Self {
        Quantity::Ints(v)
    }
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Real(v)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Int(v) => write!(f, "{v}"),
            Quantity::Ints(v) => {
                let parts: Vec<String> = v.iter().map(i64::to_string).collect();
                f.write_str(&parts.join(";"))
            }
            Quantity::Real(v) => write!(f, "{v:e}"),
            Quantity::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// A hypothesis of the checked statement did not hold for this input.
    Skipped,
    /// The computation itself failed.
    Error,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Skipped => "skipped",
            Outcome::Error => "error",
        }
    }

    pub fn of_error(e: &CoreError) -> Self {
        if e.is_precondition() {
            Outcome::Skipped
        } else if matches!(e, CoreError::TheoremViolation(_)) {
            Outcome::Fail
        } else {
            Outcome::Error
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub check_name: String,
    /// The statement this check verifies.
    pub paper_anchor: &'static str,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub pass: Outcome,
    pub residual: Option<f64>,
    pub seconds: Option<f64>,
    pub inputs_digest: String,
    /// Error or skip reason; printed, not emitted.
    #[serde(skip)]
    pub note: Option<String>,
}

impl Record {
    pub fn new(check_name: impl Into<String>, anchor: &'static str, lhs: impl Into<Quantity>, rhs: impl Into<Quantity>, ok: bool) -> Self {
        Self {
            check_name: check_name.into(),
            paper_anchor: anchor,
            lhs: lhs.into(),
            rhs: rhs.into(),
            pass: Outcome::from_bool(ok),
            residual: None,
            seconds: None,
            inputs_digest: String::new(),
            note: None,
        }
    }

    pub fn from_error(check_name: impl Into<String>, anchor: &'static str, e: &CoreError) -> Self {
        Self {
            pass: Outcome::of_error(e),
            note: Some(e.to_string()),
            ..Self::new(check_name, anchor, Quantity::none(), Quantity::none(), false)
        }
    }

    pub fn with_residual(mut self, r: f64) -> Self {
        self.residual = Some(r);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Eigenvalue branches of an sf run, one row per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Branches {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub records: Vec<Record>,
    pub branches: Option<Branches>,
}

impl RunReport {
    pub fn count(&self, o: Outcome) -> usize {
        self.records.iter().filter(|r| r.pass == o).count()
    }

    /// 0 when every check passed or was skipped, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.records.iter().any(|r| matches!(r.pass, Outcome::Fail | Outcome::Error)) {
            1
        } else {
            0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantity_rendering() {
        assert_eq!(Quantity::Int(-3).to_string(), "-3");
        assert_eq!(Quantity::Ints(vec![1, -1, 0]).to_string(), "1;-1;0");
        assert_eq!(Quantity::Real(0.25).to_string(), "2.5e-1");
        assert_eq!(serde_json::to_string(&Quantity::Ints(vec![1, 2])).unwrap(), "[1,2]");
    }

    #[test]
    fn error_mapping() {
        assert_eq!(Outcome::of_error(&CoreError::HypothesisUnmet("x".into())), Outcome::Skipped);
        assert_eq!(Outcome::of_error(&CoreError::TheoremViolation("x".into())), Outcome::Fail);
        assert_eq!(Outcome::of_error(&CoreError::Numerical("x".into())), Outcome::Error);
    }

    #[test]
    fn exit_codes() {
        let mut r = RunReport::default();
        assert_eq!(r.exit_code(), 0);
        r.records.push(Record::from_error("a", "x", &CoreError::HypothesisUnmet("eps".into())));
        assert_eq!(r.exit_code(), 0);
        r.records.push(Record::new("b", "x", 1i64, 2i64, false));
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn json_keys_in_column_order() {
        let r = Record::new("c", "anchor", 1i64, 1i64, true);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"check_name":"c","paper_anchor":"anchor","lhs":1,"rhs":1,"pass":"pass","residual":null,"seconds":null,"inputs_digest":""}"#
        );
    }
}
