//! One-line JSON verdict records shared by the sweep runner and the CLI.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::form::QuadraticForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Strict,
    Equality,
    Violated,
    Obstructed,
    Unconditional,
    Conditional,
    Error,
}

impl Status {
    pub fn parse(s: &str) -> Option<Self> {
        serde_json::from_value(Value::String(s.to_string())).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subject {
    Form { gram: Vec<Vec<i64>> },
    Seifert { data: String },
    Knot { name: String },
    Pair { first: Vec<Vec<i64>>, second: Vec<Vec<i64>> },
}

impl Subject {
    pub fn form(q: &QuadraticForm) -> Self {
        Subject::Form { gram: q.rows() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub subject: Subject,
    pub operation: String,
    pub status: Status,
    pub payload: Value,
}

impl VerdictRecord {
    pub fn new(subject: Subject, operation: &str, status: Status, payload: impl Serialize) -> Self {
        let payload = serde_json::to_value(payload).expect("payloads serialize");
        Self { subject, operation: operation.to_string(), status, payload }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn is_violation(&self) -> bool {
        self.status == Status::Violated
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let q = QuadraticForm::diagonal(&[1, 3]).unwrap();
        let r = VerdictRecord::new(Subject::form(&q), "check-det3", Status::Equality, serde_json::json!({"x": "1/3"}));
        let line = r.to_line();
        let back: VerdictRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
        assert!(line.contains("\"status\":\"equality\""));
        assert_eq!(Status::parse("conditional"), Some(Status::Conditional));
    }
}
