//! Structured check records shared by the verification suite and the CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Recorded value without a pass/fail contract.
    Report,
}

/// One verified claim: measured values, the bound they were held to, and
/// the outcome. Values live in a BTreeMap so serialization is
/// deterministic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// `module::operation` that produced the record.
    pub operation: String,
    pub values: BTreeMap<String, f64>,
    pub bound: String,
    pub status: CheckStatus,
}

impl CheckRecord {
    pub fn new(name: &str, operation: &str, bound: &str) -> Self {
        CheckRecord {
            name: name.to_string(),
            operation: operation.to_string(),
            values: BTreeMap::new(),
            bound: bound.to_string(),
            status: CheckStatus::Report,
        }
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn passed(mut self, ok: bool) -> Self {
        self.status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        self
    }

    pub fn is_pass(&self) -> bool {
        matches!(self.status, CheckStatus::Pass | CheckStatus::Report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_roundtrips_losslessly() {
        let rec = CheckRecord::new("demo", "module::op", "x <= 1e-6")
            .value("x", 3.0000000000000004e-7)
            .value("y", -1.25e101)
            .passed(true);
        let json = serde_json::to_string(&rec).unwrap();
        let back: CheckRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.name, rec.name);
        assert_eq!(back.operation, rec.operation);
        assert_eq!(back.values, rec.values);
        assert_eq!(back.status, rec.status);
        // stable serialization: a second pass is byte-identical
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
