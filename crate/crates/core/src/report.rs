//! Serializable probe reports: exact values next to 12-digit decimals, stable
//! field order, witnesses that re-evaluate to the reported statistics.

use crate::rational::{decimal_12, fmt_rat, Rat};
use serde::{Deserialize, Serialize};

/// A named scalar carried by a report; the exact field is authoritative when
/// present.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Stat {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub decimal: String,
}

impl Stat {
    pub fn exact(name: impl Into<String>, value: &Rat) -> Self {
        Stat {
            name: name.into(),
            exact: Some(fmt_rat(value)),
            decimal: decimal_12(value),
        }
    }

    pub fn float(name: impl Into<String>, value: f64) -> Self {
        Stat {
            name: name.into(),
            exact: None,
            decimal: format!("{value:.12e}"),
        }
    }

    pub fn count(name: impl Into<String>, value: u64) -> Self {
        Stat {
            name: name.into(),
            exact: Some(value.to_string()),
            decimal: value.to_string(),
        }
    }
}

/// Extremal sample recorded with exact coordinates so it can be re-evaluated.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Witness {
    pub label: String,
    /// One coordinate vector per involved class, as exact rationals.
    pub points: Vec<Vec<String>>,
    pub data: Vec<Stat>,
}

impl Witness {
    pub fn point(label: impl Into<String>, coords: &[Rat]) -> Self {
        Witness {
            label: label.into(),
            points: vec![coords.iter().map(fmt_rat).collect()],
            data: vec![],
        }
    }

    pub fn pair(label: impl Into<String>, a: &[Rat], b: &[Rat]) -> Self {
        Witness {
            label: label.into(),
            points: vec![
                a.iter().map(fmt_rat).collect(),
                b.iter().map(fmt_rat).collect(),
            ],
            data: vec![],
        }
    }

    pub fn with(mut self, stat: Stat) -> Self {
        self.data.push(stat);
        self
    }
}

/// Outcome of a randomized certification probe; reproducible from
/// `(seed, parameters)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProbeReport {
    pub kind: String,
    pub geometry: String,
    pub region: String,
    pub seed: u64,
    pub samples: u64,
    pub statistics: Vec<Stat>,
    pub witnesses: Vec<Witness>,
    pub passed: bool,
}

impl ProbeReport {
    pub fn stat(&self, name: &str) -> Option<&Stat> {
        self.statistics.iter().find(|s| s.name == name)
    }

    /// Decimal value of a named statistic.
    pub fn value(&self, name: &str) -> Option<f64> {
        self.stat(name).and_then(|s| s.decimal.parse().ok())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
