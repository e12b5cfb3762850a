//! Verdict objects returned by the certifiers.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const TOOL_VERSION: &str = concat!("pwcert ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proved,
    Consistent,
    Inconclusive,
    Refuted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proved => "proved",
            Verdict::Consistent => "consistent",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Refuted => "refuted",
        })
    }
}

/// A real number that survives JSON even when infinite or NaN.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        Ok(Real(match Raw::deserialize(d)? {
            Raw::Num(v) => v,
            Raw::Str(s) => match s.as_str() {
                "inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                "nan" => f64::NAN,
                _ => return Err(serde::de::Error::custom(format!("bad real {s:?}"))),
            },
        }))
    }
}

/// One judged claim inside a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub claim: String,
    pub verdict: Verdict,
    /// Finer-grained label, e.g. "refuted_premise" or "proved_by_theorem".
    pub label: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    pub findings: Vec<Finding>,
    pub constants: BTreeMap<String, Real>,
    pub tolerances: BTreeMap<String, Real>,
    pub notes: Vec<String>,
    pub tool_version: String,
}

impl Certificate {
    pub fn new(kind: &str) -> Self {
        Certificate {
            kind: kind.to_string(),
            findings: Vec::new(),
            constants: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            notes: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn finding(&mut self, claim: &str, verdict: Verdict, label: &str, detail: impl Into<String>) {
        self.findings.push(Finding {
            claim: claim.to_string(),
            verdict,
            label: label.to_string(),
            detail: detail.into(),
        });
    }

    pub fn constant(&mut self, name: &str, v: f64) {
        self.constants.insert(name.to_string(), Real(v));
    }

    pub fn tolerance(&mut self, name: &str, v: f64) {
        self.tolerances.insert(name.to_string(), Real(v));
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn verdict_of(&self, claim: &str) -> Option<Verdict> {
        self.findings.iter().find(|f| f.claim == claim).map(|f| f.verdict)
    }

    pub fn label_of(&self, claim: &str) -> Option<&str> {
        self.findings
            .iter()
            .find(|f| f.claim == claim)
            .map(|f| f.label.as_str())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.constants.get(name).map(|r| r.0)
    }

    /// Worst verdict over all findings: refuted beats inconclusive beats
    /// consistent beats proved.
    pub fn overall(&self) -> Verdict {
        self.findings
            .iter()
            .map(|f| f.verdict)
            .max()
            .unwrap_or(Verdict::Inconclusive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_is_worst() {
        let mut c = Certificate::new("t");
        c.finding("a", Verdict::Proved, "proved", "");
        c.finding("b", Verdict::Consistent, "consistent", "");
        assert_eq!(c.overall(), Verdict::Consistent);
        c.finding("c", Verdict::Refuted, "refuted", "");
        assert_eq!(c.overall(), Verdict::Refuted);
    }

    #[test]
    fn non_finite_reals_round_trip() {
        let mut c = Certificate::new("t");
        c.constant("big", f64::INFINITY);
        c.constant("x", 0.5);
        let js = serde_json::to_string(&c).unwrap();
        assert!(js.contains("\"inf\""));
        let back: Certificate = serde_json::from_str(&js).unwrap();
        assert_eq!(back.get("big"), Some(f64::INFINITY));
        assert_eq!(back, c);
    }
}
