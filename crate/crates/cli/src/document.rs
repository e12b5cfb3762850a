//! Result documents and their JSON rendering.

use std::collections::BTreeMap;
use std::io;

use pwcert::certificate::{Verdict, TOOL_VERSION};
use pwcert::CertError;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;

/// Writes every float with 17 significant digits.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", v as f64)
    }
}

/// Compact JSON with 17-digit floats and a trailing newline.
pub fn render<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// What a command produced, before it is wrapped into a document.
#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Value,
    /// None for commands that compute without judging.
    pub verdict: Option<Verdict>,
    pub seeds: BTreeMap<String, u64>,
    pub tolerances: BTreeMap<String, f64>,
    /// Tabular form for `--format csv`.
    pub csv: Option<String>,
    /// (path, contents) of requested CSV dumps.
    pub dumps: Vec<(String, String)>,
}

impl Outcome {
    pub fn new<T: Serialize>(result: &T) -> Result<Self, CertError> {
        let result = serde_json::to_value(result).map_err(|e| CertError::InvalidSpec(format!("serialization: {e}")))?;
        Ok(Outcome { result, ..Default::default() })
    }

    pub fn verdict(mut self, v: Verdict) -> Self {
        self.verdict = Some(v);
        self
    }

    pub fn seed(mut self, name: &str, v: u64) -> Self {
        self.seeds.insert(name.into(), v);
        self
    }

    pub fn tolerance(mut self, name: &str, v: f64) -> Self {
        self.tolerances.insert(name.into(), v);
        self
    }

    pub fn csv(mut self, text: String) -> Self {
        self.csv = Some(text);
        self
    }

    pub fn dump(mut self, path: Option<&String>, text: impl FnOnce() -> String) -> Self {
        if let Some(p) = path {
            self.dumps.push((p.clone(), text()));
        }
        self
    }
}

pub fn exit_code(v: Option<Verdict>) -> i32 {
    match v {
        None | Some(Verdict::Proved) | Some(Verdict::Consistent) => 0,
        Some(Verdict::Refuted) => 1,
        Some(Verdict::Inconclusive) => 2,
    }
}

/// Errors that describe the outcome of a computation rather than bad input.
pub fn is_computational(e: &CertError) -> bool {
    matches!(
        e,
        CertError::PipelineFailed { .. }
            | CertError::StepFailed { .. }
            | CertError::ToleranceNotMet { .. }
            | CertError::ResolutionTooCoarse(_)
            | CertError::WindowTooSmall(_)
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub tool_version: String,
    pub command: String,
    /// Arguments that reproduce the run.
    pub argv: Vec<String>,
    /// Parsed parameters.
    pub input: Value,
    pub seeds: BTreeMap<String, u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub verdict: Option<Verdict>,
    pub exit_code: i32,
    pub result: Value,
}

impl Document {
    pub fn new(command: String, argv: Vec<String>, input: Value, o: &Outcome) -> Self {
        Document {
            tool_version: TOOL_VERSION.to_string(),
            command,
            argv,
            input,
            seeds: o.seeds.clone(),
            tolerances: o.tolerances.clone(),
            verdict: o.verdict,
            exit_code: exit_code(o.verdict),
            result: o.result.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorObject {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorDocument {
    pub tool_version: String,
    pub command: Option<String>,
    pub argv: Vec<String>,
    pub exit_code: i32,
    pub error: ErrorObject,
}

impl ErrorDocument {
    pub fn new(command: Option<String>, argv: Vec<String>, kind: &str, message: String, exit_code: i32) -> Self {
        ErrorDocument {
            tool_version: TOOL_VERSION.to_string(),
            command,
            argv,
            exit_code,
            error: ErrorObject { kind: kind.to_string(), message },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = render(&serde_json::json!({"a": 0.1, "b": [1.0, -2.5e-7], "n": 3}));
        assert_eq!(s, "{\"a\":1.0000000000000001e-1,\"b\":[1.0000000000000000e0,-2.4999999999999999e-7],\"n\":3}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["b"][1].as_f64(), Some(-2.5e-7));
    }
}
