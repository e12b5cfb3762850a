//! Parsing of the short descriptor strings accepted on the command line.
//!
//! Every descriptor may also be given as inline JSON (leading `{`) or as
//! `@path` to a JSON file.

use std::f64::consts::PI;
use std::fs;

use pwcert::concentration::WitnessFunction;
use pwcert::geometry::{BodyDescriptor, ConvexBody};
use pwcert::lattice::{Lattice, NodeSet};
use pwcert::spectrum::{AxisBox, Spectrum};
use pwcert::{CertError, Result};

fn bad(what: &str, s: &str, why: impl std::fmt::Display) -> CertError {
    CertError::InvalidSpec(format!("bad {what} descriptor {s:?}: {why}"))
}

/// JSON text behind a descriptor, if it is one.
fn json_text(s: &str) -> Result<Option<String>> {
    let t = s.trim();
    if t.starts_with('{') {
        Ok(Some(t.to_string()))
    } else if let Some(path) = t.strip_prefix('@') {
        fs::read_to_string(path)
            .map(Some)
            .map_err(|e| CertError::InvalidSpec(format!("cannot read {path}: {e}")))
    } else {
        Ok(None)
    }
}

fn from_json<T: serde::de::DeserializeOwned>(what: &str, s: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| bad(what, s, e))
}

/// A real number; accepts `inf`, `pi`, `2pi`, `1.5*pi` and `pi/2`.
pub fn number(s: &str) -> Result<f64> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    if lower == "inf" || lower == "infinity" {
        return Ok(f64::INFINITY);
    }
    if let Some(i) = lower.find("pi") {
        let (head, tail) = (&lower[..i], &lower[i + 2..]);
        let head = head.trim_end_matches('*');
        let c = match head {
            "" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|e| bad("number", s, e))?,
        };
        let d = match tail.strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|e| bad("number", s, e))?,
            None if tail.is_empty() => 1.0,
            None => return Err(bad("number", s, "unexpected text after pi")),
        };
        return Ok(c * PI / d);
    }
    t.parse::<f64>().map_err(|e| bad("number", s, e))
}

/// Comma-separated numbers.
pub fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(number).collect()
}

/// Semicolon-separated vectors of comma-separated numbers.
pub fn vectors(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(numbers).collect()
}

/// Dimension implied by a body descriptor, when it fixes one.
pub fn implied_dim(s: &str) -> Option<usize> {
    if let Ok(Some(text)) = json_text(s) {
        if let Ok(d) = serde_json::from_str::<BodyDescriptor>(&text) {
            return Some(d.n);
        }
        if let Ok(sp) = serde_json::from_str::<Spectrum>(&text) {
            return Some(sp.dim());
        }
        if let Ok(ns) = serde_json::from_str::<NodeSet>(&text) {
            return Some(ns.dim());
        }
        return None;
    }
    let mut parts = s.split(':');
    match (parts.next(), parts.next(), parts.next()) {
        (Some("box"), Some(w), None) if w.contains(',') => Some(w.split(',').count()),
        (Some("lattice"), Some("diag"), Some(d)) => Some(d.split(',').count()),
        (Some("lattice"), Some("rows"), Some(r)) => Some(r.split(';').count()),
        (Some("lattice"), Some("hex"), None) => Some(2),
        (Some("union"), _, _) | (Some("ingham"), _, _) => Some(1),
        (Some("points"), Some(p), None) => p.split(';').next().map(|v| v.split(',').count()),
        _ => None,
    }
}

/// Convex body: `lp:P[:R]`, `ball[:R]`, `box:H` or `box:h1,h2,..`,
/// `cube:H`, `tp:P` (the body n^{1/p}·B_p).
pub fn body(s: &str, n: usize) -> Result<ConvexBody> {
    if let Some(text) = json_text(s)? {
        return from_json::<ConvexBody>("body", s, &text);
    }
    let parts: Vec<&str> = s.split(':').collect();
    let arg = |i: usize, default: f64| -> Result<f64> { parts.get(i).map_or(Ok(default), |v| number(v)) };
    match parts[0] {
        "lp" if parts.len() >= 2 => ConvexBody::lp_ball(n, number(parts[1])?, arg(2, 1.0)?),
        "ball" => ConvexBody::ball(n, arg(1, 1.0)?),
        "box" | "cube" if parts.len() == 2 => {
            let w = numbers(parts[1])?;
            if w.len() == 1 {
                ConvexBody::cube(n, w[0])
            } else {
                ConvexBody::boxed(w)
            }
        }
        "tp" if parts.len() == 2 => ConvexBody::t_body(n, number(parts[1])?),
        _ => Err(bad("body", s, "expected lp:P[:R], ball[:R], box:H, cube:H or tp:P")),
    }
}

/// Spectrum: any body, `union:a..b,c..d` on the line, or JSON of either.
pub fn spectrum(s: &str, n: usize) -> Result<Spectrum> {
    if let Some(text) = json_text(s)? {
        if let Ok(sp) = serde_json::from_str::<Spectrum>(&text) {
            return Ok(sp);
        }
        return from_json::<ConvexBody>("spectrum", s, &text).map(Spectrum::from);
    }
    if let Some(rest) = s.strip_prefix("union:") {
        let mut boxes = Vec::new();
        for piece in rest.split(',') {
            let (a, b) = piece.split_once("..").ok_or_else(|| bad("spectrum", s, "intervals are written a..b"))?;
            boxes.push(AxisBox::new(vec![number(a)?], vec![number(b)?])?);
        }
        return Spectrum::box_union(boxes);
    }
    body(s, n).map(Spectrum::from)
}

/// Lattice: `lattice:identity`, `lattice:scaled:A`, `lattice:diag:a,b,..`,
/// `lattice:hex`, `lattice:rows:a,b;c,d` (rows are the basis vectors).
pub fn lattice(s: &str, n: usize) -> Result<Lattice> {
    if let Some(text) = json_text(s)? {
        return match serde_json::from_str::<NodeSet>(&text) {
            Ok(NodeSet::Lattice { lattice }) => Ok(lattice),
            _ => from_json::<Lattice>("lattice", s, &text),
        };
    }
    let parts: Vec<&str> = s.splitn(3, ':').collect();
    match parts.as_slice() {
        ["lattice", "identity"] => Lattice::identity(n),
        ["lattice", "scaled", a] => Lattice::scaled_identity(n, number(a)?),
        ["lattice", "diag", d] => Lattice::diag(&numbers(d)?),
        ["lattice", "hex"] => Lattice::hexagonal(),
        ["lattice", "rows", r] => Lattice::from_rows(&vectors(r)?),
        _ => Err(bad("lattice", s, "expected lattice:identity, lattice:scaled:A, lattice:diag:.., lattice:hex or lattice:rows:..")),
    }
}

/// Node set: any lattice, `shifted:A:u1;u2;..` (⋃ A·ℤⁿ + u_j),
/// `points:x1;x2;..`, `ingham:R` (the nodes ±π(m − 1/4) within R).
pub fn nodes(s: &str, n: usize) -> Result<NodeSet> {
    if let Some(text) = json_text(s)? {
        if let Ok(ns) = serde_json::from_str::<NodeSet>(&text) {
            ns.validate()?;
            return Ok(ns);
        }
        return from_json::<Lattice>("node set", s, &text).map(NodeSet::from);
    }
    if s.starts_with("lattice:") {
        return lattice(s, n).map(NodeSet::from);
    }
    let parts: Vec<&str> = s.splitn(3, ':').collect();
    match parts.as_slice() {
        ["shifted", a, u] => NodeSet::shifted_union(Lattice::scaled_identity(n, number(a)?)?, vectors(u)?),
        ["points", p] => NodeSet::finite(vectors(p)?),
        ["ingham", r] => Ok(NodeSet::ingham_counterexample(number(r)?)),
        _ => Err(bad("node set", s, "expected lattice:.., shifted:A:u1;u2, points:.. or ingham:R")),
    }
}

/// Witness function: `gaussian:S`, `sinc:W`, `tent:W` or JSON.
pub fn witness(s: &str) -> Result<WitnessFunction> {
    if let Some(text) = json_text(s)? {
        let w = from_json::<WitnessFunction>("witness", s, &text)?;
        w.validate()?;
        return Ok(w);
    }
    let (kind, v) = s.split_once(':').ok_or_else(|| bad("witness", s, "expected kind:value"))?;
    let v = number(v)?;
    let w = match kind {
        "gaussian" => WitnessFunction::Gaussian { scale: v },
        "sinc" => WitnessFunction::SincProduct { width: v, transformed: false },
        "tent" => WitnessFunction::SincProduct { width: v, transformed: true },
        _ => return Err(bad("witness", s, "expected gaussian:S, sinc:W or tent:W")),
    };
    w.validate()?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_with_pi() {
        assert_eq!(number("pi").unwrap(), PI);
        assert_eq!(number("2pi").unwrap(), 2.0 * PI);
        assert_eq!(number("1.5*pi").unwrap(), 1.5 * PI);
        assert_eq!(number("pi/2").unwrap(), PI / 2.0);
        assert_eq!(number("-pi").unwrap(), -PI);
        assert_eq!(number("inf").unwrap(), f64::INFINITY);
        assert!(number("p1").is_err());
    }

    #[test]
    fn short_forms() {
        assert_eq!(body("lp:2:1", 2).unwrap().dim(), 2);
        assert_eq!(body("box:1,2,3", 1).unwrap().dim(), 3);
        assert_eq!(implied_dim("box:1,2,3"), Some(3));
        assert_eq!(lattice("lattice:diag:1.5,1.5", 2).unwrap().det(), 2.25);
        let sp = spectrum("union:0..2pi,4pi..6pi", 1).unwrap();
        assert!((sp.measure().unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!(nodes("shifted:1:0;0.25", 1).unwrap().is_periodic());
        assert!(body("cone:1", 2).is_err());
    }

    #[test]
    fn json_forms() {
        let b = body(r#"{"kind":"lp_ball","n":2,"p":"inf","r":2}"#, 1).unwrap();
        assert_eq!(b.dim(), 2);
        let ns = nodes(r#"{"kind":"lattice","lattice":{"generator":[[1,0],[0,2]]}}"#, 1).unwrap();
        assert_eq!(ns.dim(), 2);
    }
}
