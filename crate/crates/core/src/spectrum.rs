//! Spectra: a convex body or a finite union of axis-parallel boxes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::geometry::{ConvexBody, Level, VolumeMethod};

/// Closed axis-parallel box [lo, hi].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(CertError::InvalidSpec("box corners must have equal positive length".into()));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(CertError::InvalidSpec(format!("degenerate box side [{a}, {b}]")));
            }
        }
        Ok(AxisBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn half_widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (b - a)).collect()
    }

    pub fn measure(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// l∞ level relative to the box: ≤ 1 inside.
    pub fn level(&self, x: &[f64]) -> f64 {
        let mut m = 0.0f64;
        for i in 0..x.len() {
            let c = 0.5 * (self.lo[i] + self.hi[i]);
            let h = 0.5 * (self.hi[i] - self.lo[i]);
            m = m.max((x[i] - c).abs() / h);
        }
        m
    }

    /// Measure of self ∩ (other + shift).
    pub fn overlap_with_shift(&self, other: &AxisBox, shift: &[f64]) -> f64 {
        let mut vol = 1.0;
        for i in 0..self.dim() {
            let lo = self.lo[i].max(other.lo[i] + shift[i]);
            let hi = self.hi[i].min(other.hi[i] + shift[i]);
            if hi <= lo {
                return 0.0;
            }
            vol *= hi - lo;
        }
        vol
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum {
    Body { body: ConvexBody },
    BoxUnion { boxes: Vec<AxisBox> },
}

impl From<ConvexBody> for Spectrum {
    fn from(body: ConvexBody) -> Self {
        Spectrum::Body { body }
    }
}

impl Spectrum {
    /// Union of boxes; rejects overlaps of positive measure.
    pub fn box_union(boxes: Vec<AxisBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(CertError::InvalidSpec("box union needs at least one box".into()));
        }
        let n = boxes[0].dim();
        let zero = vec![0.0; n];
        for (i, a) in boxes.iter().enumerate() {
            if a.dim() != n {
                return Err(CertError::DimensionMismatch { expected: n, got: a.dim() });
            }
            for b in &boxes[..i] {
                let ov = a.overlap_with_shift(b, &zero);
                if ov > 1e-12 * a.measure().min(b.measure()) {
                    return Err(CertError::InvalidSpec("boxes in a union must not overlap".into()));
                }
            }
        }
        Ok(Spectrum::BoxUnion { boxes })
    }

    /// Union of intervals on the line.
    pub fn intervals(iv: &[(f64, f64)]) -> Result<Self> {
        let boxes = iv
            .iter()
            .map(|&(a, b)| AxisBox::new(vec![a], vec![b]))
            .collect::<Result<Vec<_>>>()?;
        Self::box_union(boxes)
    }

    pub fn dim(&self) -> usize {
        match self {
            Spectrum::Body { body } => body.dim(),
            Spectrum::BoxUnion { boxes } => boxes[0].dim(),
        }
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> Result<f64> {
        match self {
            Spectrum::Body { body } => Ok(body.volume(VolumeMethod::ClosedForm)?.value),
            Spectrum::BoxUnion { boxes } => Ok(boxes.iter().map(AxisBox::measure).sum()),
        }
    }

    /// The spectrum as a list of boxes, when it is one.
    pub fn boxes(&self) -> Option<Vec<AxisBox>> {
        match self {
            Spectrum::Body { body } => body.as_box().map(|h| {
                vec![AxisBox {
                    lo: h.iter().map(|v| -v).collect(),
                    hi: h,
                }]
            }),
            Spectrum::BoxUnion { boxes } => Some(boxes.clone()),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.value(x) <= 1.0
    }

    /// Bounding box as (lo, hi).
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Spectrum::Body { body } => {
                let h = body.bounding_box();
                (h.iter().map(|v| -v).collect(), h)
            }
            Spectrum::BoxUnion { boxes } => {
                let n = boxes[0].dim();
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for b in boxes {
                    for i in 0..n {
                        lo[i] = lo[i].min(b.lo[i]);
                        hi[i] = hi[i].max(b.hi[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Uniform sample from the spectrum.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Spectrum::Body { body } => {
                let h = body.bounding_box();
                loop {
                    let x: Vec<f64> = h.iter().map(|&v| rng.random_range(-v..v)).collect();
                    if body.contains(&x) {
                        return x;
                    }
                }
            }
            Spectrum::BoxUnion { boxes } => {
                let total: f64 = boxes.iter().map(AxisBox::measure).sum();
                let mut u = rng.random_range(0.0..total);
                let mut pick = &boxes[boxes.len() - 1];
                for b in boxes {
                    if u < b.measure() {
                        pick = b;
                        break;
                    }
                    u -= b.measure();
                }
                pick.lo
                    .iter()
                    .zip(&pick.hi)
                    .map(|(a, b)| rng.random_range(*a..*b))
                    .collect()
            }
        }
    }
}

impl Level for Spectrum {
    fn dim(&self) -> usize {
        Spectrum::dim(self)
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Spectrum::Body { body } => body.gauge_of(x),
            Spectrum::BoxUnion { boxes } => boxes
                .iter()
                .map(|b| b.level(x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn lipschitz(&self) -> f64 {
        match self {
            Spectrum::Body { body } => Level::lipschitz(body),
            Spectrum::BoxUnion { boxes } => boxes
                .iter()
                .flat_map(|b| b.half_widths())
                .fold(0.0f64, |a, h| a.max(1.0 / h)),
        }
    }

    fn reach(&self, rho: f64) -> f64 {
        match self {
            Spectrum::Body { body } => body.reach(rho),
            Spectrum::BoxUnion { boxes } => boxes
                .iter()
                .map(|b| norm(&b.center()) + rho * norm(&b.half_widths()))
                .fold(0.0, f64::max),
        }
    }

    fn upper(&self, radius: f64) -> f64 {
        match self {
            Spectrum::Body { body } => body.upper(radius),
            Spectrum::BoxUnion { boxes } => {
                let b = &boxes[0];
                let hmin = b.half_widths().into_iter().fold(f64::INFINITY, f64::min);
                (radius + norm(&b.center())) / hmin
            }
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn union_measure_and_level() {
        let s = Spectrum::intervals(&[(0.0, 2.0 * PI), (4.0 * PI, 6.0 * PI)]).unwrap();
        assert!((s.measure().unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!(s.contains(&[1.0]));
        assert!(!s.contains(&[3.0 * PI]));
        assert!(s.contains(&[5.0 * PI]));
        assert!((s.value(&[3.0 * PI]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_union_rejected() {
        assert!(Spectrum::intervals(&[(0.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(Spectrum::intervals(&[(0.0, 1.0), (1.0, 3.0)]).is_ok());
    }

    #[test]
    fn json_shape() {
        let s: Spectrum =
            serde_json::from_str(r#"{"kind":"body","body":{"kind":"lp_ball","n":2,"p":2,"r":3}}"#)
                .unwrap();
        assert_eq!(s.dim(), 2);
        let u: Spectrum =
            serde_json::from_str(r#"{"kind":"box_union","boxes":[{"lo":[0],"hi":[1]}]}"#).unwrap();
        assert!((u.measure().unwrap() - 1.0).abs() < 1e-15);
    }
}
