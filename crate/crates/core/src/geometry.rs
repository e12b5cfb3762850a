//! Symmetric convex bodies: gauges, support functions and volumes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, CertError, Result};
use crate::special::gamma;

/// An lp exponent in [1, ∞]. Serializes ∞ as the string "inf".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const INF: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(CertError::InvalidSpec(format!("lp exponent must be >= 1, got {p}")));
        }
        Ok(Exponent(p))
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Conjugate exponent q with 1/p + 1/q = 1.
    pub fn conjugate(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INF
        } else if self.0.is_infinite() {
            Exponent(1.0)
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }

    /// 1/p, with 1/∞ = 0.
    pub fn recip(self) -> f64 {
        if self.0.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent(p)),
            Raw::Str(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(Exponent::INF),
                other => other
                    .parse::<f64>()
                    .map(Exponent)
                    .map_err(|_| serde::de::Error::custom(format!("bad exponent {s:?}"))),
            },
        }
    }
}

/// lp norm of `x`; stable for large p.
pub fn lp_norm(x: &[f64], p: Exponent) -> f64 {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if p.is_infinite() || m == 0.0 {
        return m;
    }
    if p.0 == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if p.0 == 2.0 {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    let s: f64 = x.iter().map(|v| (v.abs() / m).powf(p.0)).sum();
    m * s.powf(1.0 / p.0)
}

pub type GaugeFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A body given only through its gauge.
#[derive(Clone)]
pub struct CustomBody {
    pub n: usize,
    pub gauge: GaugeFn,
    /// Support function, when known.
    pub polar: Option<GaugeFn>,
    /// Euclidean radius of a ball containing the body.
    pub circumradius: f64,
    /// Euclidean radius of a ball contained in the body.
    pub inradius: f64,
    pub label: String,
}

impl fmt::Debug for CustomBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomBody")
            .field("n", &self.n)
            .field("label", &self.label)
            .field("circumradius", &self.circumradius)
            .field("inradius", &self.inradius)
            .finish()
    }
}

/// A centrally symmetric convex body in ℝⁿ.
#[derive(Debug, Clone)]
pub enum ConvexBody {
    LpBall { n: usize, p: Exponent, r: f64 },
    Box { half_widths: Vec<f64> },
    Scaled { inner: Box<ConvexBody>, factor: f64 },
    Custom(CustomBody),
}

/// JSON shape of a body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyDescriptor {
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_widths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<BodyDescriptor>>,
}

/// How to compute a volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum VolumeMethod {
    ClosedForm,
    MonteCarlo { seed: u64, samples: usize },
}

/// A volume with an absolute error bound (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    pub value: f64,
    pub abs_error_bound: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(CertError::InvalidSpec(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl ConvexBody {
    pub fn lp_ball(n: usize, p: f64, r: f64) -> Result<Self> {
        if n == 0 {
            return Err(CertError::InvalidSpec("dimension must be >= 1".into()));
        }
        positive("radius", r)?;
        Ok(ConvexBody::LpBall { n, p: Exponent::new(p)?, r })
    }

    /// Euclidean ball of radius r.
    pub fn ball(n: usize, r: f64) -> Result<Self> {
        Self::lp_ball(n, 2.0, r)
    }

    /// Cube [-h, h]ⁿ.
    pub fn cube(n: usize, h: f64) -> Result<Self> {
        Self::boxed(vec![h; n])
    }

    pub fn boxed(half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.is_empty() {
            return Err(CertError::InvalidSpec("box needs at least one half-width".into()));
        }
        for &h in &half_widths {
            positive("half-width", h)?;
        }
        Ok(ConvexBody::Box { half_widths })
    }

    pub fn scaled(inner: ConvexBody, factor: f64) -> Result<Self> {
        positive("scale factor", factor)?;
        Ok(ConvexBody::Scaled { inner: Box::new(inner), factor })
    }

    /// The body n^{1/p}·B_p.
    pub fn t_body(n: usize, p: f64) -> Result<Self> {
        let e = Exponent::new(p)?;
        Self::lp_ball(n, p, (n as f64).powf(e.recip()))
    }

    pub fn custom(body: CustomBody) -> Result<Self> {
        if body.n == 0 {
            return Err(CertError::InvalidSpec("dimension must be >= 1".into()));
        }
        positive("circumradius", body.circumradius)?;
        positive("inradius", body.inradius)?;
        Ok(ConvexBody::Custom(body))
    }

    pub fn from_descriptor(d: &BodyDescriptor) -> Result<Self> {
        let body = match d.kind.as_str() {
            "lp_ball" | "lp" => {
                let p = d.p.ok_or_else(|| CertError::InvalidSpec("lp_ball needs p".into()))?;
                let r = d.r.unwrap_or(1.0);
                Self::lp_ball(d.n, p.0, r)?
            }
            "ball" => Self::ball(d.n, d.r.unwrap_or(1.0))?,
            "box" => {
                let hw = match (&d.half_widths, d.r) {
                    (Some(h), _) => h.clone(),
                    (None, Some(r)) => vec![r; d.n],
                    (None, None) => return Err(CertError::InvalidSpec("box needs half_widths".into())),
                };
                Self::boxed(hw)?
            }
            "scaled" => {
                let inner = d
                    .inner
                    .as_ref()
                    .ok_or_else(|| CertError::InvalidSpec("scaled needs inner".into()))?;
                let f = d
                    .factor
                    .ok_or_else(|| CertError::InvalidSpec("scaled needs factor".into()))?;
                Self::scaled(Self::from_descriptor(inner)?, f)?
            }
            other => return Err(CertError::InvalidSpec(format!("unknown body kind {other:?}"))),
        };
        check_dim(d.n, body.dim())?;
        Ok(body)
    }

    pub fn to_descriptor(&self) -> Result<BodyDescriptor> {
        let blank = |kind: &str, n| BodyDescriptor {
            kind: kind.into(),
            n,
            p: None,
            r: None,
            half_widths: None,
            factor: None,
            inner: None,
        };
        Ok(match self {
            ConvexBody::LpBall { n, p, r } => BodyDescriptor {
                p: Some(*p),
                r: Some(*r),
                ..blank("lp_ball", *n)
            },
            ConvexBody::Box { half_widths } => BodyDescriptor {
                half_widths: Some(half_widths.clone()),
                ..blank("box", half_widths.len())
            },
            ConvexBody::Scaled { inner, factor } => BodyDescriptor {
                factor: Some(*factor),
                inner: Some(Box::new(inner.to_descriptor()?)),
                ..blank("scaled", inner.dim())
            },
            ConvexBody::Custom(c) => {
                return Err(CertError::Unsupported(format!(
                    "custom body {:?} has no descriptor",
                    c.label
                )))
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::LpBall { n, .. } => *n,
            ConvexBody::Box { half_widths } => half_widths.len(),
            ConvexBody::Scaled { inner, .. } => inner.dim(),
            ConvexBody::Custom(c) => c.n,
        }
    }

    /// Minkowski functional, without the dimension check.
    pub fn gauge_of(&self, x: &[f64]) -> f64 {
        match self {
            ConvexBody::LpBall { p, r, .. } => lp_norm(x, *p) / r,
            ConvexBody::Box { half_widths } => x
                .iter()
                .zip(half_widths)
                .fold(0.0f64, |a, (v, h)| a.max(v.abs() / h)),
            ConvexBody::Scaled { inner, factor } => inner.gauge_of(x) / factor,
            ConvexBody::Custom(c) => (c.gauge)(x),
        }
    }

    /// Minkowski functional ‖x‖ = min{t ≥ 0 : x ∈ t·body}.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.gauge_of(x))
    }

    /// Support function, without the dimension check.
    pub fn support_of(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            ConvexBody::LpBall { p, r, .. } => r * lp_norm(x, p.conjugate()),
            ConvexBody::Box { half_widths } => {
                x.iter().zip(half_widths).map(|(v, h)| v.abs() * h).sum()
            }
            ConvexBody::Scaled { inner, factor } => factor * inner.support_of(x)?,
            ConvexBody::Custom(c) => match &c.polar {
                Some(f) => f(x),
                None => {
                    return Err(CertError::Unsupported(format!(
                        "custom body {:?} has no support function",
                        c.label
                    )))
                }
            },
        })
    }

    /// Gauge of the polar body, i.e. the support function of this body.
    pub fn polar_gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        self.support_of(x)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.gauge_of(x) <= 1.0
    }

    /// Radius of the smallest centered Euclidean ball containing the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            ConvexBody::LpBall { n, p, r } => r * (*n as f64).powf(0.5 - p.recip()).max(1.0),
            ConvexBody::Box { half_widths } => half_widths.iter().map(|h| h * h).sum::<f64>().sqrt(),
            ConvexBody::Scaled { inner, factor } => factor * inner.circumradius(),
            ConvexBody::Custom(c) => c.circumradius,
        }
    }

    /// Radius of the largest centered Euclidean ball inside the body.
    pub fn inradius(&self) -> f64 {
        match self {
            ConvexBody::LpBall { n, p, r } => r * (*n as f64).powf(0.5 - p.recip()).min(1.0),
            ConvexBody::Box { half_widths } => half_widths.iter().copied().fold(f64::INFINITY, f64::min),
            ConvexBody::Scaled { inner, factor } => factor * inner.inradius(),
            ConvexBody::Custom(c) => c.inradius,
        }
    }

    /// Per-axis half-widths of a bounding box.
    pub fn bounding_box(&self) -> Vec<f64> {
        match self {
            ConvexBody::LpBall { n, r, .. } => vec![*r; *n],
            ConvexBody::Box { half_widths } => half_widths.clone(),
            ConvexBody::Scaled { inner, factor } => {
                inner.bounding_box().into_iter().map(|h| h * factor).collect()
            }
            ConvexBody::Custom(c) => vec![c.circumradius; c.n],
        }
    }

    /// Whether the body is an axis-parallel box (possibly scaled, or an l∞ ball).
    pub fn as_box(&self) -> Option<Vec<f64>> {
        match self {
            ConvexBody::LpBall { n, p, r } if p.is_infinite() => Some(vec![*r; *n]),
            ConvexBody::Box { half_widths } => Some(half_widths.clone()),
            ConvexBody::Scaled { inner, factor } => inner
                .as_box()
                .map(|h| h.into_iter().map(|v| v * factor).collect()),
            _ => None,
        }
    }

    /// (p, r) when the body is r·B_p, possibly written as a scaled body.
    pub fn as_lp_ball(&self) -> Option<(Exponent, f64)> {
        match self {
            ConvexBody::LpBall { p, r, .. } => Some((*p, *r)),
            ConvexBody::Scaled { inner, factor } => inner.as_lp_ball().map(|(p, r)| (p, r * factor)),
            _ => None,
        }
    }

    /// Sampled check of gauge(x) = gauge(-x).
    pub fn is_symmetric(&self, seed: u64, trials: usize) -> bool {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut neg = vec![0.0; n];
        for _ in 0..trials {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for (a, b) in neg.iter_mut().zip(&x) {
                *a = -b;
            }
            let (g1, g2) = (self.gauge_of(&x), self.gauge_of(&neg));
            if (g1 - g2).abs() > 1e-10 * (1.0 + g1.abs()) {
                return false;
            }
        }
        true
    }

    pub fn volume(&self, method: VolumeMethod) -> Result<Volume> {
        match method {
            VolumeMethod::ClosedForm => Ok(Volume {
                value: self.closed_form_volume()?,
                abs_error_bound: 0.0,
            }),
            VolumeMethod::MonteCarlo { seed, samples } => self.monte_carlo_volume(seed, samples),
        }
    }

    fn closed_form_volume(&self) -> Result<f64> {
        match self {
            ConvexBody::LpBall { n, p, r } => {
                let nf = *n as f64;
                let unit = if p.is_infinite() {
                    2f64.powi(*n as i32)
                } else if p.0 == 2.0 {
                    PI.powf(nf / 2.0) / gamma(1.0 + nf / 2.0)
                } else {
                    (2.0 * gamma(1.0 + 1.0 / p.0)).powi(*n as i32) / gamma(1.0 + nf / p.0)
                };
                Ok(unit * r.powi(*n as i32))
            }
            ConvexBody::Box { half_widths } => Ok(half_widths.iter().map(|h| 2.0 * h).product()),
            ConvexBody::Scaled { inner, factor } => {
                Ok(inner.closed_form_volume()? * factor.powi(inner.dim() as i32))
            }
            ConvexBody::Custom(c) => Err(CertError::Unsupported(format!(
                "no closed-form volume for custom body {:?}",
                c.label
            ))),
        }
    }

    fn monte_carlo_volume(&self, seed: u64, samples: usize) -> Result<Volume> {
        if samples < 10_000 {
            return Err(CertError::InvalidSpec(format!(
                "monte carlo volume needs at least 10000 samples, got {samples}"
            )));
        }
        let bb = self.bounding_box();
        let box_vol: f64 = bb.iter().map(|h| 2.0 * h).product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![0.0; bb.len()];
        let mut hits = 0usize;
        for _ in 0..samples {
            for (xi, h) in x.iter_mut().zip(&bb) {
                *xi = rng.random_range(-*h..*h);
            }
            if self.contains(&x) {
                hits += 1;
            }
        }
        let n = samples as f64;
        let phat = hits as f64 / n;
        Ok(Volume {
            value: box_vol * phat,
            abs_error_bound: 1.96 * box_vol * (phat * (1.0 - phat) / n).sqrt(),
        })
    }
}

impl Serialize for ConvexBody {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_descriptor()
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConvexBody {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = BodyDescriptor::deserialize(d)?;
        ConvexBody::from_descriptor(&desc).map_err(serde::de::Error::custom)
    }
}

/// A nonnegative "level" function on ℝⁿ whose sublevel set {level ≤ 1} is
/// the region of interest. Gauges are the main example; unions of boxes are
/// the other.
pub trait Level {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Lipschitz constant with respect to the Euclidean norm.
    fn lipschitz(&self) -> f64;
    /// Euclidean radius of a centered ball containing {level ≤ rho}.
    fn reach(&self, rho: f64) -> f64;
    /// Upper bound for the level at any point of Euclidean norm ≤ radius.
    fn upper(&self, radius: f64) -> f64;
}

impl Level for ConvexBody {
    fn dim(&self) -> usize {
        ConvexBody::dim(self)
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.gauge_of(x)
    }
    fn lipschitz(&self) -> f64 {
        1.0 / self.inradius()
    }
    fn reach(&self, rho: f64) -> f64 {
        rho * self.circumradius()
    }
    fn upper(&self, radius: f64) -> f64 {
        radius / self.inradius()
    }
}

/// The gauge of the polar body of a convex body (its support function).
#[derive(Debug, Clone, Copy)]
pub struct PolarOf<'a>(pub &'a ConvexBody);

impl<'a> PolarOf<'a> {
    pub fn new(body: &'a ConvexBody) -> Result<Self> {
        let probe = vec![1.0; body.dim()];
        body.support_of(&probe)?;
        Ok(PolarOf(body))
    }
}

impl Level for PolarOf<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.support_of(x).expect("support function checked at construction")
    }
    fn lipschitz(&self) -> f64 {
        self.0.circumradius()
    }
    fn reach(&self, rho: f64) -> f64 {
        rho / self.0.inradius()
    }
    fn upper(&self, radius: f64) -> f64 {
        radius * self.0.circumradius()
    }
}

/// Plain Euclidean norm in dimension n.
#[derive(Debug, Clone, Copy)]
pub struct Euclidean(pub usize);

impl Level for Euclidean {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
    fn lipschitz(&self) -> f64 {
        1.0
    }
    fn reach(&self, rho: f64) -> f64 {
        rho
    }
    fn upper(&self, radius: f64) -> f64 {
        radius
    }
}
