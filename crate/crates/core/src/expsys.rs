//! Exponential systems on a spectrum: Gram sections, lower Riesz-bound
//! trends, empirical sampling ratios and the shifted-lattice determinant.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, CertError, Result};
use crate::geometry::{ConvexBody, Exponent};
use crate::lattice::NodeSet;
use crate::linalg::{complex_det, hermitian_extremes};
use crate::quad::GaussLegendre;
use crate::special::sinc;
use crate::spectrum::{AxisBox, Spectrum};

pub const MAX_GRAM_NODES: usize = 4096;
const ENTRY_TOL: f64 = 1e-9;

/// ∫ over the box of e^{i d·x} dx.
pub fn box_transform(b: &AxisBox, d: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..d.len() {
        let w = b.hi[i] - b.lo[i];
        let mid = 0.5 * (b.hi[i] + b.lo[i]);
        acc *= Complex64::from_polar(w * sinc(0.5 * d[i] * w), d[i] * mid);
    }
    acc
}

/// ∫ over the unit lp ball of cos(d·x) dx, by nested quadrature over
/// sections. Returns (value, error estimate).
fn lp_unit_transform(d: &[f64], p: f64, rules: &[GaussLegendre]) -> Result<(f64, f64)> {
    let n = d.len();
    if n == 1 {
        return Ok((2.0 * sinc(d[0]), 0.0));
    }
    // x₁ = 1 − uᵖ straightens the section radius (1 − x₁ᵖ)^{1/p} near x₁ = 1
    let eval = |rule: &GaussLegendre| -> Result<(f64, f64)> {
        let mut acc = 0.0;
        let mut err = 0.0;
        for (u, w) in rule.mapped(0.0, 1.0) {
            let up = u.powf(p);
            let x1 = 1.0 - up;
            let jac = p * u.powf(p - 1.0);
            let rho = (1.0 - x1.powf(p)).max(0.0).powf(1.0 / p);
            if rho == 0.0 {
                continue;
            }
            let inner: Vec<f64> = d[1..].iter().map(|v| v * rho).collect();
            let (f, e) = lp_unit_transform(&inner, p, rules)?;
            let scale = rho.powi(n as i32 - 1);
            acc += w * jac * (d[0] * x1).cos() * f * scale;
            err += w * jac * e * scale;
        }
        Ok((2.0 * acc, 2.0 * err))
    };
    let mut prev = eval(&rules[0])?;
    let mut achieved = f64::INFINITY;
    for rule in &rules[1..] {
        let cur = eval(rule)?;
        achieved = (cur.0 - prev.0).abs() + cur.1;
        if achieved <= ENTRY_TOL {
            return Ok((cur.0, achieved));
        }
        prev = cur;
    }
    Err(CertError::ToleranceNotMet { achieved, required: ENTRY_TOL })
}

fn lp_rules() -> Vec<GaussLegendre> {
    [16, 32, 64, 128, 256, 512, 1024].iter().map(|&k| GaussLegendre::new(k)).collect()
}

/// Evaluates ∫_S e^{i d·x} dx for a fixed spectrum.
struct Transform<'a> {
    spectrum: &'a Spectrum,
    boxes: Option<Vec<AxisBox>>,
    rules: Vec<GaussLegendre>,
    cache: HashMap<Vec<u64>, Complex64>,
    max_error: f64,
}

impl<'a> Transform<'a> {
    fn new(spectrum: &'a Spectrum) -> Result<Self> {
        let boxes = spectrum.boxes();
        if boxes.is_none() {
            if let Spectrum::Body { body } = spectrum {
                lp_parts(body)?;
            }
        }
        Ok(Transform { spectrum, boxes, rules: Vec::new(), cache: HashMap::new(), max_error: 0.0 })
    }

    fn eval(&mut self, d: &[f64]) -> Result<Complex64> {
        if let Some(bs) = &self.boxes {
            return Ok(bs.iter().map(|b| box_transform(b, d)).sum());
        }
        let key: Vec<u64> = d.iter().map(|v| (v + 0.0).to_bits()).collect();
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let Spectrum::Body { body } = self.spectrum else {
            unreachable!("box unions always have boxes")
        };
        let (p, r) = lp_parts(body)?;
        if self.rules.is_empty() {
            self.rules = lp_rules();
        }
        let n = d.len() as i32;
        let scaled: Vec<f64> = d.iter().map(|v| v * r).collect();
        let (v, e) = lp_unit_transform(&scaled, p, &self.rules)?;
        let rn = r.powi(n);
        self.max_error = self.max_error.max(e * rn);
        let out = Complex64::new(v * rn, 0.0);
        self.cache.insert(key, out);
        Ok(out)
    }
}

/// (p, r) of a possibly scaled lp ball.
fn lp_parts(body: &ConvexBody) -> Result<(f64, f64)> {
    match body {
        ConvexBody::LpBall { p, r, .. } if !p.is_infinite() => Ok((p.0, *r)),
        ConvexBody::LpBall { .. } => Ok((Exponent::INF.0, 1.0)),
        ConvexBody::Scaled { inner, factor } => lp_parts(inner).map(|(p, r)| (p, r * factor)),
        _ => Err(CertError::Unsupported(
            "Gram entries need a box, a box union or an lp ball".into(),
        )),
    }
}

/// Finite section of the Gram matrix of E(Λ) on a spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramSection {
    pub nodes: Vec<Vec<f64>>,
    pub spectrum: Spectrum,
    pub measure: f64,
    pub eig_min: f64,
    pub eig_max: f64,
    /// Largest estimated quadrature error over the entries.
    pub entry_error: f64,
    #[serde(skip)]
    pub matrix: DMatrix<Complex64>,
}

impl GramSection {
    /// CSV dump of the matrix as (row, col, re, im).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,re,im\n");
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let v = self.matrix[(i, j)];
                let _ = writeln!(s, "{i},{j},{:.16e},{:.16e}", v.re, v.im);
            }
        }
        s
    }
}

/// Gram matrix G[j,k] = ∫_S e^{i(λ_j − λ_k)·x} dx and its extreme eigenvalues.
pub fn gram_section(spectrum: &Spectrum, nodes: &[Vec<f64>]) -> Result<GramSection> {
    let n = spectrum.dim();
    if nodes.len() > MAX_GRAM_NODES {
        return Err(CertError::InvalidNodes(format!(
            "{} nodes exceed the limit of {MAX_GRAM_NODES}",
            nodes.len()
        )));
    }
    for p in nodes {
        check_dim(n, p.len())?;
    }
    NodeSet::finite(nodes.to_vec())?;
    let mut tr = Transform::new(spectrum)?;
    let m = nodes.len();
    let mut g = DMatrix::<Complex64>::zeros(m, m);
    let mut d = vec![0.0; n];
    for j in 0..m {
        for k in 0..=j {
            for i in 0..n {
                d[i] = nodes[j][i] - nodes[k][i];
            }
            let v = tr.eval(&d)?;
            g[(j, k)] = v;
            g[(k, j)] = v.conj();
        }
    }
    for j in 0..m {
        g[(j, j)] = Complex64::new(g[(j, j)].re, 0.0);
    }
    let measure = spectrum.measure()?;
    let (eig_min, eig_max) = if m == 0 { (f64::NAN, f64::NAN) } else { hermitian_extremes(&g) };
    Ok(GramSection {
        nodes: nodes.to_vec(),
        spectrum: spectrum.clone(),
        measure,
        eig_min,
        eig_max,
        entry_error: tr.max_error,
        matrix: g,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Stable,
    Degenerating,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub radius: f64,
    pub eig_min: f64,
    pub eig_max: f64,
    pub node_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszTrend {
    pub rows: Vec<TrendRow>,
    pub verdict: Trend,
    pub successive_ratios: Vec<f64>,
    pub thresholds: TrendThresholds,
}

/// Conventions for reading a trend; these are not theorems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendThresholds {
    /// last/first eig_min at or above this reads as stable.
    pub stable: f64,
    /// every successive ratio at or below this reads as degenerating.
    pub degenerating: f64,
    /// eig_min at or below collapse·|S| counts as numerically zero.
    pub collapse: f64,
}

impl Default for TrendThresholds {
    fn default() -> Self {
        TrendThresholds { stable: 0.5, degenerating: 0.9, collapse: 1e-10 }
    }
}

/// eig_min of windowed Gram sections for growing windows, with a reading of
/// the trend.
pub fn riesz_lower_trend(spectrum: &Spectrum, ns: &NodeSet, radii: &[f64]) -> Result<RieszTrend> {
    riesz_lower_trend_with(spectrum, ns, radii, TrendThresholds::default())
}

pub fn riesz_lower_trend_with(
    spectrum: &Spectrum,
    ns: &NodeSet,
    radii: &[f64],
    th: TrendThresholds,
) -> Result<RieszTrend> {
    if radii.len() < 3 {
        return Err(CertError::InvalidSpec("need at least three window radii".into()));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CertError::InvalidSpec("window radii must increase".into()));
    }
    check_dim(spectrum.dim(), ns.dim())?;
    let measure = spectrum.measure()?;
    let mut rows = Vec::new();
    for &r in radii {
        let pts = ns.points_in_ball(r)?;
        if pts.len() < 2 {
            return Err(CertError::WindowTooSmall(format!("window {r} holds {} nodes", pts.len())));
        }
        let g = gram_section(spectrum, &pts)?;
        rows.push(TrendRow { radius: r, eig_min: g.eig_min, eig_max: g.eig_max, node_count: pts.len() });
    }
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].eig_min / w[0].eig_min).collect();
    let collapsed = rows.iter().any(|r| r.eig_min <= th.collapse * measure);
    let shrinking = rows.windows(2).all(|w| w[1].eig_min < w[0].eig_min)
        && ratios.iter().all(|&q| q <= th.degenerating);
    let last_first = rows[rows.len() - 1].eig_min / rows[0].eig_min;
    let verdict = if collapsed || shrinking {
        Trend::Degenerating
    } else if last_first >= th.stable {
        Trend::Stable
    } else {
        Trend::Inconclusive
    };
    Ok(RieszTrend { rows, verdict, successive_ratios: ratios, thresholds: th })
}

/// A finite exponential sum Σ c_j e^{i t_j·x}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSum {
    pub freqs: Vec<Vec<f64>>,
    pub coeffs: Vec<Complex64>,
}

impl ExpSum {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.freqs
            .iter()
            .zip(&self.coeffs)
            .map(|(t, c)| {
                let ph: f64 = t.iter().zip(x).map(|(a, b)| a * b).sum();
                c * Complex64::from_polar(1.0, ph)
            })
            .sum()
    }

    /// ∫ over [−R, R]ⁿ of |f|², exactly.
    pub fn window_norm_sq(&self, radius: f64) -> f64 {
        let n = self.freqs.first().map_or(0, |t| t.len());
        let b = AxisBox { lo: vec![-radius; n], hi: vec![radius; n] };
        let mut acc = Complex64::new(0.0, 0.0);
        let mut d = vec![0.0; n];
        for (tj, cj) in self.freqs.iter().zip(&self.coeffs) {
            for (tk, ck) in self.freqs.iter().zip(&self.coeffs) {
                for i in 0..n {
                    d[i] = tj[i] - tk[i];
                }
                acc += cj * ck.conj() * box_transform(&b, &d);
            }
        }
        acc.re
    }
}

/// ‖f‖_{L²(W)} / ‖f|_{Λ∩W}‖₂ on the window W = [−R, R]ⁿ.
pub fn sampling_ratio_of(f: &ExpSum, nodes_in_window: &[Vec<f64>], radius: f64) -> f64 {
    let num = f.window_norm_sq(radius).max(0.0).sqrt();
    let den = nodes_in_window
        .iter()
        .map(|p| f.eval(p).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Nodes inside the cube [−R, R]ⁿ.
pub fn nodes_in_cube(ns: &NodeSet, radius: f64) -> Result<Vec<Vec<f64>>> {
    let n = ns.dim() as f64;
    Ok(ns
        .points_in_ball(radius * n.sqrt())?
        .into_iter()
        .filter(|p| p.iter().all(|v| v.abs() <= radius))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingRatios {
    pub worst_ratio: f64,
    pub samples: Vec<f64>,
    pub window_radius: f64,
    pub seed: u64,
    pub terms: usize,
}

/// Random exponential sums with frequencies uniform in S; worst observed
/// ratio of windowed L² norm to the ℓ² norm of samples.
pub fn empirical_sampling_ratio(
    spectrum: &Spectrum,
    ns: &NodeSet,
    trials: usize,
    seed: u64,
    window_radius: f64,
) -> Result<SamplingRatios> {
    if trials < 10 {
        return Err(CertError::InvalidSpec(format!("need at least 10 trials, got {trials}")));
    }
    check_dim(spectrum.dim(), ns.dim())?;
    let terms = 8;
    let nodes = nodes_in_cube(ns, window_radius)?;
    let mut samples = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let freqs: Vec<Vec<f64>> = (0..terms).map(|_| spectrum.sample(&mut rng)).collect();
        let coeffs: Vec<Complex64> = (0..terms)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        samples.push(sampling_ratio_of(&ExpSum { freqs, coeffs }, &nodes, window_radius));
    }
    let worst = samples.iter().copied().fold(0.0, f64::max);
    Ok(SamplingRatios { worst_ratio: worst, samples, window_radius, seed, terms })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftDeterminant {
    pub det: Complex64,
    pub tolerance: f64,
    /// |det| > tolerance: E(⋃(ℤⁿ+u_l)) is a Riesz basis on the box union.
    pub criterion_satisfied: bool,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// The k×k matrix (e^{2πi u_l·m_j}).
pub fn shift_matrix(shifts: &[Vec<f64>], translates: &[Vec<i64>]) -> Result<DMatrix<Complex64>> {
    let k = shifts.len();
    if k == 0 || translates.len() != k {
        return Err(CertError::InvalidSpec(format!(
            "need equally many shifts and translates, got {} and {}",
            k,
            translates.len()
        )));
    }
    let n = shifts[0].len();
    for u in shifts {
        check_dim(n, u.len())?;
    }
    for m in translates {
        check_dim(n, m.len())?;
    }
    Ok(DMatrix::from_fn(k, k, |l, j| {
        let ph: f64 = shifts[l].iter().zip(&translates[j]).map(|(u, m)| u * *m as f64).sum();
        Complex64::from_polar(1.0, 2.0 * PI * ph)
    }))
}

/// det(e^{2πi u_l·m_j}) with the default tolerance 1e-10·k!.
pub fn shifted_lattice_det(shifts: &[Vec<f64>], translates: &[Vec<i64>]) -> Result<ShiftDeterminant> {
    let a = shift_matrix(shifts, translates)?;
    let det = complex_det(&a);
    let tolerance = 1e-10 * factorial(shifts.len());
    Ok(ShiftDeterminant { det, tolerance, criterion_satisfied: det.norm() > tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::quad::adaptive;

    fn pts1(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|x| vec![*x]).collect()
    }

    #[test]
    fn integer_nodes_are_orthogonal() {
        let s = Spectrum::from(ConvexBody::cube(1, PI).unwrap());
        let g = gram_section(&s, &pts1(&[0.0, 1.0, 2.0])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 * PI } else { 0.0 };
                assert!((g.matrix[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn off_diagonal_matches_quadrature() {
        let s = Spectrum::from(ConvexBody::cube(1, 1.0).unwrap());
        let g = gram_section(&s, &pts1(&[0.0, PI / 4.0])).unwrap();
        let t = PI / 4.0;
        let oracle = adaptive(|x| (t * x).cos(), -1.0, 1.0, 1e-13).unwrap().value;
        assert!((g.matrix[(1, 0)].re - oracle).abs() < 1e-12);
        assert!((oracle - 1.8006).abs() < 1e-4);
    }

    #[test]
    fn square_grid_nodes() {
        let s = Spectrum::from(ConvexBody::cube(2, PI).unwrap());
        let nodes: Vec<Vec<f64>> = (0..3)
            .flat_map(|a| (0..3).map(move |b| vec![a as f64, b as f64]))
            .collect();
        let g = gram_section(&s, &nodes).unwrap();
        let tp2 = 4.0 * PI * PI;
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j { tp2 } else { 0.0 };
                assert!((g.matrix[(i, j)].re - want).abs() < 1e-10);
                assert!(g.matrix[(i, j)].im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn disc_entries_match_bessel_form() {
        // ∫_{|x|≤1} e^{i d·x} dx = 2π J₁(|d|)/|d|
        let s = Spectrum::from(ConvexBody::ball(2, 1.0).unwrap());
        let nodes = vec![vec![0.0, 0.0], vec![1.3, -0.4], vec![-2.0, 3.5]];
        let g = gram_section(&s, &nodes).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let d = [nodes[j][0] - nodes[k][0], nodes[j][1] - nodes[k][1]];
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let want = if r == 0.0 {
                    PI
                } else {
                    2.0 * PI * crate::special::bessel_j(1.0, r) / r
                };
                assert!((g.matrix[(j, k)].re - want).abs() < 1e-9, "{j} {k}");
            }
        }
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let s = Spectrum::from(ConvexBody::cube(1, PI).unwrap());
        assert!(matches!(
            gram_section(&s, &pts1(&[0.0, 1.0, 0.0])),
            Err(CertError::InvalidNodes(_))
        ));
    }

    #[test]
    fn integer_trend_is_stable() {
        let s = Spectrum::from(ConvexBody::cube(1, PI).unwrap());
        let z = NodeSet::from(Lattice::identity(1).unwrap());
        let t = riesz_lower_trend(&s, &z, &[10.0, 20.0, 40.0]).unwrap();
        assert_eq!(t.verdict, Trend::Stable);
        for r in &t.rows {
            assert!((r.eig_min - 2.0 * PI).abs() < 1e-9);
        }
        let tiny = riesz_lower_trend(&s, &z, &[0.1, 0.2, 0.3]);
        assert!(matches!(tiny, Err(CertError::WindowTooSmall(_))));
    }

    #[test]
    fn determinant_examples() {
        let d = shifted_lattice_det(&[vec![0.0], vec![0.25]], &[vec![0], vec![2]]).unwrap();
        assert!((d.det - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!(d.criterion_satisfied);
        let d = shifted_lattice_det(&[vec![0.0], vec![0.5]], &[vec![0], vec![2]]).unwrap();
        assert!(d.det.norm() < 1e-12);
        assert!(!d.criterion_satisfied);
        let d = shifted_lattice_det(&[vec![0.3], vec![0.3]], &[vec![0], vec![1]]).unwrap();
        assert!(!d.criterion_satisfied);
    }

    #[test]
    fn single_exponential_ratio() {
        let f = ExpSum { freqs: vec![vec![0.7]], coeffs: vec![Complex64::new(1.0, 0.0)] };
        let z = NodeSet::from(Lattice::identity(1).unwrap());
        let nodes = nodes_in_cube(&z, 20.0).unwrap();
        // |f| ≡ 1: ratio = √(40 / 41)
        let r = sampling_ratio_of(&f, &nodes, 20.0);
        assert!((r - (40.0f64 / 41.0).sqrt()).abs() < 1e-12);
    }
}
