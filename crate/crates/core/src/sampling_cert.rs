//! Sampling certificates with constant 1/cos ρ, where ρ is the covering
//! radius of the nodes measured in the polar gauge; empirical checks of the
//! sup-norm bound; and the critical configuration at ρ = π/2.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Verdict};
use crate::error::{check_dim, CertError, Result};
use crate::expsys::{nodes_in_cube, ExpSum};
use crate::geometry::{ConvexBody, Level, PolarOf};
use crate::lattice::{covering_radius_in, min_separation, CoveringReport, NodeSet};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingCertificate {
    /// Grid estimate of the covering radius in the polar gauge (a lower bound).
    pub rho_lower: f64,
    /// Conservative upper bound on the covering radius.
    pub rho_upper: f64,
    /// 1/cos(rho_upper) when proved, else ∞.
    pub constant: f64,
    pub verdict: Verdict,
    pub label: String,
    pub covering: CoveringReport,
    pub notes: Vec<String>,
}

impl SamplingCertificate {
    pub fn is_proved(&self) -> bool {
        self.verdict == Verdict::Proved
    }

    pub fn to_certificate(&self) -> Certificate {
        let mut c = Certificate::new("sampling");
        let detail = match self.label.as_str() {
            "proved" => format!("covering radius <= {:.6} < pi/2 in the polar gauge", self.rho_upper),
            "refuted_premise" => format!("covering radius >= {:.6} >= pi/2: no certificate", self.rho_lower),
            _ => "covering radius bounds straddle pi/2".to_string(),
        };
        c.finding("sampling", self.verdict, &self.label, detail);
        c.constant("rho_lower", self.rho_lower);
        c.constant("rho_upper", self.rho_upper);
        c.constant("constant", self.constant);
        c.tolerance("grid_step", self.covering.grid_step);
        c.tolerance("covering_margin", self.covering.margin);
        c.notes = self.notes.clone();
        c
    }
}

/// Certifies ‖f‖_∞ ≤ (1/cos ρ)‖f|_Λ‖_∞ on B_K when Λ + ρK° covers space with
/// ρ < π/2.
pub fn beurling_certify(
    k: &ConvexBody,
    ns: &NodeSet,
    domain_radius: f64,
    grid_step: Option<f64>,
) -> Result<SamplingCertificate> {
    check_dim(k.dim(), ns.dim())?;
    if !k.is_symmetric(0x5eed, 256) {
        return Err(CertError::InvalidSpec("body is not centrally symmetric".into()));
    }
    let polar = PolarOf::new(k)?;
    let cov = covering_radius_in(ns, &polar, domain_radius, grid_step)?;
    let (rho_lower, rho_upper) = (cov.rho_half, cov.rho_upper);
    let mut notes = Vec::new();
    let (verdict, label, constant) = if rho_upper < FRAC_PI_2 {
        (Verdict::Proved, "proved", 1.0 / rho_upper.cos())
    } else if rho_lower >= FRAC_PI_2 * (1.0 - 1e-12) {
        (Verdict::Refuted, "refuted_premise", f64::INFINITY)
    } else {
        (Verdict::Inconclusive, "inconclusive", f64::INFINITY)
    };
    if !ns.is_periodic() {
        notes.push(format!(
            "node set is not periodic: covering checked on [-{domain_radius}, {domain_radius}]^n only"
        ));
    }
    if verdict == Verdict::Proved {
        if let Ok(d) = min_separation(ns, domain_radius) {
            if d > 0.0 {
                notes.push(format!(
                    "nodes are uniformly discrete (separation {d:.6}), so they also form a sampling set for PW_K"
                ));
            }
        }
        notes.push("sampling for B on a slightly larger body transfers to PW on K".into());
    }
    if k.dim() == 1 {
        notes.push("in one dimension the same covering criterion is the classical interval result".into());
    }
    Ok(SamplingCertificate { rho_lower, rho_upper, constant, verdict, label: label.into(), covering: cov, notes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingCheck {
    pub worst_observed: f64,
    pub ratios: Vec<f64>,
    pub grid_step: f64,
    pub eval_radius: f64,
    pub seed: u64,
}

/// sup of |f| on the grid over [−R, R]ⁿ with the given points per axis.
fn grid_sup(f: &ExpSum, radius: f64, per_axis: usize) -> f64 {
    let n = f.freqs[0].len();
    let h = 2.0 * radius / (per_axis - 1) as f64;
    // separable phases: e^{i t·x} = Π_k e^{i t_k x_k}
    let tables: Vec<Vec<Vec<Complex64>>> = f
        .freqs
        .iter()
        .map(|t| {
            (0..n)
                .map(|k| {
                    (0..per_axis)
                        .map(|j| Complex64::from_polar(1.0, t[k] * (-radius + h * j as f64)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; n];
    let mut best = 0.0f64;
    loop {
        let mut v = Complex64::new(0.0, 0.0);
        for (tab, c) in tables.iter().zip(&f.coeffs) {
            let mut e = *c;
            for k in 0..n {
                e *= tab[k][idx[k]];
            }
            v += e;
        }
        best = best.max(v.norm());
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Points per axis: step ≤ R/2048, capped at 2²⁴ grid points in total.
fn points_per_axis(n: usize) -> usize {
    let full = 4097usize;
    let cap = (16_777_216f64).powf(1.0 / n as f64).floor() as usize;
    full.min(cap.max(3))
}

/// ‖f‖_∞ / ‖f|_Λ‖_∞ for one exponential sum, on a window.
pub fn sup_ratio(f: &ExpSum, nodes: &[Vec<f64>], eval_radius: f64) -> f64 {
    let n = f.freqs[0].len();
    let node_sup = nodes.iter().map(|p| f.eval(p).norm()).fold(0.0, f64::max);
    let fsup = grid_sup(f, eval_radius, points_per_axis(n)).max(node_sup);
    if node_sup == 0.0 {
        f64::INFINITY
    } else {
        fsup / node_sup
    }
}

/// Nodes used for a window of radius R: those within the cube enlarged by
/// the Euclidean reach of the covering radius.
fn verification_nodes(k: &ConvexBody, ns: &NodeSet, cert: &SamplingCertificate, eval_radius: f64) -> Result<Vec<Vec<f64>>> {
    let polar = PolarOf::new(k)?;
    nodes_in_cube(ns, eval_radius + polar.reach(cert.rho_upper))
}

/// Random members of B_K with at most 12 frequencies; returns the worst
/// observed sup-norm ratio.
pub fn verify_sampling_bound(
    k: &ConvexBody,
    ns: &NodeSet,
    cert: &SamplingCertificate,
    trials: usize,
    seed: u64,
    eval_radius: f64,
) -> Result<SamplingCheck> {
    if !cert.is_proved() {
        return Err(CertError::Precondition("certificate is not proved".into()));
    }
    check_dim(k.dim(), ns.dim())?;
    let n = k.dim();
    let nodes = verification_nodes(k, ns, cert, eval_radius)?;
    let spec = Spectrum::from(k.clone());
    let mut ratios = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let terms = rng.random_range(1..=12usize);
        let freqs: Vec<Vec<f64>> = (0..terms).map(|_| spec.sample(&mut rng)).collect();
        let coeffs: Vec<Complex64> = (0..terms)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        ratios.push(sup_ratio(&ExpSum { freqs, coeffs }, &nodes, eval_radius));
    }
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    Ok(SamplingCheck {
        worst_observed: worst,
        ratios,
        grid_step: 2.0 * eval_radius / (points_per_axis(n) - 1) as f64,
        eval_radius,
        seed,
    })
}

/// Same as [`verify_sampling_bound`] for one given function.
pub fn sampling_ratio_for(
    k: &ConvexBody,
    ns: &NodeSet,
    cert: &SamplingCertificate,
    f: &ExpSum,
    eval_radius: f64,
) -> Result<f64> {
    let nodes = verification_nodes(k, ns, cert, eval_radius)?;
    Ok(sup_ratio(f, &nodes, eval_radius))
}

/// Hyperplane nodes {x : x·t₀ ∈ πℤ} and f(x) = sin(x·t₀), which vanishes on
/// them although they cover space at polar radius π/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalConfig {
    pub t0: Vec<f64>,
    pub x0: Vec<f64>,
    pub nodes: String,
    pub function: String,
    pub max_abs_f_on_nodes: f64,
    pub max_cover_distance: f64,
    pub samples: usize,
}

pub fn critical_config(k: &ConvexBody, samples: usize, seed: u64) -> Result<CriticalConfig> {
    let n = k.dim();
    // boundary pair along a coordinate axis whose direction is also normal
    let mut pair = None;
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let g = k.gauge_of(&e);
        let h = k.support_of(&e)?;
        if (g * h - 1.0).abs() < 1e-12 {
            let t0: Vec<f64> = e.iter().map(|v| v / g).collect();
            let x0: Vec<f64> = e.iter().map(|v| FRAC_PI_2 * v / h).collect();
            pair = Some((t0, x0));
            break;
        }
    }
    let (t0, x0) = pair.ok_or_else(|| {
        CertError::UnsupportedBody("no coordinate axis gives a boundary pair with x0·t0 = pi/2".into())
    })?;
    let t2: f64 = t0.iter().map(|v| v * v).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut max_f = 0.0f64;
    let mut max_d = 0.0f64;
    for _ in 0..samples {
        // node: random point of a random hyperplane x·t0 = mπ
        let m = rng.random_range(-20i64..=20) as f64;
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let wt = dot(&w, &t0) / t2;
        let node: Vec<f64> = (0..n).map(|i| w[i] - wt * t0[i] + m * PI * t0[i] / t2).collect();
        max_f = max_f.max(dot(&node, &t0).sin().abs());
        // domain point: distance to the nearest hyperplane, measured in K°
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let s = dot(&y, &t0);
        let off = s - PI * (s / PI).round();
        let v: Vec<f64> = x0.iter().map(|c| c * off / FRAC_PI_2).collect();
        let lam: Vec<f64> = y.iter().zip(&v).map(|(a, b)| a - b).collect();
        debug_assert!((dot(&lam, &t0) / PI - (s / PI).round()).abs() < 1e-9);
        max_d = max_d.max(k.support_of(&sub(&y, &lam))?);
    }
    let fmt = |v: &[f64]| {
        v.iter().map(|c| format!("{c:.6}")).collect::<Vec<_>>().join(", ")
    };
    Ok(CriticalConfig {
        nodes: format!("{{x : x.t0 in pi Z}}, t0 = ({})", fmt(&t0)),
        function: format!("sin(x.t0), t0 = ({})", fmt(&t0)),
        t0,
        x0,
        max_abs_f_on_nodes: max_f,
        max_cover_distance: max_d,
        samples,
    })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    #[test]
    fn interval_with_step_two() {
        let k = ConvexBody::cube(1, 1.0).unwrap();
        let ns = NodeSet::from(Lattice::diag(&[2.0]).unwrap());
        let c = beurling_certify(&k, &ns, 10.0, None).unwrap();
        assert!(c.is_proved());
        assert!((c.rho_lower - 1.0).abs() < 1e-12);
        assert!(c.constant >= 1.0 / 1f64.cos());
        assert!(c.constant < 1.0 / 1f64.cos() + 0.05);
    }

    #[test]
    fn interval_with_step_pi_is_refused() {
        let k = ConvexBody::cube(1, 1.0).unwrap();
        let ns = NodeSet::from(Lattice::diag(&[PI]).unwrap());
        let c = beurling_certify(&k, &ns, 10.0, None).unwrap();
        assert_eq!(c.verdict, Verdict::Refuted);
        assert_eq!(c.label, "refuted_premise");
    }

    #[test]
    fn disc_with_square_lattice() {
        let k = ConvexBody::ball(2, 1.0).unwrap();
        for (a, proved) in [(2.0, true), (2.3, false)] {
            let ns = NodeSet::from(Lattice::scaled_identity(2, a).unwrap());
            let c = beurling_certify(&k, &ns, 10.0, None).unwrap();
            assert!((c.rho_lower - a * 0.5f64.sqrt()).abs() < 1e-9);
            assert_eq!(c.is_proved(), proved, "a = {a}");
        }
    }

    #[test]
    fn constant_function_ratio_is_one() {
        let k = ConvexBody::cube(1, 1.0).unwrap();
        let ns = NodeSet::from(Lattice::diag(&[2.0]).unwrap());
        let c = beurling_certify(&k, &ns, 10.0, None).unwrap();
        let f = ExpSum { freqs: vec![vec![0.0]], coeffs: vec![Complex64::new(1.0, 0.0)] };
        assert_eq!(sampling_ratio_for(&k, &ns, &c, &f, 50.0).unwrap(), 1.0);
    }

    #[test]
    fn critical_interval() {
        let k = ConvexBody::cube(1, 1.0).unwrap();
        let cfg = critical_config(&k, 1000, 3).unwrap();
        assert_eq!(cfg.t0, vec![1.0]);
        assert!(cfg.max_abs_f_on_nodes < 1e-12);
        assert!(cfg.max_cover_distance <= FRAC_PI_2 + 1e-12);
    }
}
